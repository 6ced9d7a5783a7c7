//! Separability analysis for completely symmetric (CS) multipartite states.
//!
//! A state ρ on (Cᴺ)^{⊗d} is CS when its coefficients ρ_{i₁j₁…i_dj_d} are
//! invariant under every permutation of the 2d indices. The crate decides
//! S-separability (ρ = Σ pᵢ (xᵢxᵢᵀ)^{⊗d} with real xᵢ) where a rule applies,
//! produces explicit decompositions, and covers the structured Hankel and
//! Toeplitz multi-qubit families and the geometric measure of entanglement
//! for nonnegative states.

pub mod document;
pub mod engine;
pub mod error;
pub mod gme;
pub mod linalg;
pub mod named;
pub mod product;
pub mod random;
pub mod reducibility;
pub mod states;
pub mod structured;
pub mod tensors;

pub use engine::{classify, s_decompose, Certificate, Rule, Term, Verdict};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use states::{DensityMatrix, Subspace, Tolerances};

/// Largest dense dimension Nᵈ accepted anywhere in the crate.
pub const DENSE_LIMIT: usize = 4096;
