//! Seeded random instances: S-separable mixtures, local operators, and
//! complex symmetric matrices.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, CMat, RMat, RVec};
use crate::states::{self, DensityMatrix};

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vector(n: usize, rng: &mut Rng64) -> RVec {
    RVec::from_fn(n, |_, _| rng.sample(StandardNormal))
}

pub fn unit_vector(n: usize, rng: &mut Rng64) -> RVec {
    loop {
        let v = gaussian_vector(n, rng);
        if v.norm() > 1e-3 {
            return linalg::normalize_real(&v);
        }
    }
}

/// Weights in [0.1, 1], normalized to sum one.
pub fn weights(k: usize, rng: &mut Rng64) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

/// Σ wᵢ (xᵢxᵢᵀ)^{⊗d} for unit xᵢ.
pub fn mixture(locals: &[RVec], weights: &[f64], d: usize) -> DensityMatrix {
    let n = locals[0].len();
    let dim = n.pow(d as u32);
    let mut m = CMat::zeros(dim, dim);
    for (x, &w) in locals.iter().zip(weights) {
        let v = linalg::tensor_power(&linalg::normalize_real(x), d);
        m += states::real_projector(&v) * Complex64::new(w, 0.0);
    }
    DensityMatrix::new(m, vec![n; d]).expect("mixture of product projectors is a state")
}

#[derive(Debug, Clone)]
pub struct Mixture {
    pub state: DensityMatrix,
    pub locals: Vec<RVec>,
    pub weights: Vec<f64>,
}

/// Random S-separable state with `k` terms of Gaussian directions.
pub fn s_separable(n: usize, d: usize, k: usize, rng: &mut Rng64) -> Mixture {
    let locals: Vec<RVec> = (0..k).map(|_| unit_vector(n, rng)).collect();
    let weights = weights(k, rng);
    Mixture { state: mixture(&locals, &weights, d), locals, weights }
}

/// Haar-like random orthogonal matrix from the QR of a Gaussian matrix.
pub fn orthogonal(n: usize, rng: &mut Rng64) -> RMat {
    let g = RMat::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let signs = RVec::from_fn(n, |i, _| if r[(i, i)] < 0.0 { -1.0 } else { 1.0 });
    q * RMat::from_diagonal(&signs)
}

/// Random invertible matrix with condition number below 100.
pub fn invertible(n: usize, rng: &mut Rng64) -> RMat {
    loop {
        let g = RMat::from_fn(n, n, |_, _| rng.sample(StandardNormal));
        let sv = g.singular_values();
        if sv.min() > 0.0 && sv.max() / sv.min() < 100.0 {
            return g;
        }
    }
}

pub fn complex_symmetric(n: usize, rng: &mut Rng64) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    &g + g.transpose()
}
