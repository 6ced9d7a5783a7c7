//! Named constructions: the rank-7 separable seed σ and the rank-6 PPT
//! entangled ρ = σ − λ|φ₇⟩⟨φ₇| on 4⊗4, the two-qutrit edge family (α, β, ρ),
//! and the Hermitian perturbation used for rank-6 states with a complex
//! product vector in range.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, RMat, RVec};
use crate::product::{self, bipartite, SearchOptions};
use crate::states::{self, DensityMatrix};

#[derive(Debug, Clone)]
pub struct NamedState {
    pub name: String,
    pub params: Vec<(String, f64)>,
    pub state: DensityMatrix,
    pub provenance: String,
}

/// Local vectors x₀,…,x₇ (unnormalized).
pub fn sigma_locals() -> [RVec; 8] {
    let v = |a: [f64; 4]| RVec::from_row_slice(&a);
    [
        v([1.0, 0.0, 0.0, 0.0]),
        v([0.0, 1.0, 0.0, 0.0]),
        v([0.0, 0.0, 1.0, 0.0]),
        v([0.0, 0.0, 0.0, 1.0]),
        v([1.0, 1.0, 1.0, 1.0]),
        v([1.0, 2.0, 3.0, 4.0]),
        v([1.0, -2.0, 3.0, -4.0]),
        v([1.0, -8.0 / 3.0, 1.0, -8.0 / 3.0]),
    ]
}

/// φᵢ = xᵢ⊗xᵢ.
pub fn phi(i: usize) -> RVec {
    let x = &sigma_locals()[i];
    x.kronecker(x)
}

fn sigma_matrix(lambdas: &[f64; 7]) -> RMat {
    let mut m = RMat::zeros(16, 16);
    for (i, &l) in lambdas.iter().enumerate() {
        let p = phi(i);
        m += &p * p.transpose() * l;
    }
    m
}

/// σ = Σ_{i<7} λᵢ |φᵢ⟩⟨φᵢ| with unnormalized φᵢ.
pub fn build_sigma(lambdas: &[f64; 7]) -> Result<NamedState> {
    if let Some(i) = lambdas.iter().position(|&l| !(l > 0.0)) {
        return Err(Error::Invalid(format!("weight λ{i} must be positive")));
    }
    let state = DensityMatrix::from_real(&sigma_matrix(lambdas), vec![4, 4])?;
    Ok(NamedState {
        name: "sigma".into(),
        params: lambdas.iter().enumerate().map(|(i, &l)| (format!("lambda{i}"), l)).collect(),
        state,
        provenance: "rank-7 separable 4⊗4 CS state whose range holds exactly 8 real product vectors".into(),
    })
}

pub const DEFAULT_SIGMA_WEIGHTS: [f64; 7] = [1.0 / 7.0; 7];

/// Largest λ with σ − λ|φ₇⟩⟨φ₇| ⪰ 0, namely 1/⟨φ₇|σ⁺|φ₇⟩.
pub fn maximal_subtraction(sigma: &RMat) -> Result<f64> {
    let pinv = linalg::psd_pinv(&linalg::complexify(sigma), 1e-10);
    let p = linalg::complexify_vec(&phi(7));
    let val = (p.adjoint() * &pinv * &p)[(0, 0)].re;
    if !(val.is_finite() && val > 0.0) {
        return Err(Error::Numeric(format!("⟨φ₇|σ⁺|φ₇⟩ = {val:.3e}")));
    }
    let resid = (linalg::complexify(sigma) * &pinv * &p - &p).norm() / p.norm();
    if resid > 1e-8 {
        return Err(Error::Numeric(format!("φ₇ not in range of σ (residual {resid:.3e})")));
    }
    Ok(1.0 / val)
}

/// ρ = σ − λ|φ₇⟩⟨φ₇|. With `lambda = None` the maximal λ is used and ρ has
/// rank 6; an explicit λ above the maximum is rejected as non-PSD.
pub fn build_entangled_rank6_with(lambdas: &[f64; 7], lambda: Option<f64>) -> Result<NamedState> {
    let sigma = build_sigma(lambdas)?;
    let s = sigma.state.real_matrix();
    let lmax = maximal_subtraction(&s)?;
    let l = lambda.unwrap_or(lmax);
    if l < 0.0 {
        return Err(Error::Invalid("subtracted weight must be nonnegative".into()));
    }
    let p = phi(7);
    let rho = &s - &p * p.transpose() * l;
    if l > lmax * (1.0 + 1e-12) {
        let (vals, _) = linalg::symmetric_eigen(&rho);
        return Err(Error::NotPsd(vals[0]));
    }
    let state = DensityMatrix::from_real(&rho, vec![4, 4])?;
    let mut params = sigma.params;
    params.push(("lambda7".into(), l));
    Ok(NamedState { name: "entangled-rank6".into(), params, state, provenance: "σ minus the maximal multiple of |φ₇⟩⟨φ₇|".into() })
}

pub fn build_entangled_rank6(lambdas: &[f64; 7]) -> Result<NamedState> {
    build_entangled_rank6_with(lambdas, None)
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeReport {
    pub rank: usize,
    pub cs: bool,
    pub ppt: bool,
    pub edge: bool,
    pub extreme: bool,
    /// The product-vector enumeration behind `edge` is complete.
    pub certified: bool,
    pub product_vectors: Vec<Vec<f64>>,
    pub transcript: String,
}

/// Edge: no product vector in the range. Extreme additionally needs CS and rank 6.
pub fn check_edge_extreme(state: &DensityMatrix) -> Result<EdgeReport> {
    if state.parties() != 2 {
        return Err(Error::Dimension("edge check needs a bipartite state".into()));
    }
    let rk = states::range_kernel(state, 1e-10);
    if rk.rank != 6 {
        return Err(Error::Invalid(format!("rank {} ≠ 6", rk.rank)));
    }
    let cs = states::is_cs(state, 1e-10);
    let ppt = states::is_ppt(state, 1e-10);
    let range = rk.range.real_basis(1e-9).ok_or_else(|| Error::Invalid("range is not real".into()))?;
    if cs {
        let n = state.dims()[0];
        let search = product::symmetric_product_vectors(&range, n, 2, &SearchOptions::default())?;
        let edge = search.vectors.is_empty() && search.complete;
        let t = &search.transcript;
        Ok(EdgeReport {
            rank: 6,
            cs,
            ppt,
            edge,
            extreme: edge && ppt,
            certified: search.complete,
            product_vectors: search.vectors.iter().map(|p| p.local.clone()).collect(),
            transcript: format!(
                "{}: {} constraints, {} paths, {} distinct nonsingular of {} (Bezout), {} real candidates, {} product vectors",
                t.method,
                t.constraints,
                t.paths,
                t.distinct_nonsingular,
                t.bezout,
                t.real_candidates,
                search.vectors.len()
            ),
        })
    } else {
        let (da, db) = (state.dims()[0], state.dims()[1]);
        let s = bipartite::bipartite_product_vectors(&range, da, db, 7, 200);
        Ok(EdgeReport {
            rank: 6,
            cs,
            ppt,
            edge: s.found.is_empty(),
            extreme: false,
            certified: false,
            product_vectors: s.found.iter().map(|p| p.x.iter().copied().chain(p.y.iter().copied()).collect()).collect(),
            transcript: format!("alternating search, {} restarts, {} product vectors, best residual {:.3e}", s.restarts, s.found.len(), s.best_residual),
        })
    }
}

/// The two-qutrit family: α on 3⊗3, β = PαP† and ρ = α + εβ on 3⊗4.
#[derive(Debug, Clone)]
pub struct Blokovi {
    pub alpha: DensityMatrix,
    pub beta: DensityMatrix,
    pub rho: DensityMatrix,
    /// Row vectors γ₁…γ₆ spanning the range of ρ, as rows of a 6×12 matrix.
    pub rows: RMat,
}

/// Local map of the second party in β: e₀→e₃, e₁→e₁, e₂→e₂ (zero-based).
fn p_local() -> RMat {
    let mut p = RMat::zeros(4, 3);
    p[(3, 0)] = 1.0;
    p[(1, 1)] = 1.0;
    p[(2, 2)] = 1.0;
    p
}

fn embed_local() -> RMat {
    RMat::identity(4, 3)
}

pub fn build_blokovi(a: f64, b: f64, c: f64, d: f64, eps: f64) -> Result<Blokovi> {
    if a == 0.0 || !a.is_finite() {
        return Err(Error::Invalid("a must be nonzero".into()));
    }
    if !(b > 0.0 && c > 0.0 && d > 0.0) {
        return Err(Error::Invalid("b, c, d must be positive".into()));
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::Invalid("ε must be nonnegative".into()));
    }
    let c0 = RMat::from_row_slice(4, 3, &[0.0, a, b, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let c1 = RMat::from_row_slice(4, 3, &[0.0, 0.0, 0.0, 0.0, 0.0, c, 0.0, 0.0, 1.0, 1.0, 0.0, -1.0 / d]);
    let c2 = RMat::from_row_slice(4, 3, &[0.0, -1.0 / b, 0.0, 0.0, 1.0, 0.0, 1.0, -c, 0.0, d, 0.0, 0.0]);
    // columns indexed by (block k, column j) ↦ 3k + j
    let r = RMat::from_fn(4, 9, |i, col| [&c0, &c1, &c2][col / 3][(i, col % 3)]);
    let alpha = r.transpose() * &r;
    let id3 = RMat::identity(3, 3);
    let big_p = id3.kronecker(&p_local());
    let big_i = id3.kronecker(&embed_local());
    let beta = &big_p * &alpha * big_p.transpose();
    let rho = &big_i * &alpha * big_i.transpose() + &beta * eps;
    let ra = &r * big_i.transpose();
    let rb = &r * big_p.transpose();
    let rows = RMat::from_rows(&[ra.row(0), ra.row(1), ra.row(2), ra.row(3), rb.row(2), rb.row(3)].map(|x| x.into_owned()));
    Ok(Blokovi {
        alpha: DensityMatrix::from_real(&alpha, vec![3, 3])?,
        beta: DensityMatrix::from_real(&beta, vec![3, 4])?,
        rho: DensityMatrix::from_real(&rho, vec![3, 4])?,
        rows,
    })
}

/// Embeds a state on 3⊗4 into 4⊗4 (first party padded with a zero level).
pub fn embed_in_four_by_four(state: &DensityMatrix) -> Result<DensityMatrix> {
    if state.dims() != [3, 4] {
        return Err(Error::Dimension("expected a 3⊗4 state".into()));
    }
    let e = linalg::complexify(&RMat::identity(4, 3).kronecker(&RMat::identity(4, 4)));
    DensityMatrix::new(&e * state.matrix() * e.adjoint(), vec![4, 4])
}

/// H = (|01⟩+|10⟩)(⟨01|+⟨10|) − (|00⟩−|11⟩)(⟨00|−⟨11|) on N⊗N and the
/// interval of ε with ρ + εH ⪰ 0.
pub fn build_h_perturbation(rho: &DensityMatrix) -> Result<(CMat, (f64, f64))> {
    let n = rho.local_dim().filter(|&n| n >= 2 && rho.parties() == 2).ok_or_else(|| Error::Dimension("needs an N⊗N state with N ≥ 2".into()))?;
    let mut u = RVec::zeros(n * n);
    u[1] = 1.0;
    u[n] = 1.0;
    let mut v = RVec::zeros(n * n);
    v[0] = 1.0;
    v[n + 1] = -1.0;
    let rk = states::range_kernel(rho, 1e-10);
    for (name, w) in [("|01⟩+|10⟩", &u), ("|00⟩−|11⟩", &v)] {
        if !rk.range.contains(&linalg::complexify_vec(w), 1e-8) {
            return Err(Error::Condition(format!("{name} is not in the range")));
        }
    }
    let h = linalg::complexify(&(&u * u.transpose() - &v * v.transpose()));
    let q = rk.range.basis();
    let a = linalg::hermitize(&(q.adjoint() * rho.matrix() * q));
    let b = linalg::hermitize(&(q.adjoint() * &h * q));
    let chol = a.cholesky().ok_or_else(|| Error::Numeric("state restricted to its range is not positive definite".into()))?;
    let linv = chol.l().try_inverse().ok_or_else(|| Error::Numeric("singular Cholesky factor".into()))?;
    let c = &linv * b * linv.adjoint();
    let (mu, _) = linalg::hermitian_eigen(&c);
    let lo = if mu.last().copied().unwrap_or(0.0) > 0.0 { -1.0 / mu.last().unwrap() } else { f64::NEG_INFINITY };
    let hi = if mu[0] < 0.0 { -1.0 / mu[0] } else { f64::INFINITY };
    Ok((h, (lo, hi)))
}

/// Rank-6 4⊗4 CS state containing (|0⟩+i|1⟩)^{⊗2} in its range.
pub fn complex_product_example() -> Result<DensityMatrix> {
    let v = |a: [f64; 4]| RVec::from_row_slice(&a);
    let locals = [v([1.0, 0.0, 0.0, 0.0]), v([0.0, 1.0, 0.0, 0.0]), v([1.0, 1.0, 0.0, 0.0]), v([0.0, 0.0, 1.0, 0.0]), v([0.0, 0.0, 0.0, 1.0]), v([1.0, -1.0, 1.0, 2.0])];
    let mut m = CMat::zeros(16, 16);
    for x in &locals {
        m += states::real_projector(&x.kronecker(x));
    }
    DensityMatrix::new(m, vec![4, 4])
}

pub fn complex_product_vector() -> CVec {
    let x = CVec::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]);
    x.kronecker(&x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_rejects_nonpositive() {
        assert!(build_sigma(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn sigma_rank_seven() {
        let s = build_sigma(&DEFAULT_SIGMA_WEIGHTS).unwrap();
        assert_eq!(s.state.rank(1e-10), 7);
        assert!(states::is_cs(&s.state, 1e-12));
        assert!(states::is_ppt(&s.state, 1e-10));
    }

    #[test]
    fn rank_six_and_overshoot() {
        let r = build_entangled_rank6(&DEFAULT_SIGMA_WEIGHTS).unwrap();
        assert_eq!(r.state.rank(1e-10), 6);
        let l = r.params.last().unwrap().1;
        assert!(matches!(build_entangled_rank6_with(&DEFAULT_SIGMA_WEIGHTS, Some(l * 1.01)), Err(Error::NotPsd(_))));
    }

    #[test]
    fn blokovi_eps_zero_is_alpha() {
        let b = build_blokovi(1.0, 1.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(b.rho.rank(1e-10), 4);
        assert!(build_blokovi(0.0, 1.0, 1.0, 1.0, 0.01).is_err());
        assert!(build_blokovi(1.0, -1.0, 1.0, 1.0, 0.01).is_err());
    }

    #[test]
    fn h_is_cs_with_pm2_spectrum() {
        let rho = complex_product_example().unwrap();
        assert_eq!(rho.rank(1e-10), 6);
        let (h, (lo, hi)) = build_h_perturbation(&rho).unwrap();
        let (ev, _) = linalg::hermitian_eigen(&h);
        assert!((ev[0] + 2.0).abs() < 1e-12 && (ev[15] - 2.0).abs() < 1e-12);
        assert!(lo < 0.0 && hi > 0.0);
        let hs = DensityMatrix::trusted(h.clone(), vec![4, 4]);
        assert!(states::cs_deviation(&hs) < 1e-15);
        assert!((states::partial_transpose(&hs, &[0]).unwrap() - &h).norm() < 1e-15);
        let pure = DensityMatrix::new(states::real_projector(&phi(5)), vec![4, 4]).unwrap();
        assert!(matches!(build_h_perturbation(&pure), Err(Error::Condition(_))));
    }
}
