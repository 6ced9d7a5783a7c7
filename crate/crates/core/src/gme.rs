//! Geometric measure of entanglement of nonnegative symmetric states, where
//! the closest product state can be taken as a^{⊗d} with a ≥ 0.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, RMat, RVec};
use crate::named::{phi, sigma_locals};
use crate::random;
use crate::states::DensityMatrix;
use crate::tensors::digits;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GmeResult {
    pub mu: f64,
    pub a: Vec<f64>,
    pub gme: f64,
    pub iterations: usize,
    pub kkt_residual: f64,
    pub converged: bool,
    /// Objective never decreased by more than 1e−12 along the winning run.
    pub monotone: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct GmeOptions {
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
    pub starts: usize,
}

impl Default for GmeOptions {
    fn default() -> Self {
        GmeOptions { seed: 7, max_iter: 20_000, tol: 1e-13, starts: 10 }
    }
}

/// Largest change of ρ under swapping two adjacent parties.
pub fn permutation_deviation(m: &RMat, n: usize, d: usize) -> f64 {
    let dim = m.nrows();
    let mut worst: f64 = 0.0;
    for k in 0..d.saturating_sub(1) {
        let swap = |i: usize| -> usize {
            let mut dg = digits(i, n, d);
            dg.swap(k, k + 1);
            dg.iter().fold(0, |acc, &x| acc * n + x)
        };
        let perm: Vec<usize> = (0..dim).map(swap).collect();
        for r in 0..dim {
            for c in 0..dim {
                worst = worst.max((m[(r, c)] - m[(perm[r], perm[c])]).abs());
            }
        }
    }
    worst
}

fn nonnegative_symmetric(rho: &DensityMatrix) -> Result<(RMat, usize, usize)> {
    let n = rho.local_dim().ok_or_else(|| Error::Dimension("parties have different local dimensions".into()))?;
    let d = rho.parties();
    if linalg::max_imag(rho.matrix()) > 1e-12 {
        return Err(Error::Invalid("state is not real".into()));
    }
    let mut m = rho.normalized().real_matrix();
    let low = m.min();
    if low < -1e-12 {
        return Err(Error::Invalid(format!("state has a negative entry {low:.3e}")));
    }
    m.apply(|x| *x = x.max(0.0));
    let dev = permutation_deviation(&m, n, d);
    if dev > 1e-10 {
        return Err(Error::Invalid(format!("state is not symmetric under party exchange (deviation {dev:.3e})")));
    }
    Ok((m, n, d))
}

/// ⟨a^{⊗(d−1)}| ρ |a^{⊗d}⟩ as a vector in the remaining factor.
pub fn contraction(m: &RMat, a: &RVec, d: usize) -> RVec {
    let n = a.len();
    let w = m * linalg::tensor_power(a, d);
    let head = if d > 1 { linalg::tensor_power(a, d - 1) } else { RVec::from_element(1, 1.0) };
    RVec::from_fn(n, |j, _| head.iter().enumerate().map(|(i, &h)| h * w[i * n + j]).sum())
}

fn objective(m: &RMat, a: &RVec, d: usize) -> f64 {
    let v = linalg::tensor_power(a, d);
    v.dot(&(m * &v))
}

struct Run {
    a: RVec,
    mu: f64,
    iterations: usize,
    converged: bool,
    monotone: bool,
}

fn ascend(m: &RMat, d: usize, start: RVec, opts: &GmeOptions, shift: f64) -> Run {
    let mut a = linalg::normalize_real(&start);
    let mut f = objective(m, &a, d);
    let mut monotone = true;
    for it in 1..=opts.max_iter {
        let g = contraction(m, &a, d);
        let mut next = if g.norm() > 0.0 { g.normalize() } else { a.clone() };
        let mut fn_ = objective(m, &next, d);
        if fn_ < f - 1e-15 {
            next = (&g + &a * shift).normalize();
            fn_ = objective(m, &next, d);
        }
        if fn_ < f - 1e-12 {
            monotone = false;
        }
        let step = (&next - &a).norm();
        a = next;
        f = fn_;
        if step < opts.tol {
            return Run { a, mu: f, iterations: it, converged: true, monotone };
        }
    }
    Run { a, mu: f, iterations: opts.max_iter, converged: false, monotone }
}

/// Multistart power iteration (uniform start, perturbed basis vectors and
/// `opts.starts` random nonnegative starts) for max_{a ≥ 0, ‖a‖=1} ⟨a^{⊗d}|ρ|a^{⊗d}⟩ on
/// the trace-normalized state.
pub fn gme_power_iteration(rho: &DensityMatrix, opts: &GmeOptions) -> Result<GmeResult> {
    let (m, n, d) = nonnegative_symmetric(rho)?;
    let lmax = linalg::symmetric_eigen(&m).0.last().copied().unwrap_or(0.0);
    let shift = (2 * d - 1) as f64 * lmax;
    let mut rng = random::rng(opts.seed);
    let mut starts = vec![RVec::from_element(n, 1.0)];
    for i in 0..n {
        let mut e = RVec::from_element(n, 0.05);
        e[i] = 1.0;
        starts.push(e);
    }
    while starts.len() < n + 1 + opts.starts {
        let g = random::gaussian_vector(n, &mut rng).map(|x| x.abs() + 1e-3 * rng.random::<f64>());
        starts.push(g);
    }
    let best = starts
        .into_iter()
        .map(|s| ascend(&m, d, s, opts, shift))
        .max_by(|x, y| x.mu.total_cmp(&y.mu))
        .expect("at least one start");
    let kkt = (contraction(&m, &best.a, d) - &best.a * best.mu).norm();
    if !(best.mu > 0.0) {
        return Err(Error::Numeric("objective vanished".into()));
    }
    Ok(GmeResult {
        mu: best.mu,
        a: best.a.iter().copied().collect(),
        gme: -best.mu.log2(),
        iterations: best.iterations,
        kkt_residual: kkt,
        converged: best.converged,
        monotone: best.monotone,
    })
}

/// Stationarity ⟨a^{⊗(d−1)}|ρ|a^{⊗d}⟩ = μa with a ≥ 0, on the trace-normalized state.
pub fn verify_kkt(rho: &DensityMatrix, a: &[f64], mu: f64, tol: f64) -> bool {
    let Ok((m, n, d)) = nonnegative_symmetric(rho) else {
        return false;
    };
    if a.len() != n || a.iter().any(|&x| x < -1e-15) {
        return false;
    }
    let a = RVec::from_column_slice(a);
    if (a.norm() - 1.0).abs() > 1e-12 {
        return false;
    }
    (contraction(&m, &a, d) - &a * mu).norm() < tol
}

/// Two copies regrouped so that party k of the result is (k of copy one, k of copy two).
pub fn two_copy(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let n = rho.local_dim().ok_or_else(|| Error::Dimension("parties have different local dimensions".into()))?;
    let d = rho.parties();
    let dim = rho.dim();
    let big = dim * dim;
    if big > crate::DENSE_LIMIT {
        return Err(Error::TooLarge(big));
    }
    let split = |idx: usize| -> (usize, usize) {
        let dg = digits(idx, n * n, d);
        let (mut a, mut b) = (0, 0);
        for x in dg {
            a = a * n + x / n;
            b = b * n + x % n;
        }
        (a, b)
    };
    let m = rho.matrix();
    let out = crate::linalg::CMat::from_fn(big, big, |r, c| {
        let (r1, r2) = split(r);
        let (c1, c2) = split(c);
        m[(r1, c1)] * m[(r2, c2)]
    });
    Ok(DensityMatrix::trusted(out, vec![n * n; d]))
}

/// Coefficients (λ₀,…,λ₇) of ρ = Σ_{i<7} λᵢ|φᵢ⟩⟨φᵢ| − λ₇|φ₇⟩⟨φ₇| on 4⊗4
/// (unnormalized φᵢ = xᵢ⊗xᵢ), for which a = (1,1,1,1)/2 is stationary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonnegativeRecord {
    pub lambdas: [f64; 8],
}

const C7: f64 = 11000.0 / 81.0;

impl NonnegativeRecord {
    /// Fills λ₀, λ₁, λ₂, λ₆ from the free coefficients.
    pub fn from_free(l3: f64, l4: f64, l5: f64, l7: f64) -> Self {
        NonnegativeRecord {
            lambdas: [l3 + 3040.0 * l5 - C7 * l7, l3 + 2016.0 * l5, l3 + 1056.0 * l5 - C7 * l7, l3, l4, l5, l5, l7],
        }
    }

    /// The record whose λ₇ is maximal, so the state has rank 6.
    pub fn rank_six(l3: f64, l4: f64, l5: f64) -> Result<Self> {
        let p7 = phi(7);
        let gap = |l7: f64| -> Result<f64> {
            let rec = NonnegativeRecord::from_free(l3, l4, l5, l7);
            let sigma = rec.sigma_part();
            let pinv = linalg::real_part(&linalg::psd_pinv(&linalg::complexify(&sigma), 1e-12));
            let val = p7.dot(&(&pinv * &p7));
            if !(val > 0.0) {
                return Err(Error::Numeric("φ₇ not in the range".into()));
            }
            Ok(l7 - 1.0 / val)
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut guard = 0;
        while gap(hi)? < 0.0 {
            hi *= 2.0;
            guard += 1;
            if guard > 60 {
                return Err(Error::Numeric("no rank-dropping λ₇".into()));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if gap(mid)? < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(NonnegativeRecord::from_free(l3, l4, l5, lo))
    }

    /// Checks the stationarity conditions, naming the first violated one.
    pub fn check(&self, tol: f64) -> Result<()> {
        let l = &self.lambdas;
        let conds = [
            ("λ0 = λ3 + 3040λ5 − (11000/81)λ7", l[0] - (l[3] + 3040.0 * l[5] - C7 * l[7])),
            ("λ1 = λ3 + 2016λ5", l[1] - (l[3] + 2016.0 * l[5])),
            ("λ2 = λ3 + 1056λ5 − (11000/81)λ7", l[2] - (l[3] + 1056.0 * l[5] - C7 * l[7])),
            ("λ6 = λ5", l[6] - l[5]),
        ];
        let scale = l.iter().fold(1.0f64, |a, &x| a.max(x.abs()));
        for (name, v) in conds {
            if v.abs() > tol * scale {
                return Err(Error::Condition(format!("{name} violated by {v:.3e}")));
            }
        }
        if l.iter().all(|&x| x == 0.0) {
            return Err(Error::ZeroTrace);
        }
        Ok(())
    }

    fn sigma_part(&self) -> RMat {
        let mut m = RMat::zeros(16, 16);
        for i in 0..7 {
            let p = phi(i);
            m += &p * p.transpose() * self.lambdas[i];
        }
        m
    }

    pub fn matrix(&self) -> RMat {
        let p = phi(7);
        self.sigma_part() - &p * p.transpose() * self.lambdas[7]
    }

    pub fn trace(&self) -> f64 {
        self.matrix().trace()
    }

    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace();
        if !(t > 0.0) {
            return Err(Error::ZeroTrace);
        }
        Ok(NonnegativeRecord { lambdas: self.lambdas.map(|x| x / t) })
    }

    /// The state, after checking it is PSD and entrywise nonnegative.
    pub fn state(&self) -> Result<DensityMatrix> {
        self.check(1e-12)?;
        let m = self.matrix();
        let low = m.min();
        if low < -1e-12 {
            return Err(Error::Invalid(format!("negative entry {low:.3e}")));
        }
        DensityMatrix::from_real(&m, vec![4, 4])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ClosedForm {
    /// λ₀/4 + 16λ₄ + 248λ₅ + (250/27)λ₇ on the record as given.
    pub mu_raw: f64,
    /// The same on the trace-normalized record.
    pub mu: f64,
    pub gme: f64,
}

/// Objective value at the stationary point a = (1,1,1,1)/2. It is the
/// maximum only when that point is global, which holds for large λ₄ (for
/// λ₃ = λ₅ = 1 roughly λ₄ ≥ 200) but fails e.g. at λ₃ = λ₄ = λ₅ = 1.
pub fn gme_closed_form(rec: &NonnegativeRecord) -> Result<ClosedForm> {
    rec.check(1e-12)?;
    let f = |l: &[f64; 8]| l[0] / 4.0 + 16.0 * l[4] + 248.0 * l[5] + 250.0 / 27.0 * l[7];
    let mu_raw = f(&rec.lambdas);
    let mu = f(&rec.normalized()?.lambdas);
    Ok(ClosedForm { mu_raw, mu, gme: -mu.log2() })
}

pub const CONDITIONED_FREE: (f64, f64, f64) = (1.0, 200.0, 1.0);

/// Nonnegative rank-6 entangled 4⊗4 state with (λ₃, λ₄, λ₅) = (1, 200, 1),
/// where the uniform vector is the global maximizer.
pub fn conditioned_state() -> Result<(NonnegativeRecord, DensityMatrix)> {
    let (l3, l4, l5) = CONDITIONED_FREE;
    let rec = NonnegativeRecord::rank_six(l3, l4, l5)?;
    let st = rec.state()?.normalized();
    Ok((rec, st))
}

/// The 4⊗4 vectors x₀…x₇ used by the record.
pub fn record_locals() -> [RVec; 8] {
    sigma_locals()
}
