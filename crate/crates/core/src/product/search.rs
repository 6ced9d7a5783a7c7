//! Real symmetric product vectors x^{⊗d} inside a subspace of the symmetric space.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::forms::Form;
use super::homotopy;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, RMat, RVec};
use crate::tensors;

/// Real unit vector x standing for x^{⊗d}; first nonzero entry positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductVector {
    pub local: Vec<f64>,
    pub power: usize,
}

impl ProductVector {
    pub fn new(x: &RVec, power: usize) -> Self {
        let u = linalg::canonical_sign(&linalg::normalize_real(x), 1e-14);
        ProductVector { local: u.iter().copied().collect(), power }
    }

    pub fn vector(&self) -> RVec {
        RVec::from_column_slice(&self.local)
    }

    pub fn full(&self) -> RVec {
        linalg::tensor_power(&self.vector(), self.power)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchMode {
    /// Enumerate all real product vectors, certifying completeness when possible.
    Exhaustive,
    /// Stop at the first vector found.
    AnyOne,
}

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub mode: SearchMode,
    pub seed: u64,
    pub restarts: usize,
    pub max_paths: usize,
    pub residual_tol: f64,
    pub dedupe_angle: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { mode: SearchMode::Exhaustive, seed: 0x5eed, restarts: 200, max_paths: 4096, residual_tol: 1e-9, dedupe_angle: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchTranscript {
    pub method: String,
    pub constraints: usize,
    pub paths: usize,
    pub bezout: usize,
    pub distinct_nonsingular: usize,
    pub real_candidates: usize,
    pub restarts: usize,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductSearch {
    pub vectors: Vec<ProductVector>,
    /// The list provably contains every real product vector of the subspace.
    pub complete: bool,
    pub transcript: SearchTranscript,
}

/// Constraint forms for membership of x^{⊗d} in span(range), which must lie
/// in the symmetric subspace.
pub fn constraint_forms(range: &RMat, n: usize, d: usize) -> Result<Vec<Form>> {
    let dim = tensors::checked_pow(n, d)?;
    if range.nrows() != dim {
        return Err(Error::Dimension(format!("range vectors have length {}, expected {dim}", range.nrows())));
    }
    let q = linalg::column_space(range, 1e-10);
    for c in 0..q.ncols() {
        let v = q.column(c).into_owned();
        let p = tensors::project_symmetric(&v, n, d)?;
        if (&p - &v).norm() > 1e-8 {
            return Err(Error::Invalid("range is not inside the symmetric subspace".into()));
        }
    }
    let s = tensors::symmetric_basis(n, d)?;
    let coords = s.transpose() * &q;
    let comp = linalg::nullspace(&coords.transpose(), 1e-10);
    let k = &s * comp;
    Ok((0..k.ncols()).map(|c| Form::from_tensor(&k.column(c).into_owned(), n, d)).collect())
}

fn residual(forms: &[Form], x: &RVec) -> f64 {
    let u = linalg::normalize_real(x);
    forms.iter().map(|f| f.eval_grad_real(u.as_slice()).0.powi(2)).sum::<f64>().sqrt()
}

/// Damped Gauss–Newton on [f(x); ‖x‖² − 1]. Returns the final point.
fn gauss_newton(forms: &[Form], x0: &RVec, iters: usize) -> RVec {
    let n = x0.len();
    let mut x = linalg::normalize_real(x0);
    let mut mu = 1e-3;
    let cost = |x: &RVec| {
        let r: f64 = forms.iter().map(|f| f.eval_grad_real(x.as_slice()).0.powi(2)).sum();
        r + (x.norm_squared() - 1.0).powi(2)
    };
    let mut c = cost(&x);
    for _ in 0..iters {
        let m = forms.len() + 1;
        let mut jac = RMat::zeros(m, n);
        let mut r = RVec::zeros(m);
        for (k, f) in forms.iter().enumerate() {
            let (v, g) = f.eval_grad_real(x.as_slice());
            r[k] = v;
            for j in 0..n {
                jac[(k, j)] = g[j];
            }
        }
        r[m - 1] = x.norm_squared() - 1.0;
        for j in 0..n {
            jac[(m - 1, j)] = 2.0 * x[j];
        }
        let jt = jac.transpose();
        let mut accepted = false;
        for _ in 0..12 {
            let a = &jt * &jac + RMat::identity(n, n) * mu;
            let Some(step) = a.lu().solve(&(&jt * &r)) else {
                mu *= 10.0;
                continue;
            };
            let cand = &x - step;
            let cc = cost(&cand);
            if cc < c {
                x = cand;
                c = cc;
                mu = (mu * 0.3).max(1e-15);
                accepted = true;
                break;
            }
            mu *= 10.0;
        }
        if !accepted || c < 1e-30 {
            break;
        }
    }
    linalg::normalize_real(&x)
}

fn insert_unique(found: &mut Vec<RVec>, x: RVec, angle: f64) {
    let x = linalg::canonical_sign(&x, 1e-12);
    if !found.iter().any(|y| linalg::line_angle(y, &x) < angle) {
        found.push(x);
    }
}

fn sorted(mut v: Vec<RVec>) -> Vec<RVec> {
    v.sort_by(|a, b| {
        for (x, y) in a.iter().zip(b.iter()) {
            match y.total_cmp(x) {
                std::cmp::Ordering::Equal => continue,
                o => return o,
            }
        }
        std::cmp::Ordering::Equal
    });
    v
}

fn multistart(forms: &[Form], n: usize, opts: &SearchOptions, stop_at_first: bool) -> (Vec<RVec>, usize) {
    let mut found = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut used = 0;
    for _ in 0..opts.restarts {
        used += 1;
        let x0 = RVec::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let x = gauss_newton(forms, &x0, 200);
        if residual(forms, &x) < opts.residual_tol * 0.1 {
            insert_unique(&mut found, x, opts.dedupe_angle);
            if stop_at_first {
                break;
            }
        }
    }
    (found, used)
}

/// Real product vectors x^{⊗d} with x^{⊗d} ∈ span(range).
///
/// `range` holds spanning vectors of length Nᵈ as columns, all inside the
/// symmetric subspace. With finitely many solutions and d^{N−1} ≤
/// `max_paths`, homotopy continuation certifies completeness; otherwise a
/// multistart search runs and the result is flagged incomplete.
pub fn symmetric_product_vectors(range: &RMat, n: usize, d: usize, opts: &SearchOptions) -> Result<ProductSearch> {
    let forms = constraint_forms(range, n, d)?;
    let m = forms.len();
    let mut transcript = SearchTranscript {
        method: String::new(),
        constraints: m,
        paths: 0,
        bezout: 0,
        distinct_nonsingular: 0,
        real_candidates: 0,
        restarts: 0,
        note: String::new(),
    };
    let finish = |vecs: Vec<RVec>, complete: bool, transcript: SearchTranscript| ProductSearch {
        vectors: sorted(vecs).iter().map(|x| ProductVector::new(x, d)).collect(),
        complete,
        transcript,
    };
    if n == 1 {
        let x = RVec::from_element(1, 1.0);
        transcript.method = "trivial".into();
        let ok = residual(&forms, &x) < opts.residual_tol;
        return Ok(finish(if ok { vec![x] } else { vec![] }, true, transcript));
    }
    if m == 0 {
        transcript.method = "full symmetric space".into();
        transcript.note = "every real x is a solution; one representative returned".into();
        let mut e = RVec::zeros(n);
        e[0] = 1.0;
        return Ok(finish(vec![e], false, transcript));
    }
    let paths = d.checked_pow((n - 1) as u32).unwrap_or(usize::MAX);
    let exact_possible = m + 1 >= n && paths <= opts.max_paths;
    if opts.mode == SearchMode::AnyOne {
        let (found, used) = multistart(&forms, n, &SearchOptions { restarts: opts.restarts.min(60), ..*opts }, true);
        transcript.restarts = used;
        if !found.is_empty() || !exact_possible {
            transcript.method = "multistart".into();
            return Ok(finish(found, false, transcript));
        }
    }
    if !exact_possible {
        let (found, used) = multistart(&forms, n, opts, false);
        transcript.method = "multistart".into();
        transcript.restarts = used;
        transcript.note = if m + 1 < n {
            "fewer constraints than N−1: solution set is positive-dimensional".into()
        } else {
            format!("{paths} homotopy paths exceed the limit")
        };
        return Ok(finish(found, false, transcript));
    }
    let square: Vec<Form> = if m + 1 == n {
        forms.clone()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(17));
        (0..n - 1)
            .map(|_| {
                let coeffs: Vec<Complex64> = (0..m).map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
                Form::combine(&forms, &coeffs)
            })
            .collect()
    };
    let res = homotopy::solve_square(&square, opts.seed);
    transcript.method = "homotopy".into();
    transcript.paths = res.endpoints.len();
    transcript.bezout = res.bezout;
    transcript.distinct_nonsingular = res.distinct_nonsingular;
    let mut found = Vec::new();
    for e in &res.endpoints {
        let (imax, _) = e.z.iter().enumerate().fold((0, 0.0), |acc, (i, c)| if c.norm() > acc.1 { (i, c.norm()) } else { acc });
        let piv = e.z[imax];
        let w: Vec<Complex64> = e.z.iter().map(|c| c / piv).collect();
        if w.iter().any(|c| c.im.abs() > 1e-6) {
            continue;
        }
        transcript.real_candidates += 1;
        let x0 = RVec::from_iterator(n, w.iter().map(|c| c.re));
        let x = gauss_newton(&forms, &x0, 50);
        if residual(&forms, &x) < opts.residual_tol {
            insert_unique(&mut found, x, opts.dedupe_angle);
        }
    }
    if !res.complete {
        transcript.note = "some endpoints singular or lost; falling back to multistart".into();
        let (extra, used) = multistart(&forms, n, opts, false);
        transcript.restarts = used;
        for x in extra {
            insert_unique(&mut found, x, opts.dedupe_angle);
        }
    }
    Ok(finish(found, res.complete, transcript))
}

/// ‖(1 − P_range) x^{⊗d}‖ for unit x, with an orthonormal real range basis.
pub fn range_residual(range_basis: &RMat, x: &RVec, d: usize) -> f64 {
    let v = linalg::tensor_power(&linalg::normalize_real(x), d);
    (&v - range_basis * (range_basis.transpose() * &v)).norm()
}

/// Some subspace of the symmetric space of Cᴺ⊗Cᴺ of dimension n is
/// guaranteed to contain a complex product vector iff n ≥ N(N−1)/2 + 1.
pub fn segre_guarantee(n: usize, local: usize) -> Result<bool> {
    if n > local * (local + 1) / 2 {
        return Err(Error::Invalid(format!("dimension {n} exceeds the symmetric space of {local}⊗{local}")));
    }
    Ok(n > local * (local - 1) / 2)
}

/// Real product vector x⊗y ∈ R²⊗R^M orthogonal to the given kernel vectors
/// (columns of length 2M). Solvable whenever the kernel dimension is below M.
pub fn qubit_product_step(kernel: &CMat, m: usize) -> Result<(RVec, RVec)> {
    if kernel.nrows() != 2 * m {
        return Err(Error::Dimension(format!("kernel vectors must have length {}", 2 * m)));
    }
    let r = kernel.ncols();
    if r >= m {
        return Err(Error::Numeric(format!("kernel dimension {r} ≥ {m}: no guaranteed product vector")));
    }
    // rows of F0 are the |0⟩ components of the kernel vectors; x = (1, 0) leaves F0 y = 0
    let mut rows = RMat::zeros(2 * r, m);
    for c in 0..r {
        for j in 0..m {
            let z = kernel[(j, c)].conj();
            rows[(2 * c, j)] = z.re;
            rows[(2 * c + 1, j)] = z.im;
        }
    }
    let x = RVec::from_vec(vec![1.0, 0.0]);
    let y = if r == 0 {
        let mut e = RVec::zeros(m);
        e[0] = 1.0;
        e
    } else {
        let ns = linalg::nullspace(&rows, 1e-10);
        if ns.ncols() == 0 {
            return Err(Error::Numeric("no real vector annihilates the kernel".into()));
        }
        linalg::canonical_sign(&ns.column(0).into_owned(), 1e-12)
    };
    let v = linalg::complexify_vec(&x.kronecker(&y));
    let res = (kernel.adjoint() * v).norm();
    if res > 1e-10 {
        return Err(Error::Numeric(format!("product vector residual {res:.3e}")));
    }
    Ok((x, y))
}

pub(crate) fn unit_vector(n: usize, i: usize) -> RVec {
    let mut e = DVector::zeros(n);
    e[i] = 1.0;
    e
}
