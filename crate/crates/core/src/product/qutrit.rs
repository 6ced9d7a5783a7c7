//! Real symmetric product vector in a two-qutrit CS range of dimension ≥ 5,
//! by elimination on the 2×2 sub-blocks of the symmetric space.

use crate::error::{Error, Result};
use crate::linalg::{self, RMat, RVec};

/// Real roots of a·x² + b·x + c = 0, including the degenerate linear case.
pub fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs()).max(f64::MIN_POSITIVE);
    if a.abs() <= 1e-14 * scale {
        if b.abs() <= 1e-14 * scale {
            return vec![];
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < -1e-14 * scale * scale {
        return vec![];
    }
    let sq = disc.max(0.0).sqrt();
    // numerically stable pair
    let q = -0.5 * (b + b.signum() * sq);
    let mut roots = if q == 0.0 { vec![0.0] } else { vec![q / a, c / q] };
    roots.sort_by(|x, y| x.total_cmp(y));
    roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * x.abs().max(1.0));
    roots
}

/// Roots of the pair determinant written as `leading·x² + linear·x − 1`.
pub fn pair_roots(leading: f64, linear: f64) -> Vec<f64> {
    quadratic_roots(leading, linear, -1.0)
}

fn sym(n: usize, i: usize, j: usize) -> RVec {
    let mut v = RVec::zeros(n * n);
    v[i * n + j] += 1.0;
    if i != j {
        v[j * n + i] += 1.0;
    }
    v
}

/// Real 2×2 symmetric matrix M (rank ≤ 1) → vector v with M = ±v vᵀ.
fn rank_one_factor(m: [[f64; 2]; 2]) -> Option<[f64; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = m.iter().flatten().map(|x| x.abs()).fold(0.0, f64::max);
    if scale == 0.0 || det.abs() > 1e-9 * scale * scale {
        return None;
    }
    if m[0][0].abs() >= m[1][1].abs() {
        Some([m[0][0], m[0][1]])
    } else {
        Some([m[1][0], m[1][1]])
    }
}

/// Searches the blocks {0,1}, {0,2}, {1,2} for a real x⊗x in the range,
/// then falls back to the signature of the single kernel quadric.
pub fn two_qutrit_product_step(range: &RMat) -> Result<RVec> {
    if range.nrows() != 9 {
        return Err(Error::Dimension("two-qutrit range vectors have length 9".into()));
    }
    let q = linalg::column_space(range, 1e-10);
    let r = q.ncols();
    if r < 5 {
        return Err(Error::Invalid(format!("range dimension {r} < 5; use the low-rank route")));
    }
    let proj_out = RMat::identity(9, 9) - &q * q.transpose();
    let check = |x: &RVec| super::search::range_residual(&q, x, 2) < 1e-9;
    for (a, b) in [(0usize, 1usize), (0, 2), (1, 2)] {
        let gens = [sym(3, a, a), sym(3, b, b), sym(3, a, b)];
        let g = RMat::from_columns(&gens);
        let w = linalg::nullspace(&(&proj_out * &g), 1e-9);
        let embed = |v: [f64; 2]| {
            let mut x = RVec::zeros(3);
            x[a] = v[0];
            x[b] = v[1];
            linalg::normalize_real(&x)
        };
        let as_matrix = |c: &RVec| [[c[0], c[2]], [c[2], c[1]]];
        let mut candidates: Vec<RVec> = Vec::new();
        match w.ncols() {
            0 => {}
            1 => {
                if let Some(v) = rank_one_factor(as_matrix(&w.column(0).into_owned())) {
                    candidates.push(embed(v));
                }
            }
            2 => {
                let ma = as_matrix(&w.column(0).into_owned());
                let mb = as_matrix(&w.column(1).into_owned());
                let det = |m: [[f64; 2]; 2]| m[0][0] * m[1][1] - m[0][1] * m[1][0];
                let lead = det(ma);
                let lin = ma[0][0] * mb[1][1] + ma[1][1] * mb[0][0] - 2.0 * ma[0][1] * mb[0][1];
                let cst = det(mb);
                if let Some(v) = rank_one_factor(ma) {
                    candidates.push(embed(v));
                }
                for x in quadratic_roots(lead, lin, cst) {
                    let m = [[x * ma[0][0] + mb[0][0], x * ma[0][1] + mb[0][1]], [x * ma[1][0] + mb[1][0], x * ma[1][1] + mb[1][1]]];
                    if let Some(v) = rank_one_factor(m) {
                        candidates.push(embed(v));
                    }
                }
            }
            _ => candidates.push(embed([1.0, 0.0])),
        }
        if let Some(x) = candidates.into_iter().find(|x| check(x)) {
            return Ok(linalg::canonical_sign(&x, 1e-12));
        }
    }
    if r == 6 {
        return Ok(super::search::unit_vector(3, 0));
    }
    // r = 5: a single quadric xᵀKx = 0
    let forms = super::search::constraint_forms(&q, 3, 2)?;
    let f = &forms[0];
    let mut k = RMat::zeros(3, 3);
    for (e, c) in f.terms() {
        let idx: Vec<usize> = (0..3).flat_map(|j| std::iter::repeat_n(j, e[j] as usize)).collect();
        if idx[0] == idx[1] {
            k[(idx[0], idx[0])] = c.re;
        } else {
            k[(idx[0], idx[1])] = c.re / 2.0;
            k[(idx[1], idx[0])] = c.re / 2.0;
        }
    }
    let (vals, vecs) = linalg::symmetric_eigen(&k);
    let scale = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let x = if vals[0].abs() <= 1e-12 * scale {
        vecs.column(0).into_owned()
    } else if vals[2].abs() <= 1e-12 * scale {
        vecs.column(2).into_owned()
    } else if vals[0] < 0.0 && vals[2] > 0.0 {
        vecs.column(2) * (-vals[0]).sqrt() + vecs.column(0) * vals[2].sqrt()
    } else {
        return Err(Error::Numeric("kernel quadric is definite: no real product vector".into()));
    };
    let x = linalg::canonical_sign(&linalg::normalize_real(&x), 1e-12);
    if !check(&x) {
        return Err(Error::Numeric("quadric solution failed the range check".into()));
    }
    Ok(x)
}
