//! Real product vectors x⊗y in a subspace of R^{dA}⊗R^{dB} without symmetry,
//! by alternating least squares from random starts and Gauss–Newton polishing.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::linalg::{self, RMat, RVec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BipartiteProduct {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BipartiteSearch {
    pub found: Vec<BipartiteProduct>,
    /// Smallest residual ‖P_ker (x⊗y)‖ reached over all restarts.
    pub best_residual: f64,
    pub restarts: usize,
}

fn smallest_right_singular(a: &RMat) -> RVec {
    let n = a.ncols();
    let padded = if a.nrows() < n {
        let mut p = RMat::zeros(n, n);
        p.view_mut((0, 0), a.shape()).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("v_t");
    let (imin, _) = svd.singular_values.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    vt.row(imin).transpose()
}

fn residual(kernel: &RMat, x: &RVec, y: &RVec) -> f64 {
    let v = linalg::normalize_real(&x.kronecker(y));
    (kernel.transpose() * v).norm()
}

/// Real x⊗y ∈ span(range) for a range of R^{da}⊗R^{db} given as columns.
pub fn bipartite_product_vectors(range: &RMat, da: usize, db: usize, seed: u64, restarts: usize) -> BipartiteSearch {
    let q = linalg::column_space(range, 1e-10);
    let kernel = linalg::nullspace(&q.transpose(), 1e-10);
    let m = kernel.ncols();
    // constraint matrices K_i (da × db)
    let ks: Vec<RMat> = (0..m).map(|c| RMat::from_fn(da, db, |i, j| kernel[(i * db + j, c)])).collect();
    let a_of = |x: &RVec| RMat::from_fn(m, db, |i, j| (0..da).map(|k| x[k] * ks[i][(k, j)]).sum());
    let b_of = |y: &RVec| RMat::from_fn(m, da, |i, k| (0..db).map(|j| ks[i][(k, j)] * y[j]).sum());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found: Vec<BipartiteProduct> = Vec::new();
    let mut best = f64::INFINITY;
    for _ in 0..restarts {
        let mut x = linalg::normalize_real(&RVec::from_fn(da, |_, _| StandardNormal.sample(&mut rng)));
        let mut y = smallest_right_singular(&a_of(&x));
        for _ in 0..300 {
            let x_new = smallest_right_singular(&b_of(&y));
            let y_new = smallest_right_singular(&a_of(&x_new));
            let moved = linalg::line_angle(&x_new, &x) + linalg::line_angle(&y_new, &y);
            x = x_new;
            y = y_new;
            if moved < 1e-13 {
                break;
            }
        }
        let (x, y) = polish(&ks, x, y);
        let r = residual(&kernel, &x, &y);
        best = best.min(r);
        if r < 1e-10 {
            let x = linalg::canonical_sign(&x, 1e-12);
            let y = linalg::canonical_sign(&y, 1e-12);
            let dup = found.iter().any(|p| linalg::line_angle(&RVec::from_column_slice(&p.x).kronecker(&RVec::from_column_slice(&p.y)), &x.kronecker(&y)) < 1e-6);
            if !dup {
                found.push(BipartiteProduct { x: x.iter().copied().collect(), y: y.iter().copied().collect(), residual: r });
            }
        }
    }
    BipartiteSearch { found, best_residual: best, restarts }
}

fn polish(ks: &[RMat], mut x: RVec, mut y: RVec) -> (RVec, RVec) {
    let (da, db) = (x.len(), y.len());
    for _ in 0..20 {
        let m = ks.len();
        let mut jac = RMat::zeros(m + 2, da + db);
        let mut r = RVec::zeros(m + 2);
        for (i, k) in ks.iter().enumerate() {
            let ky = k * &y;
            let kx = k.transpose() * &x;
            r[i] = x.dot(&ky);
            for a in 0..da {
                jac[(i, a)] = ky[a];
            }
            for b in 0..db {
                jac[(i, da + b)] = kx[b];
            }
        }
        r[m] = x.norm_squared() - 1.0;
        r[m + 1] = y.norm_squared() - 1.0;
        for a in 0..da {
            jac[(m, a)] = 2.0 * x[a];
        }
        for b in 0..db {
            jac[(m + 1, da + b)] = 2.0 * y[b];
        }
        let Ok(step) = jac.clone().svd(true, true).solve(&r, 1e-12) else {
            break;
        };
        if step.norm() > 0.1 {
            break;
        }
        x -= step.rows(0, da);
        y -= step.rows(da, db);
        if step.norm() < 1e-16 {
            break;
        }
    }
    (linalg::normalize_real(&x), linalg::normalize_real(&y))
}
