//! Takagi factorization M = U D Uᵀ of complex symmetric matrices and the
//! symmetric decomposition of pure bipartite symmetric vectors.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, RMat, RVec};

#[derive(Debug, Clone)]
pub struct Takagi {
    /// Unitary with M = U D Uᵀ.
    pub u: CMat,
    /// Takagi values, descending.
    pub d: Vec<f64>,
    /// Real input only: orthogonal O and signs with M = O diag(signs·d) Oᵀ.
    pub real: Option<(RMat, Vec<f64>)>,
}

impl Takagi {
    pub fn reconstruct(&self) -> CMat {
        let dm = CMat::from_diagonal(&CVec::from_iterator(self.d.len(), self.d.iter().map(|&x| Complex64::new(x, 0.0))));
        &self.u * dm * self.u.transpose()
    }
}

pub fn takagi(m: &CMat) -> Result<Takagi> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::Dimension("Takagi input must be square".into()));
    }
    let scale = linalg::max_abs(m).max(1.0);
    if linalg::max_abs(&(m - m.transpose())) > 1e-10 * scale {
        return Err(Error::Invalid("matrix is not symmetric".into()));
    }
    if linalg::max_imag(m) == 0.0 {
        return Ok(real_takagi(&linalg::real_part(m)));
    }
    Ok(complex_takagi(m))
}

fn real_takagi(a: &RMat) -> Takagi {
    let n = a.nrows();
    let (vals, vecs) = linalg::symmetric_eigen(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[j].abs().total_cmp(&vals[i].abs()).then(vals[j].total_cmp(&vals[i])));
    let mut o = RMat::zeros(n, n);
    let mut d = Vec::with_capacity(n);
    let mut signs = Vec::with_capacity(n);
    for (c, &k) in order.iter().enumerate() {
        let col = linalg::canonical_sign(&vecs.column(k).into_owned(), 1e-12);
        o.set_column(c, &col);
        d.push(vals[k].abs());
        signs.push(if vals[k] < 0.0 { -1.0 } else { 1.0 });
    }
    let u = CMat::from_fn(n, n, |r, c| {
        if signs[c] < 0.0 {
            Complex64::new(0.0, o[(r, c)])
        } else {
            Complex64::new(o[(r, c)], 0.0)
        }
    });
    Takagi { u, d, real: Some((o, signs)) }
}

fn complex_takagi(m: &CMat) -> Takagi {
    let n = m.nrows();
    let a = linalg::real_part(m);
    let b = m.map(|z| z.im);
    let mut h = RMat::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(&a);
    h.view_mut((0, n), (n, n)).copy_from(&b);
    h.view_mut((n, 0), (n, n)).copy_from(&b);
    h.view_mut((n, n), (n, n)).copy_from(&(-&a));
    // eigenpairs come as ±σ; a +σ eigenvector [x; y] gives M conj(u) = σ u for u = x + iy
    let (vals, vecs) = linalg::symmetric_eigen(&h);
    let smax = vals.last().copied().unwrap_or(0.0).abs().max(f64::MIN_POSITIVE);
    let mut cols: Vec<CVec> = Vec::new();
    let mut d = Vec::new();
    for k in (0..2 * n).rev() {
        if cols.len() == n || vals[k] <= 1e-12 * smax {
            break;
        }
        cols.push(CVec::from_fn(n, |r, _| Complex64::new(vecs[(r, k)], vecs[(n + r, k)])));
        d.push(vals[k].max(0.0));
    }
    // zero Takagi values: pick unitary completions from the null space
    let mut k = 0;
    while cols.len() < n && k < 2 * n {
        let cand = CVec::from_fn(n, |r, _| Complex64::new(vecs[(r, k)], vecs[(n + r, k)]));
        let mut v = cand;
        for c in &cols {
            let p = c.dotc(&v);
            v -= c * p;
        }
        let nv = v.norm();
        if nv > 1e-6 {
            cols.push(v / Complex64::new(nv, 0.0));
            d.push(0.0);
        }
        k += 1;
    }
    let mut u = CMat::zeros(n, n);
    for (c, v) in cols.iter().enumerate() {
        u.set_column(c, v);
    }
    Takagi { u, d, real: None }
}

/// One term s·a⊗a of a symmetric decomposition; `sign` is ±1.
#[derive(Debug, Clone)]
pub struct SignedFactor {
    pub sign: f64,
    pub factor: CVec,
}

/// Writes a vector of the symmetric subspace of Cᴺ⊗Cᴺ as Σ sᵢ aᵢ⊗aᵢ with
/// pairwise orthogonal aᵢ. Real input yields real factors with signs.
pub fn symmetric_decompose_pure(psi: &CVec, n: usize) -> Result<Vec<SignedFactor>> {
    if psi.len() != n * n {
        return Err(Error::Dimension(format!("vector of length {} is not in {n}⊗{n}", psi.len())));
    }
    let m = CMat::from_fn(n, n, |r, c| psi[r * n + c]);
    let scale = psi.norm().max(f64::MIN_POSITIVE);
    if (&m - m.transpose()).norm() > 1e-10 * scale {
        return Err(Error::Invalid("vector is not symmetric".into()));
    }
    let t = takagi(&m)?;
    let mut out = Vec::new();
    match &t.real {
        Some((o, signs)) => {
            for c in 0..n {
                if t.d[c] > 1e-14 * scale {
                    let a: RVec = o.column(c) * t.d[c].sqrt();
                    out.push(SignedFactor { sign: signs[c], factor: linalg::complexify_vec(&a) });
                }
            }
        }
        None => {
            for c in 0..n {
                if t.d[c] > 1e-14 * scale {
                    out.push(SignedFactor { sign: 1.0, factor: t.u.column(c) * Complex64::new(t.d[c].sqrt(), 0.0) });
                }
            }
        }
    }
    Ok(out)
}
