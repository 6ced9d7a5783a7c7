//! Density matrices on (Cᴺ)^{⊗d}, subspaces, and the basic state operations.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, RMat};
use crate::tensors::{self, digits};
use crate::DENSE_LIMIT;

/// Numerical tolerances shared by the whole pipeline. `rank` and `psd` are
/// relative to the largest eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rank: f64,
    pub psd: f64,
    pub hermitian: f64,
    pub cs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rank: 1e-10, psd: 1e-10, hermitian: 1e-12, cs: 1e-10 }
    }
}

/// Hermitian PSD operator with positive trace on a tensor product space.
/// The trace is not forced to one; see [`DensityMatrix::normalized`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMat,
    dims: Vec<usize>,
}

fn total_dim(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::Invalid("party dimensions must be positive".into()));
    }
    let mut acc: usize = 1;
    for &n in dims {
        acc = acc.saturating_mul(n);
        if acc > DENSE_LIMIT {
            return Err(Error::TooLarge(acc));
        }
    }
    Ok(acc)
}

impl DensityMatrix {
    pub fn new(mat: CMat, dims: Vec<usize>) -> Result<Self> {
        Self::with_tolerances(mat, dims, &Tolerances::default())
    }

    pub fn with_tolerances(mat: CMat, dims: Vec<usize>, tol: &Tolerances) -> Result<Self> {
        let dim = total_dim(&dims)?;
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::Dimension(format!("expected {dim}x{dim}, got {}x{}", mat.nrows(), mat.ncols())));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invalid("non-finite matrix entry".into()));
        }
        let scale = linalg::max_abs(&mat).max(1.0);
        let dev = linalg::max_abs(&(&mat - mat.adjoint()));
        if dev > tol.hermitian * scale {
            return Err(Error::NotHermitian(dev));
        }
        let mat = linalg::hermitize(&mat);
        let tr = mat.trace().re;
        if tr.abs() <= f64::EPSILON * scale {
            return Err(Error::ZeroTrace);
        }
        let (vals, _) = linalg::hermitian_eigen(&mat);
        let lmax = vals.last().copied().unwrap_or(0.0);
        let lmin = vals.first().copied().unwrap_or(0.0);
        if lmin < -tol.psd * lmax.abs().max(f64::MIN_POSITIVE) || lmax <= 0.0 {
            return Err(Error::NotPsd(lmin));
        }
        Ok(DensityMatrix { mat, dims })
    }

    /// State on d copies of Cⁿ.
    pub fn symmetric(mat: CMat, n: usize, d: usize) -> Result<Self> {
        Self::new(mat, vec![n; d])
    }

    pub fn from_real(mat: &RMat, dims: Vec<usize>) -> Result<Self> {
        Self::new(linalg::complexify(mat), dims)
    }

    /// Skips validation; callers guarantee Hermitian PSD input up to rounding.
    pub(crate) fn trusted(mat: CMat, dims: Vec<usize>) -> Self {
        DensityMatrix { mat: linalg::hermitize(&mat), dims }
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn parties(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Common local dimension when all parties agree.
    pub fn local_dim(&self) -> Option<usize> {
        let n = self.dims[0];
        self.dims.iter().all(|&m| m == n).then_some(n)
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn is_trace_one(&self) -> bool {
        (self.trace() - 1.0).abs() < 1e-10
    }

    pub fn normalized(&self) -> Self {
        let t = self.trace();
        DensityMatrix { mat: &self.mat / Complex64::new(t, 0.0), dims: self.dims.clone() }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        DensityMatrix { mat: &self.mat * Complex64::new(factor, 0.0), dims: self.dims.clone() }
    }

    pub fn is_real(&self, tol: f64) -> bool {
        linalg::max_imag(&self.mat) <= tol * linalg::max_abs(&self.mat).max(f64::MIN_POSITIVE)
    }

    pub fn real_matrix(&self) -> RMat {
        linalg::real_part(&self.mat)
    }

    /// Eigenvalues ascending with eigenvectors as columns.
    pub fn eigen(&self) -> (Vec<f64>, CMat) {
        linalg::hermitian_eigen(&self.mat)
    }

    pub fn rank(&self, tol: f64) -> usize {
        let (vals, _) = self.eigen();
        let lmax = vals.last().copied().unwrap_or(0.0);
        vals.iter().filter(|&&l| l > tol * lmax).count()
    }

    /// Expectation value ⟨v|ρ|v⟩.
    pub fn expectation(&self, v: &CVec) -> f64 {
        (v.adjoint() * &self.mat * v)[(0, 0)].re
    }

    pub fn max_entry_distance(&self, other: &CMat) -> f64 {
        linalg::max_abs(&(&self.mat - other))
    }

    /// Same operator viewed as bipartite across the cut after the first `k` parties.
    pub fn bipartition_view(&self, k: usize) -> Result<DensityMatrix> {
        if k == 0 || k >= self.parties() {
            return Err(Error::Invalid(format!("cut {k} must split {} parties", self.parties())));
        }
        let a: usize = self.dims[..k].iter().product();
        let b: usize = self.dims[k..].iter().product();
        Ok(DensityMatrix { mat: self.mat.clone(), dims: vec![a, b] })
    }
}

/// Subspace stored as an orthonormal column basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: CMat,
}

impl Subspace {
    pub fn from_orthonormal(basis: CMat) -> Self {
        Subspace { basis }
    }

    /// Span of the columns of `vectors`, with relative singular-value tolerance.
    pub fn span(vectors: &CMat, tol: f64) -> Self {
        Subspace { basis: linalg::column_space(vectors, tol) }
    }

    pub fn span_real(vectors: &RMat, tol: f64) -> Self {
        Self::span(&linalg::complexify(vectors), tol)
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    pub fn projector(&self) -> CMat {
        &self.basis * self.basis.adjoint()
    }

    /// ‖v − Pv‖ / ‖v‖.
    pub fn residual(&self, v: &CVec) -> f64 {
        let nv = v.norm();
        if nv == 0.0 {
            return 0.0;
        }
        let coeff = self.basis.adjoint() * v;
        (v - &self.basis * coeff).norm() / nv
    }

    pub fn contains(&self, v: &CVec, tol: f64) -> bool {
        self.residual(v) <= tol
    }

    pub fn is_real(&self, tol: f64) -> bool {
        linalg::max_imag(&self.basis) <= tol
    }

    /// Real orthonormal basis of the same subspace when it is closed under
    /// conjugation.
    pub fn real_basis(&self, tol: f64) -> Option<RMat> {
        let k = self.dim();
        let mut stacked = RMat::zeros(self.ambient_dim(), 2 * k);
        for c in 0..k {
            for r in 0..self.ambient_dim() {
                stacked[(r, c)] = self.basis[(r, c)].re;
                stacked[(r, k + c)] = self.basis[(r, c)].im;
            }
        }
        let b = linalg::column_space(&stacked, 1e-9);
        (b.ncols() == k && {
            let bc = linalg::complexify(&b);
            (0..k).all(|c| self.residual(&bc.column(c).into_owned()) < tol.max(1e-9))
        })
        .then_some(b)
    }

    /// Orthogonal complement in the ambient space.
    pub fn complement(&self) -> Subspace {
        let n = self.ambient_dim();
        if self.dim() == 0 {
            return Subspace { basis: CMat::identity(n, n) };
        }
        Subspace { basis: linalg::nullspace(&self.basis.adjoint(), 1e-10) }
    }
}

/// Range and kernel of a state under a relative eigenvalue tolerance.
#[derive(Debug, Clone)]
pub struct RangeKernel {
    pub range: Subspace,
    pub kernel: Subspace,
    pub rank: usize,
    pub eigenvalues: Vec<f64>,
}

pub fn range_kernel(rho: &DensityMatrix, tol: f64) -> RangeKernel {
    let (vals, vecs) = if rho.is_real(1e-14) {
        let (v, e) = linalg::symmetric_eigen(&rho.real_matrix());
        (v, linalg::complexify(&e))
    } else {
        rho.eigen()
    };
    let lmax = vals.last().copied().unwrap_or(0.0);
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > tol * lmax).collect();
    let drop: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] <= tol * lmax).collect();
    let pick = |cols: &[usize]| CMat::from_fn(vecs.nrows(), cols.len(), |r, c| vecs[(r, cols[c])]);
    RangeKernel {
        range: Subspace::from_orthonormal(pick(&keep)),
        kernel: Subspace::from_orthonormal(pick(&drop)),
        rank: keep.len(),
        eigenvalues: vals,
    }
}

fn require_symmetric(rho: &DensityMatrix) -> Result<(usize, usize)> {
    let n = rho.local_dim().ok_or_else(|| Error::Dimension("parties have different local dimensions".into()))?;
    Ok((n, rho.parties()))
}

/// Largest violation of full index-permutation symmetry, relative to the largest entry.
pub fn cs_deviation(rho: &DensityMatrix) -> f64 {
    let Ok((n, d)) = require_symmetric(rho) else {
        return f64::INFINITY;
    };
    let m = rho.matrix();
    let scale = linalg::max_abs(m).max(f64::MIN_POSITIVE);
    let mut worst = linalg::max_imag(m);
    let dim = rho.dim();
    for r in 0..dim {
        let rd = digits(r, n, d);
        for c in 0..dim {
            let cd = digits(c, n, d);
            let v = m[(r, c)].re;
            let mut slots = Vec::with_capacity(2 * d);
            for k in 0..d {
                slots.push(rd[k]);
                slots.push(cd[k]);
            }
            for s in 0..2 * d - 1 {
                if slots[s] == slots[s + 1] {
                    continue;
                }
                let mut t = slots.clone();
                t.swap(s, s + 1);
                let row: Vec<usize> = (0..d).map(|k| t[2 * k]).collect();
                let col: Vec<usize> = (0..d).map(|k| t[2 * k + 1]).collect();
                let w = m[(tensors::compose(&row, n), tensors::compose(&col, n))].re;
                worst = worst.max((v - w).abs());
            }
        }
    }
    worst / scale
}

/// True when the coefficients are real and invariant under every
/// permutation of the 2d indices.
pub fn is_cs(rho: &DensityMatrix, tol: f64) -> bool {
    cs_deviation(rho) <= tol
}

fn validate_parties(rho: &DensityMatrix, parties: &[usize]) -> Result<Vec<bool>> {
    let d = rho.parties();
    let mut mask = vec![false; d];
    for &k in parties {
        if k >= d {
            return Err(Error::Invalid(format!("party {k} out of range for {d} parties")));
        }
        if mask[k] {
            return Err(Error::Invalid(format!("party {k} listed twice")));
        }
        mask[k] = true;
    }
    Ok(mask)
}

fn mixed_digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
    out
}

fn mixed_compose(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &n)| acc * n + x)
}

/// Traces out the listed parties. Tracing every party is rejected.
pub fn partial_trace(rho: &DensityMatrix, parties: &[usize]) -> Result<DensityMatrix> {
    let mask = validate_parties(rho, parties)?;
    if mask.iter().all(|&b| b) {
        return Err(Error::Invalid("cannot trace out every party".into()));
    }
    let dims = rho.dims();
    let keep_dims: Vec<usize> = dims.iter().zip(&mask).filter(|(_, &t)| !t).map(|(&n, _)| n).collect();
    let out_dim: usize = keep_dims.iter().product();
    let mut out = CMat::zeros(out_dim, out_dim);
    let m = rho.matrix();
    let dim = rho.dim();
    for r in 0..dim {
        let rd = mixed_digits(r, dims);
        for c in 0..dim {
            let cd = mixed_digits(c, dims);
            if (0..dims.len()).any(|k| mask[k] && rd[k] != cd[k]) {
                continue;
            }
            let rk: Vec<usize> = (0..dims.len()).filter(|&k| !mask[k]).map(|k| rd[k]).collect();
            let ck: Vec<usize> = (0..dims.len()).filter(|&k| !mask[k]).map(|k| cd[k]).collect();
            out[(mixed_compose(&rk, &keep_dims), mixed_compose(&ck, &keep_dims))] += m[(r, c)];
        }
    }
    Ok(DensityMatrix::trusted(out, keep_dims))
}

/// Transposes the listed parties. The result is Hermitian but not
/// necessarily PSD, so it is returned as a plain matrix.
pub fn partial_transpose(rho: &DensityMatrix, parties: &[usize]) -> Result<CMat> {
    let mask = validate_parties(rho, parties)?;
    let dims = rho.dims();
    let dim = rho.dim();
    let m = rho.matrix();
    let mut out = CMat::zeros(dim, dim);
    for r in 0..dim {
        let rd = mixed_digits(r, dims);
        for c in 0..dim {
            let cd = mixed_digits(c, dims);
            let mut nr = rd.clone();
            let mut nc = cd.clone();
            for k in 0..dims.len() {
                if mask[k] {
                    nr[k] = cd[k];
                    nc[k] = rd[k];
                }
            }
            out[(mixed_compose(&nr, dims), mixed_compose(&nc, dims))] = m[(r, c)];
        }
    }
    Ok(out)
}

/// Smallest eigenvalue of each partial transpose, one entry per cut.
#[derive(Debug, Clone, PartialEq)]
pub struct PptReport {
    pub ppt: bool,
    /// (transposed parties, smallest eigenvalue)
    pub cuts: Vec<(Vec<usize>, f64)>,
    pub lambda_max: f64,
}

/// Checks every partial transpose (one per cut; a cut and its complement
/// have the same spectrum) against `−tol · λmax(ρ)`.
pub fn ppt_report(rho: &DensityMatrix, tol: f64) -> PptReport {
    let d = rho.parties();
    let (vals, _) = rho.eigen();
    let lmax = vals.last().copied().unwrap_or(0.0);
    let mut cuts = Vec::new();
    for mask in 1usize..(1 << (d - 1)) {
        let parties: Vec<usize> = (0..d).filter(|&k| mask & (1 << k) != 0).collect();
        let pt = partial_transpose(rho, &parties).expect("valid party list");
        let (ev, _) = linalg::hermitian_eigen(&pt);
        cuts.push((parties, ev[0]));
    }
    let ppt = cuts.iter().all(|(_, m)| *m >= -tol * lmax);
    PptReport { ppt, cuts, lambda_max: lmax }
}

pub fn is_ppt(rho: &DensityMatrix, tol: f64) -> bool {
    ppt_report(rho, tol).ppt
}

/// Real invertible local operation A^{⊗d} ρ (A^{⊗d})ᵀ. `a` may be rectangular.
pub fn apply_rilo(rho: &DensityMatrix, a: &RMat) -> Result<DensityMatrix> {
    let (n, _) = require_symmetric(rho)?;
    if a.ncols() != n {
        return Err(Error::Dimension(format!("operator has {} columns, local dimension is {n}", a.ncols())));
    }
    if a.iter().all(|&x| x == 0.0) {
        return Err(Error::Invalid("local operator is zero".into()));
    }
    let op = linalg::complexify(a);
    let (out, dims) = linalg::local_congruence(rho.matrix(), rho.dims(), &op);
    total_dim(&dims)?;
    if out.trace().re <= 0.0 {
        return Err(Error::ZeroTrace);
    }
    Ok(DensityMatrix::trusted(out, dims))
}

/// Every single-party marginal has full rank.
pub fn is_supported(rho: &DensityMatrix, tol: f64) -> bool {
    let d = rho.parties();
    (0..d).all(|k| {
        let others: Vec<usize> = (0..d).filter(|&j| j != k).collect();
        let marginal = if others.is_empty() { rho.clone() } else { partial_trace(rho, &others).expect("valid") };
        marginal.rank(tol) == rho.dims()[k]
    })
}

/// Real orthonormal basis (N × r) of the first-party marginal's range.
pub fn local_support(rho: &DensityMatrix, tol: f64) -> RMat {
    let d = rho.parties();
    let others: Vec<usize> = (1..d).collect();
    let marginal = if others.is_empty() { rho.clone() } else { partial_trace(rho, &others).expect("valid") };
    let rk = range_kernel(&marginal, tol);
    rk.range
        .real_basis(1e-8)
        .unwrap_or_else(|| linalg::real_part(rk.range.basis()))
}

/// Outer product |v⟩⟨v| as a matrix.
pub fn projector(v: &CVec) -> CMat {
    v * v.adjoint()
}

pub fn real_projector(v: &DVector<f64>) -> CMat {
    let c = linalg::complexify_vec(v);
    &c * c.adjoint()
}
