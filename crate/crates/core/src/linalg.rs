//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type RMat = DMatrix<f64>;
pub type CVec = DVector<Complex64>;
pub type RVec = DVector<f64>;

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let h = hermitize(m);
    let eig = h.symmetric_eigen();
    sort_eigen(eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Eigen-decomposition of a real symmetric matrix, eigenvalues ascending.
pub fn symmetric_eigen(m: &RMat) -> (Vec<f64>, RMat) {
    let s = (m + m.transpose()) * 0.5;
    let eig = s.symmetric_eigen();
    sort_eigen(eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

fn sort_eigen<T: ComplexField + Copy>(vals: Vec<f64>, vecs: DMatrix<T>) -> (Vec<f64>, DMatrix<T>) {
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let sorted_vals = order.iter().map(|&i| vals[i]).collect();
    let sorted_vecs = DMatrix::from_fn(vecs.nrows(), vecs.ncols(), |r, c| vecs[(r, order[c])]);
    (sorted_vals, sorted_vecs)
}

pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn max_abs<T: ComplexField + Copy>(m: &DMatrix<T>) -> f64
where
    T::RealField: Into<f64>,
{
    m.iter().map(|z| z.modulus().into()).fold(0.0, f64::max)
}

pub fn max_imag(m: &CMat) -> f64 {
    m.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
}

pub fn real_part(m: &CMat) -> RMat {
    m.map(|z| z.re)
}

pub fn complexify(m: &RMat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn complexify_vec(v: &RVec) -> CVec {
    v.map(|x| Complex64::new(x, 0.0))
}

/// Orthonormal basis for the null space of `a`, using singular values below
/// `tol` times the largest one (absolute `tol` when `a` vanishes).
pub fn nullspace<T: ComplexField + Copy>(a: &DMatrix<T>, tol: f64) -> DMatrix<T>
where
    T::RealField: Into<f64>,
{
    let (m, n) = a.shape();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let padded = if m < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested v_t");
    let sv: Vec<f64> = svd.singular_values.iter().map(|s| s.clone().into()).collect();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let thresh = if smax > 0.0 { tol * smax } else { tol };
    let cols: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] <= thresh).collect();
    DMatrix::from_fn(n, cols.len(), |r, c| vt[(cols[c], r)].conjugate())
}

/// Orthonormal basis for the column space of `a` (relative tolerance).
pub fn column_space<T: ComplexField + Copy>(a: &DMatrix<T>, tol: f64) -> DMatrix<T>
where
    T::RealField: Into<f64>,
{
    let (m, n) = a.shape();
    if n == 0 || m == 0 {
        return DMatrix::zeros(m, 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("requested u");
    let sv: Vec<f64> = svd.singular_values.iter().map(|s| s.clone().into()).collect();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return DMatrix::zeros(m, 0);
    }
    let cols: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] > tol * smax).collect();
    DMatrix::from_fn(m, cols.len(), |r, c| u[(r, cols[c])])
}

/// Numerical rank with a tolerance relative to the largest singular value.
pub fn rank<T: ComplexField + Copy>(a: &DMatrix<T>, tol: f64) -> usize
where
    T::RealField: Into<f64>,
{
    if a.is_empty() {
        return 0;
    }
    let sv: Vec<f64> = a.clone().singular_values().iter().map(|s| s.clone().into()).collect();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * smax).count()
}

/// Moore–Penrose pseudo-inverse of a Hermitian PSD matrix restricted to
/// eigenvalues above `tol · λmax`.
pub fn psd_pinv(m: &CMat, tol: f64) -> CMat {
    let (vals, vecs) = hermitian_eigen(m);
    let lmax = vals.iter().copied().fold(0.0, f64::max);
    let n = m.nrows();
    let mut out = CMat::zeros(n, n);
    for (k, &l) in vals.iter().enumerate() {
        if l > tol * lmax {
            let v = vecs.column(k);
            out += v * v.adjoint() * Complex64::new(1.0 / l, 0.0);
        }
    }
    out
}

/// Applies `op` (n_out × dims[party]) to the row index of `m` on one tensor
/// factor, leaving columns untouched.
pub fn local_left<T: ComplexField + Copy>(
    m: &DMatrix<T>,
    dims: &[usize],
    party: usize,
    op: &DMatrix<T>,
) -> DMatrix<T> {
    let n_in = dims[party];
    assert_eq!(op.ncols(), n_in, "operator width must match the party dimension");
    let n_out = op.nrows();
    let post: usize = dims[party + 1..].iter().product();
    let pre: usize = dims[..party].iter().product();
    let cols = m.ncols();
    let mut out = DMatrix::<T>::zeros(pre * n_out * post, cols);
    for c in 0..cols {
        for p in 0..pre {
            for s in 0..post {
                for a_out in 0..n_out {
                    let mut acc = T::zero();
                    for a_in in 0..n_in {
                        let w = op[(a_out, a_in)];
                        if w != T::zero() {
                            acc += w * m[((p * n_in + a_in) * post + s, c)];
                        }
                    }
                    out[((p * n_out + a_out) * post + s, c)] = acc;
                }
            }
        }
    }
    out
}

/// Congruence M ↦ (⊗ₖ opₖ) M (⊗ₖ opₖ)† with the same operator on every party.
pub fn local_congruence<T: ComplexField + Copy>(m: &DMatrix<T>, dims: &[usize], op: &DMatrix<T>) -> (DMatrix<T>, Vec<usize>) {
    let mut cur = m.clone();
    let mut cur_dims = dims.to_vec();
    for k in 0..dims.len() {
        cur = local_left(&cur, &cur_dims, k, op);
        cur_dims[k] = op.nrows();
    }
    let mut t = cur.adjoint();
    let mut t_dims = dims.to_vec();
    for k in 0..dims.len() {
        t = local_left(&t, &t_dims, k, op);
        t_dims[k] = op.nrows();
    }
    (t.adjoint(), cur_dims)
}

/// d-fold tensor power of a vector.
pub fn tensor_power<T: ComplexField + Copy>(x: &DVector<T>, d: usize) -> DVector<T> {
    let mut out = DVector::from_element(1, T::one());
    for _ in 0..d {
        out = out.kronecker(x);
    }
    out
}

pub fn normalize_real(v: &RVec) -> RVec {
    let n = v.norm();
    if n > 0.0 {
        v / n
    } else {
        v.clone()
    }
}

/// Flips the sign so that the first entry above `tol` in magnitude is positive.
pub fn canonical_sign(v: &RVec, tol: f64) -> RVec {
    match v.iter().find(|x| x.abs() > tol) {
        Some(&x) if x < 0.0 => -v,
        _ => v.clone(),
    }
}

/// Angle between the lines spanned by two real vectors.
pub fn line_angle(a: &RVec, b: &RVec) -> f64 {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return std::f64::consts::FRAC_PI_2;
    }
    let c = (a.dot(b) / (na * nb)).abs().min(1.0);
    let s = (a / na - b * (a.dot(b).signum() / nb)).norm();
    // acos loses precision near zero, the chord does not
    if c > 0.9 {
        2.0 * (s / 2.0).min(1.0).asin()
    } else {
        c.acos()
    }
}
