//! Index arithmetic, Dicke vectors, and the symmetric/periodic projections.
//!
//! Multi-party indices are big-endian: party 0 is the most significant digit.

use std::collections::BTreeMap;

use nalgebra::{ComplexField, DVector};

use crate::error::{Error, Result};
use crate::linalg::{CMat, RMat, RVec};
use crate::DENSE_LIMIT;

/// Digits of `index` in base `n` with `d` places, most significant first.
pub fn digits(mut index: usize, n: usize, d: usize) -> Vec<usize> {
    let mut out = vec![0; d];
    for k in (0..d).rev() {
        out[k] = index % n;
        index /= n;
    }
    out
}

pub fn compose(digits: &[usize], n: usize) -> usize {
    digits.iter().fold(0, |acc, &x| acc * n + x)
}

pub fn checked_pow(n: usize, d: usize) -> Result<usize> {
    let mut acc: usize = 1;
    for _ in 0..d {
        acc = acc.checked_mul(n).ok_or(Error::TooLarge(usize::MAX))?;
        if acc > DENSE_LIMIT {
            return Err(Error::TooLarge(acc));
        }
    }
    Ok(acc)
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// All nondecreasing sequences of length `k` over `0..n`, in lexicographic order.
pub fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            cur.push(v);
            rec(n, k, v, cur, out);
            cur.pop();
        }
    }
    if n > 0 || k == 0 {
        rec(n, k, 0, &mut cur, &mut out);
    }
    out
}

/// Occupation counts of a multiset over `0..n`.
pub fn counts(multiset: &[usize], n: usize) -> Vec<usize> {
    let mut c = vec![0; n];
    for &i in multiset {
        c[i] += 1;
    }
    c
}

/// Number of distinct orderings of a multiset.
pub fn orbit_size(multiset: &[usize]) -> usize {
    let mut sorted = multiset.to_vec();
    sorted.sort_unstable();
    let mut size = 1usize;
    let mut placed = 0usize;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        size *= binomial(placed + (j - i), j - i);
        placed += j - i;
        i = j;
    }
    size
}

/// Sorted tuple of indices; two tuples are equal iff they agree up to permutation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(slots: &[usize]) -> Self {
        let mut v = slots.to_vec();
        v.sort_unstable();
        MultiIndex(v)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// The 2d slots (i₁, j₁, …, i_d, j_d) of the matrix entry (row, col).
pub fn entry_slots(row: usize, col: usize, n: usize, d: usize) -> Vec<usize> {
    let r = digits(row, n, d);
    let c = digits(col, n, d);
    let mut s = Vec::with_capacity(2 * d);
    for k in 0..d {
        s.push(r[k]);
        s.push(c[k]);
    }
    s
}

/// Orthogonal projection of a real Nᵈ × Nᵈ matrix onto CS matrices: every
/// entry is replaced by the mean over its multiset class.
pub fn symmetrize_cs(m: &RMat, n: usize, d: usize) -> RMat {
    let dim = m.nrows();
    let key = |r: usize, c: usize| -> usize { counts(&entry_slots(r, c, n, d), n).iter().fold(0, |acc, &k| acc * (2 * d + 1) + k) };
    let mut sums: std::collections::HashMap<usize, (f64, usize)> = std::collections::HashMap::new();
    let mut keys = Vec::with_capacity(dim * dim);
    for c in 0..dim {
        for r in 0..dim {
            let k = key(r, c);
            let e = sums.entry(k).or_insert((0.0, 0));
            e.0 += m[(r, c)];
            e.1 += 1;
            keys.push(k);
        }
    }
    RMat::from_iterator(dim, dim, keys.iter().map(|k| {
        let (s, c) = sums[k];
        s / c as f64
    }))
}

/// Real coefficient tensor of a CS operator, one value per multiset of 2d indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor {
    n: usize,
    d: usize,
    entries: BTreeMap<MultiIndex, f64>,
}

impl SymTensor {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::Invalid("local dimension and party count must be positive".into()));
        }
        checked_pow(n, d)?;
        Ok(SymTensor { n, d, entries: BTreeMap::new() })
    }

    pub fn local_dim(&self) -> usize {
        self.n
    }

    pub fn parties(&self) -> usize {
        self.d
    }

    pub fn set(&mut self, slots: &[usize], value: f64) -> Result<()> {
        if slots.len() != 2 * self.d || slots.iter().any(|&i| i >= self.n) {
            return Err(Error::Invalid(format!("index {slots:?} does not fit {} parties of dimension {}", self.d, self.n)));
        }
        let key = MultiIndex::new(slots);
        if value == 0.0 {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, value);
        }
        Ok(())
    }

    pub fn get(&self, slots: &[usize]) -> f64 {
        self.entries.get(&MultiIndex::new(slots)).copied().unwrap_or(0.0)
    }

    /// Nonzero entries in lexicographic order of their sorted index.
    pub fn entries(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.entries.iter().map(|(k, &v)| (k, v))
    }

    /// Reads the coefficients of a dense CS matrix; fails if any entry
    /// disagrees with another entry of the same multiset by more than `tol`
    /// relative to the largest entry.
    pub fn from_dense(m: &CMat, n: usize, d: usize, tol: f64) -> Result<Self> {
        let dim = checked_pow(n, d)?;
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::Dimension(format!("expected {dim}x{dim}, got {}x{}", m.nrows(), m.ncols())));
        }
        let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut seen: BTreeMap<MultiIndex, f64> = BTreeMap::new();
        let mut worst = 0.0f64;
        for r in 0..dim {
            for c in 0..dim {
                let z = m[(r, c)];
                worst = worst.max(z.im.abs());
                let key = MultiIndex::new(&entry_slots(r, c, n, d));
                match seen.get(&key) {
                    Some(&v) => worst = worst.max((v - z.re).abs()),
                    None => {
                        seen.insert(key, z.re);
                    }
                }
            }
        }
        if worst > tol * scale {
            return Err(Error::NotCs(worst / scale));
        }
        let entries = seen.into_iter().filter(|(_, v)| *v != 0.0).collect();
        Ok(SymTensor { n, d, entries })
    }

    pub fn to_dense(&self) -> RMat {
        let dim = self.n.pow(self.d as u32);
        RMat::from_fn(dim, dim, |r, c| self.get(&entry_slots(r, c, self.n, self.d)))
    }
}

/// Normalized Dicke vector D_{d,k} on d qubits: uniform superposition of the
/// bit strings with exactly `k` zeros.
pub fn dicke(d: usize, k: usize) -> Result<RVec> {
    if k > d {
        return Err(Error::Invalid(format!("Dicke index {k} exceeds party count {d}")));
    }
    let dim = checked_pow(2, d)?;
    let norm = (binomial(d, k) as f64).sqrt();
    Ok(RVec::from_fn(dim, |i, _| {
        let ones = (i as u64).count_ones() as usize;
        if d - ones == k {
            1.0 / norm
        } else {
            0.0
        }
    }))
}

fn check_len<T>(v: &DVector<T>, n: usize, d: usize) -> Result<usize>
where
    T: nalgebra::Scalar,
{
    let dim = checked_pow(n, d)?;
    if v.len() != dim {
        return Err(Error::Dimension(format!("vector of length {} is not in ({n})^{d}", v.len())));
    }
    Ok(dim)
}

/// Orthogonal projection onto the symmetric subspace: every coefficient is
/// replaced by the average over its permutation orbit. O(Nᵈ).
pub fn project_symmetric<T: ComplexField + Copy>(v: &DVector<T>, n: usize, d: usize) -> Result<DVector<T>> {
    let dim = check_len(v, n, d)?;
    let mut sums: BTreeMap<MultiIndex, (T, usize)> = BTreeMap::new();
    let keys: Vec<MultiIndex> = (0..dim).map(|i| MultiIndex::new(&digits(i, n, d))).collect();
    for (i, key) in keys.iter().enumerate() {
        let e = sums.entry(key.clone()).or_insert((T::zero(), 0));
        e.0 += v[i];
        e.1 += 1;
    }
    Ok(DVector::from_fn(dim, |i, _| {
        let (s, c) = sums[&keys[i]];
        s * nalgebra::convert::<f64, T>(1.0 / c as f64)
    }))
}

/// Orthogonal projection onto the cyclically symmetric subspace.
pub fn project_periodic<T: ComplexField + Copy>(v: &DVector<T>, n: usize, d: usize) -> Result<DVector<T>> {
    let dim = check_len(v, n, d)?;
    let w = nalgebra::convert::<f64, T>(1.0 / d as f64);
    Ok(DVector::from_fn(dim, |i, _| {
        let mut dg = digits(i, n, d);
        let mut acc = T::zero();
        for _ in 0..d {
            acc += v[compose(&dg, n)];
            dg.rotate_left(1);
        }
        acc * w
    }))
}

/// Orthonormal basis of the symmetric subspace, one column per multiset in
/// lexicographic order (normalized orbit indicators).
pub fn symmetric_basis(n: usize, d: usize) -> Result<RMat> {
    let dim = checked_pow(n, d)?;
    let classes = multisets(n, d);
    let index: BTreeMap<Vec<usize>, usize> = classes.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
    let mut b = RMat::zeros(dim, classes.len());
    for i in 0..dim {
        let mut key = digits(i, n, d);
        key.sort_unstable();
        b[(i, index[&key])] = 1.0;
    }
    for mut col in b.column_iter_mut() {
        let nrm = col.norm();
        col /= nrm;
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CVec, tensor_power};
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    #[test]
    fn dicke_d2_k1_and_d3_k3() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(dicke(2, 1).unwrap(), RVec::from_vec(vec![0.0, s, s, 0.0]));
        let mut e = RVec::zeros(8);
        e[0] = 1.0;
        assert_relative_eq!(dicke(3, 3).unwrap(), e);
        assert!(dicke(2, 3).is_err());
    }

    #[test]
    fn symmetric_projection_of_e01() {
        let mut v = RVec::zeros(4);
        v[1] = 1.0;
        let p = project_symmetric(&v, 2, 2).unwrap();
        assert_relative_eq!(p, RVec::from_vec(vec![0.0, 0.5, 0.5, 0.0]));
    }

    #[test]
    fn product_vectors_are_fixed() {
        let x = CVec::from_vec(vec![Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.7), Complex64::new(1.0, 0.0)]);
        let v = tensor_power(&x, 3);
        let p = project_symmetric(&v, 3, 3).unwrap();
        assert!((p - &v).norm() < 1e-14);
        let q = project_periodic(&v, 3, 3).unwrap();
        assert!((q - v).norm() < 1e-14);
    }

    #[test]
    fn periodic_contains_symmetric() {
        let v = RVec::from_fn(27, |i, _| ((i * 7) % 5) as f64 - 2.0);
        let s = project_symmetric(&v, 3, 3).unwrap();
        let ps = project_periodic(&s, 3, 3).unwrap();
        assert!((ps - &s).norm() < 1e-13);
    }

    #[test]
    fn symmetric_basis_dimension() {
        let b = symmetric_basis(4, 2).unwrap();
        assert_eq!(b.ncols(), 10);
        assert_relative_eq!(b.transpose() * &b, RMat::identity(10, 10), epsilon = 1e-14);
        assert_eq!(symmetric_basis(2, 4).unwrap().ncols(), 5);
    }

    #[test]
    fn orbit_sizes() {
        assert_eq!(orbit_size(&[0, 0, 1, 1]), 6);
        assert_eq!(orbit_size(&[2, 0, 1]), 6);
        assert_eq!(orbit_size(&[1, 1, 1]), 1);
    }

    #[test]
    fn sym_tensor_roundtrip() {
        let mut t = SymTensor::new(2, 2).unwrap();
        t.set(&[0, 0, 1, 1], 0.5).unwrap();
        t.set(&[0, 0, 0, 0], 1.0).unwrap();
        let m = crate::linalg::complexify(&t.to_dense());
        let back = SymTensor::from_dense(&m, 2, 2, 1e-12).unwrap();
        assert_eq!(back, t);
        assert!(t.set(&[0, 2, 0, 0], 1.0).is_err());
    }

    #[test]
    fn size_guard() {
        assert!(matches!(checked_pow(5, 6), Err(Error::TooLarge(_))));
        assert_eq!(checked_pow(4, 6).unwrap(), 4096);
    }
}
