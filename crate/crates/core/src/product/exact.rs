//! Exact rational treatment of bipartite (d = 2) symmetric product-vector
//! problems with rational generators.
//!
//! w = x⊗x lies in span{g₁,…,g_r} iff the matrix [g₁ … g_r w] keeps rank r,
//! i.e. iff w is annihilated by every row of the left null space L of
//! [g₁ … g_r] in the symmetric coordinates (x_i x_j, i ≤ j). Each row of L is
//! a quadric in x. When N−1 quadrics have 2^{N−1} distinct isolated rational
//! solutions, refined Bezout leaves no room for further (complex) solutions.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::RVec;

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// Index pairs (i, j), i ≤ j, in lexicographic order.
pub fn pair_coords(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect()
}

fn row_echelon(mut m: Vec<Vec<Q>>) -> (Vec<Vec<Q>>, Vec<usize>) {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let t = &f * &m[r][j];
                    m[i][j] = &m[i][j] - t;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    m.truncate(r);
    (m, pivots)
}

/// Exact rank of a rational matrix given as rows.
pub fn rank(rows: &[Vec<Q>]) -> usize {
    row_echelon(rows.to_vec()).0.len()
}

/// Null space of a rational matrix (rows), as basis vectors.
pub fn nullspace(rows: &[Vec<Q>], cols: usize) -> Vec<Vec<Q>> {
    let (rref, pivots) = row_echelon(rows.to_vec());
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); cols];
            v[f] = Q::one();
            for (row, &p) in rref.iter().zip(&pivots) {
                v[p] = -row[f].clone();
            }
            v
        })
        .collect()
}

/// Symmetric coordinates of x⊗x: entries x_i x_j for i ≤ j.
pub fn product_coords(x: &[Q]) -> Vec<Q> {
    pair_coords(x.len()).iter().map(|&(i, j)| &x[i] * &x[j]).collect()
}

#[derive(Debug, Clone)]
pub struct ExactSystem {
    pub n: usize,
    /// Generators in symmetric coordinates (coefficient of |ij⟩, i ≤ j).
    pub generators: Vec<Vec<Q>>,
    pub rank: usize,
    /// Quadrics Σ c_{ij} x_i x_j = 0 in reduced row-echelon form.
    pub quadrics: Vec<Vec<Q>>,
}

#[derive(Debug, Clone)]
pub struct ExactCertificate {
    pub solutions: Vec<Vec<Q>>,
    pub all_verified: bool,
    pub all_isolated: bool,
    pub bezout: Option<usize>,
    pub complete: bool,
}

impl ExactSystem {
    /// Range spanned by x_i⊗x_i for rational local vectors x_i.
    pub fn from_local_generators(locals: &[Vec<Q>]) -> Result<Self> {
        let n = locals.first().map(|x| x.len()).ok_or_else(|| Error::Invalid("no generators".into()))?;
        if locals.iter().any(|x| x.len() != n) {
            return Err(Error::Dimension("generators differ in length".into()));
        }
        Self::from_symmetric(n, locals.iter().map(|x| product_coords(x)).collect())
    }

    pub fn from_symmetric(n: usize, generators: Vec<Vec<Q>>) -> Result<Self> {
        let s = n * (n + 1) / 2;
        if generators.iter().any(|g| g.len() != s) {
            return Err(Error::Dimension(format!("symmetric coordinates have length {s}")));
        }
        let rank = rank(&generators);
        // left null space of the s×r matrix [g₁ … g_r] = null space of its transpose
        let quadrics = row_echelon(nullspace(&generators, s)).0;
        Ok(ExactSystem { n, generators, rank, quadrics })
    }

    /// Matrix [g₁ … g_r w] has rank r (the rank-condition form).
    pub fn rank_condition(&self, x: &[Q]) -> bool {
        let mut rows = self.generators.clone();
        rows.push(product_coords(x));
        rank(&rows) == self.rank
    }

    pub fn eval(&self, x: &[Q]) -> Vec<Q> {
        let w = product_coords(x);
        self.quadrics.iter().map(|row| row.iter().zip(&w).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn contains_product(&self, x: &[Q]) -> bool {
        self.eval(x).iter().all(|v| v.is_zero())
    }

    /// Jacobian of the quadrics at x has rank N−1 (x is an isolated,
    /// multiplicity-one projective solution).
    pub fn isolated(&self, x: &[Q]) -> bool {
        let pairs = pair_coords(self.n);
        let jac: Vec<Vec<Q>> = self
            .quadrics
            .iter()
            .map(|row| {
                let mut g = vec![Q::zero(); self.n];
                for (c, &(i, j)) in row.iter().zip(&pairs) {
                    if c.is_zero() {
                        continue;
                    }
                    g[i] += c * &x[j];
                    g[j] += c * &x[i];
                }
                g
            })
            .collect();
        rank(&jac) == self.n - 1
    }

    /// Checks candidate solutions exactly and decides completeness.
    pub fn certify(&self, candidates: &[Vec<Q>]) -> ExactCertificate {
        let mut sols: Vec<Vec<Q>> = Vec::new();
        for c in candidates {
            let c = projective_normal(c);
            if !sols.contains(&c) {
                sols.push(c);
            }
        }
        let all_verified = sols.iter().all(|s| self.contains_product(s) && self.rank_condition(s));
        let all_isolated = sols.iter().all(|s| self.isolated(s));
        let bezout = (self.quadrics.len() + 1 == self.n).then(|| 1usize << (self.n - 1));
        let complete = all_verified && all_isolated && bezout == Some(sols.len());
        ExactCertificate { solutions: sols, all_verified, all_isolated, bezout, complete }
    }
}

/// Scales so the first nonzero coordinate equals one.
pub fn projective_normal(x: &[Q]) -> Vec<Q> {
    match x.iter().find(|v| !v.is_zero()) {
        Some(p) => {
            let p = p.clone();
            x.iter().map(|v| v / &p).collect()
        }
        None => x.to_vec(),
    }
}

/// Best rational approximation with denominator at most `max_den`.
pub fn rationalize(x: f64, max_den: i64) -> Option<Q> {
    if !x.is_finite() {
        return None;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    let mut v = x.abs();
    for _ in 0..64 {
        let a = v.floor();
        if a > 1e15 {
            break;
        }
        let a = a as i128;
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 > max_den as i128 {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = v - a as f64;
        if frac < 1e-13 {
            break;
        }
        v = 1.0 / frac;
    }
    if q1 == 0 {
        return None;
    }
    let sign = if x < 0.0 { -1 } else { 1 };
    Some(Q::new(BigInt::from(sign * p1), BigInt::from(q1)))
}

/// Rational direction for a real vector (scaled so its largest entry is one).
pub fn rationalize_direction(v: &RVec, max_den: i64) -> Option<Vec<Q>> {
    let (imax, _) = v.iter().enumerate().fold((0, 0.0), |acc, (i, x)| if x.abs() > acc.1 { (i, x.abs()) } else { acc });
    let piv = v[imax];
    if piv == 0.0 {
        return None;
    }
    let out: Option<Vec<Q>> = v.iter().map(|x| rationalize(x / piv, max_den)).collect();
    out.filter(|r| r.iter().zip(v.iter()).all(|(a, b)| (a.to_f64().unwrap_or(f64::NAN) - b / piv).abs() < 1e-9))
}

pub fn to_f64(x: &[Q]) -> RVec {
    RVec::from_iterator(x.len(), x.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)))
}

pub fn is_nonnegative(x: &Q) -> bool {
    !x.is_negative()
}
