//! Real direct-sum decompositions ρ = ⊕ᵢ ρᵢ of CS states, where the
//! components live on local subspaces Vᵢ with V₁ ⊕ V₂ ⊕ … (not necessarily
//! orthogonal).
//!
//! The idempotents Pᵢ onto Vᵢ satisfy (P⊗I)ρ = ρ(Pᵀ⊗I). A random element X
//! of this real commutant is split into generalized eigenspaces; after the
//! corresponding basis change the support graph of ρ on local indices falls
//! apart into the blocks.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, RMat};
use crate::random;
use crate::states::{self, DensityMatrix};
use crate::tensors::digits;

#[derive(Debug, Clone)]
pub struct Reduction {
    /// New local basis (N × r columns, in the original coordinates).
    pub basis: RMat,
    /// Partition of the columns of `basis`.
    pub blocks: Vec<Vec<usize>>,
    /// ρ restricted to each block, in block coordinates.
    pub components: Vec<DensityMatrix>,
}

impl Reduction {
    /// Local embedding Eᵢ (N × |blockᵢ|) of component i.
    pub fn embedding(&self, i: usize) -> RMat {
        let b = &self.blocks[i];
        RMat::from_fn(self.basis.nrows(), b.len(), |r, c| self.basis[(r, b[c])])
    }

    pub fn reconstruct(&self) -> CMat {
        let mut total: Option<CMat> = None;
        for (i, comp) in self.components.iter().enumerate() {
            let e = linalg::complexify(&self.embedding(i));
            let (m, _) = linalg::local_congruence(comp.matrix(), comp.dims(), &e);
            total = Some(match total {
                Some(t) => t + m,
                None => m,
            });
        }
        total.expect("at least one component")
    }
}

#[derive(Debug, Clone)]
pub enum ReductionResult {
    Reducible(Reduction),
    Irreducible,
}

fn require_cs(rho: &DensityMatrix) -> Result<(usize, usize)> {
    let dev = states::cs_deviation(rho);
    if dev > 1e-8 {
        return Err(Error::NotCs(dev));
    }
    Ok((rho.local_dim().expect("CS implies equal dims"), rho.parties()))
}

/// ρ restricted to its local support: (Qᵀ)^{⊗d} ρ Q^{⊗d} with Q the
/// orthonormal support basis.
pub fn restrict_to_support(rho: &DensityMatrix, tol: f64) -> (RMat, DensityMatrix) {
    let q = states::local_support(rho, tol);
    let (m, dims) = linalg::local_congruence(rho.matrix(), rho.dims(), &linalg::complexify(&q.transpose()));
    (q, DensityMatrix::trusted(m, dims))
}

/// Real matrices X with (X⊗I)ρ = ρ(Xᵀ⊗I), as an orthonormal basis of r×r matrices.
fn local_commutant(rho: &RMat, n: usize, d: usize) -> Vec<RMat> {
    let dims = vec![n; d];
    let dim = rho.nrows();
    let mut cols = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let mut e = RMat::zeros(n, n);
            e[(a, b)] = 1.0;
            let left = linalg::local_left(rho, &dims, 0, &e);
            let l = &left - left.transpose();
            cols.push(nalgebra::DVector::from_column_slice(l.as_slice()));
        }
    }
    let big = RMat::from_columns(&cols);
    let _ = dim;
    let ns = linalg::nullspace(&big, 1e-9);
    (0..ns.ncols()).map(|c| RMat::from_fn(n, n, |a, b| ns[(a * n + b, c)])).collect()
}

/// Generalized eigenspaces of a real matrix with real spectrum; `None` when
/// the spectrum has a non-real pair.
fn real_eigenspaces(x: &RMat) -> Option<Vec<RMat>> {
    let n = x.nrows();
    let ev = x.clone().complex_eigenvalues();
    let scale = ev.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    if ev.iter().any(|z| z.im.abs() > 1e-7 * scale) {
        return None;
    }
    let mut vals: Vec<f64> = ev.iter().map(|z| z.re).collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    let mut clusters: Vec<(f64, usize)> = Vec::new();
    for v in vals {
        match clusters.last_mut() {
            Some((c, m)) if (v - *c / *m as f64).abs() <= 1e-6 * scale => {
                *c += v;
                *m += 1;
            }
            _ => clusters.push((v, 1)),
        }
    }
    let mut spaces = Vec::new();
    let mut total = 0;
    for (sum, m) in clusters {
        let c = sum / m as f64;
        let shifted = x - RMat::identity(n, n) * c;
        let mut p = RMat::identity(n, n);
        for _ in 0..m {
            p = &p * &shifted;
        }
        let ns = linalg::nullspace(&p, 1e-7);
        if ns.ncols() != m {
            return None;
        }
        total += m;
        spaces.push(ns);
    }
    (total == n).then_some(spaces)
}

/// Connected components of local indices, linking all indices of every
/// multiset carrying an entry above `thresh`.
fn support_blocks(m: &RMat, n: usize, d: usize, thresh: f64) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut j = i;
        while p[j] != r {
            let nx = p[j];
            p[j] = r;
            j = nx;
        }
        r
    }
    let dim = m.nrows();
    for r in 0..dim {
        for c in r..dim {
            if m[(r, c)].abs() <= thresh {
                continue;
            }
            let mut idx = digits(r, n, d);
            idx.extend(digits(c, n, d));
            let root = find(&mut parent, idx[0]);
            for &i in &idx[1..] {
                let ri = find(&mut parent, i);
                parent[ri] = root;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort();
    out
}

/// Relative cut between structural zeros and genuine entries. Rounding in
/// the transformed matrix grows like cond(B)^{2d}, so entries that should
/// vanish can sit well above `tol`; a clear gap in the entry magnitudes
/// separates them.
fn split_threshold(mt: &RMat, scale: f64, tol: f64) -> f64 {
    let mut ent: Vec<f64> = mt.iter().map(|x| x.abs() / scale).filter(|&x| x > tol).collect();
    ent.sort_by(|a, b| a.total_cmp(b));
    let mut best = (1.0, tol);
    for w in ent.windows(2) {
        if w[0] > 1e-3 {
            break;
        }
        let ratio = w[1] / w[0];
        if ratio > best.0 {
            best = (ratio, (w[0] * w[1]).sqrt());
        }
    }
    if best.0 >= 1e3 {
        best.1
    } else {
        tol
    }
}

fn restrict_block(m: &RMat, n: usize, d: usize, block: &[usize]) -> RMat {
    let k = block.len();
    let kd = k.pow(d as u32);
    let map = |i: usize| -> usize { digits(i, k, d).iter().fold(0, |acc, &x| acc * n + block[x]) };
    RMat::from_fn(kd, kd, |r, c| m[(map(r), map(c))])
}

/// Finds one real direct-sum split of a CS state, if any.
pub fn find_reduction(rho: &DensityMatrix, tol: f64) -> Result<ReductionResult> {
    find_reduction_seeded(rho, tol, 0x00c0_ffee)
}

pub fn find_reduction_seeded(rho: &DensityMatrix, tol: f64, seed: u64) -> Result<ReductionResult> {
    let (_, d) = require_cs(rho)?;
    let (q, restricted) = restrict_to_support(rho, tol);
    let r = q.ncols();
    if r <= 1 {
        return Ok(ReductionResult::Irreducible);
    }
    let m = restricted.real_matrix();
    let comm = local_commutant(&m, r, d);
    if comm.len() <= 1 {
        return Ok(ReductionResult::Irreducible);
    }
    let mut rng = random::rng(seed);
    for _attempt in 0..6 {
        let x = comm.iter().fold(RMat::zeros(r, r), |acc, b| acc + b * rng.sample::<f64, _>(StandardNormal));
        let Some(spaces) = real_eigenspaces(&x) else {
            continue;
        };
        if spaces.len() < 2 {
            continue;
        }
        let mut b = RMat::from_columns(&spaces.iter().flat_map(|s| s.column_iter().map(|c| c.into_owned()).collect::<Vec<_>>()).collect::<Vec<_>>());
        for mut col in b.column_iter_mut() {
            let nrm = col.norm();
            col /= nrm;
        }
        let Some(binv) = b.clone().try_inverse() else {
            continue;
        };
        let (mt, _) = linalg::local_congruence(&m, &vec![r; d], &binv);
        let scale = linalg::max_abs(&mt);
        let blocks = support_blocks(&mt, r, d, split_threshold(&mt, scale, tol) * scale);
        if blocks.len() < 2 {
            continue;
        }
        let components: Vec<DensityMatrix> = blocks
            .iter()
            .map(|blk| DensityMatrix::trusted(linalg::complexify(&restrict_block(&mt, r, d, blk)), vec![blk.len(); d]))
            .collect();
        let red = Reduction { basis: &q * &b, blocks, components };
        let err = (red.reconstruct() - rho.matrix()).norm();
        if err > 1e-9 * rho.matrix().norm().max(1.0) {
            continue;
        }
        return Ok(ReductionResult::Reducible(red));
    }
    Ok(ReductionResult::Irreducible)
}

/// Splits recursively until every component is irreducible. Components are
/// restricted to their local support; embeddings are N × rᵢ.
pub fn decompose_direct_sum(rho: &DensityMatrix, tol: f64) -> Result<Vec<(RMat, DensityMatrix)>> {
    require_cs(rho)?;
    let mut out = Vec::new();
    let mut stack = vec![(RMat::identity(rho.local_dim().unwrap(), rho.local_dim().unwrap()), rho.clone())];
    while let Some((emb, st)) = stack.pop() {
        match find_reduction(&st, tol)? {
            ReductionResult::Reducible(red) => {
                for (i, comp) in red.components.iter().enumerate() {
                    stack.push((&emb * red.embedding(i), comp.clone()));
                }
            }
            ReductionResult::Irreducible => {
                let (q, restricted) = restrict_to_support(&st, tol);
                out.push((&emb * q, restricted));
            }
        }
    }
    out.reverse();
    Ok(out)
}

/// Σ Eᵢ^{⊗d} ρᵢ (Eᵢᵀ)^{⊗d}.
pub fn reassemble(parts: &[(RMat, DensityMatrix)]) -> CMat {
    let mut total: Option<CMat> = None;
    for (e, comp) in parts {
        let (m, _) = linalg::local_congruence(comp.matrix(), comp.dims(), &linalg::complexify(e));
        total = Some(match total {
            Some(t) => t + m,
            None => m,
        });
    }
    total.unwrap_or_else(|| DMatrix::zeros(0, 0))
}
