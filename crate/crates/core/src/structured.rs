//! Multi-qubit symmetric states in the Dicke basis: Hankel and Toeplitz
//! families, Vandermonde decompositions of PSD Hankel matrices, and an
//! empirical scan of Toeplitz states.
//!
//! Coefficient matrices are taken in the unnormalized basis
//! S_k = √C(d,k)·D_{d,k}, so (t|0⟩+|1⟩)^{⊗d} = Σ_k t^k S_k. A [`DickeMatrix`]
//! stores literal entries ⟨D_i|ρ|D_j⟩; its structure flags are evaluated on
//! the coefficient matrix H = V⁻¹MV⁻¹ with V = diag(√C(d,k)).

use rand::Rng;
use serde::Serialize;

use crate::engine::{self, Verdict};
use crate::error::{Error, Result};
use crate::linalg::{self, RMat, RVec};
use crate::random;
use crate::states::{self, DensityMatrix};
use crate::tensors::{self, binomial};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Flags {
    pub diagonal: bool,
    pub hankel: bool,
    pub toeplitz: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DickeMatrix {
    /// Literal entries ⟨D_{d,i}|ρ|D_{d,j}⟩.
    pub m: RMat,
    pub flags: Flags,
}

fn v_diag(d: usize) -> RVec {
    RVec::from_fn(d + 1, |k, _| (binomial(d, k) as f64).sqrt())
}

impl DickeMatrix {
    pub fn from_entries(m: RMat) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::Dimension("Dicke matrix must be square".into()));
        }
        let d = m.nrows() - 1;
        let v = v_diag(d);
        let h = RMat::from_fn(d + 1, d + 1, |i, j| m[(i, j)] / (v[i] * v[j]));
        let flags = flags_of(&h, 1e-12 * linalg::max_abs(&h).max(1.0));
        Ok(DickeMatrix { m, flags })
    }

    pub fn parties(&self) -> usize {
        self.m.nrows() - 1
    }

    /// H = V⁻¹MV⁻¹, the matrix of ρ in the basis S_k.
    pub fn coefficients(&self) -> RMat {
        let v = v_diag(self.parties());
        RMat::from_fn(self.m.nrows(), self.m.ncols(), |i, j| self.m[(i, j)] / (v[i] * v[j]))
    }

    pub fn structure(&self) -> &'static str {
        match self.flags {
            Flags { diagonal: true, .. } => "diagonal",
            Flags { hankel: true, .. } => "hankel",
            Flags { toeplitz: true, .. } => "toeplitz",
            _ => "generic",
        }
    }
}

fn flags_of(h: &RMat, tol: f64) -> Flags {
    let n = h.nrows();
    let mut f = Flags { diagonal: true, hankel: true, toeplitz: true };
    for i in 0..n {
        for j in 0..n {
            if i != j && h[(i, j)].abs() > tol {
                f.diagonal = false;
            }
            if i + 1 < n && j > 0 && (h[(i, j)] - h[(i + 1, j - 1)]).abs() > tol {
                f.hankel = false;
            }
            if i + 1 < n && j + 1 < n && (h[(i, j)] - h[(i + 1, j + 1)]).abs() > tol {
                f.toeplitz = false;
            }
        }
    }
    f
}

fn require_qubits(rho: &DensityMatrix) -> Result<usize> {
    if rho.dims().iter().any(|&n| n != 2) {
        return Err(Error::Dimension("expected a multi-qubit state".into()));
    }
    Ok(rho.parties())
}

/// Columns D_{d,0}, …, D_{d,d}.
fn dicke_columns(d: usize) -> Result<RMat> {
    let cols: Vec<RVec> = (0..=d).map(|k| tensors::dicke(d, k)).collect::<Result<_>>()?;
    Ok(RMat::from_columns(&cols))
}

pub fn state_to_dicke_matrix(rho: &DensityMatrix) -> Result<DickeMatrix> {
    let d = require_qubits(rho)?;
    if linalg::max_imag(rho.matrix()) > 1e-12 {
        return Err(Error::Invalid("Dicke matrix of a complex state".into()));
    }
    let m = rho.real_matrix();
    let dk = dicke_columns(d)?;
    let p = &dk * dk.transpose();
    let escape = (&p * &m * &p - &m).norm();
    if escape > 1e-10 * m.norm().max(1.0) {
        return Err(Error::Invalid(format!("range leaves the symmetric subspace (deviation {escape:.3e})")));
    }
    DickeMatrix::from_entries(dk.transpose() * m * dk)
}

/// Σ_{ij} h_{ij} |S_i⟩⟨S_j| for a coefficient matrix h.
fn coefficients_to_state(h: &RMat) -> Result<DensityMatrix> {
    let d = h.nrows() - 1;
    let dk = dicke_columns(d)?;
    let s = dk * RMat::from_diagonal(&v_diag(d));
    DensityMatrix::from_real(&(&s * h * s.transpose()), vec![2; d])
}

/// Hankel coefficient matrix h_{ij} = a_{i+j} from 2d+1 moments.
pub fn hankel_matrix(a: &[f64]) -> Result<RMat> {
    if a.len() % 2 == 0 {
        return Err(Error::Dimension("Hankel moments need odd length 2d+1".into()));
    }
    let n = a.len() / 2 + 1;
    Ok(RMat::from_fn(n, n, |i, j| a[i + j]))
}

pub fn toeplitz_matrix(a: &[f64]) -> Result<RMat> {
    if a.is_empty() {
        return Err(Error::Dimension("empty Toeplitz symbol".into()));
    }
    let n = a.len();
    Ok(RMat::from_fn(n, n, |i, j| a[i.abs_diff(j)]))
}

fn check_psd(h: &RMat) -> Result<()> {
    let (vals, _) = linalg::symmetric_eigen(h);
    let lmax = vals.last().copied().unwrap_or(0.0);
    if vals[0] < -1e-12 * lmax.abs().max(1.0) || lmax <= 0.0 {
        return Err(Error::NotPsd(vals[0]));
    }
    Ok(())
}

/// d-qubit CS state Σ a_{i+j}|S_i⟩⟨S_j| (not trace-normalized).
pub fn hankel_to_state(a: &[f64]) -> Result<DensityMatrix> {
    let h = hankel_matrix(a)?;
    check_psd(&h)?;
    coefficients_to_state(&h)
}

/// d-qubit symmetric state Σ a_{|i−j|}|S_i⟩⟨S_j| (not trace-normalized).
pub fn toeplitz_to_state(a: &[f64]) -> Result<DensityMatrix> {
    let h = toeplitz_matrix(a)?;
    check_psd(&h)?;
    coefficients_to_state(&h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Node {
    Finite(f64),
    Infinity,
}

impl Node {
    /// z = (1, t, …, t^{n−1}), or the last basis vector.
    pub fn vector(&self, n: usize) -> RVec {
        match *self {
            Node::Finite(t) => RVec::from_fn(n, |k, _| t.powi(k as i32)),
            Node::Infinity => {
                let mut e = RVec::zeros(n);
                e[n - 1] = 1.0;
                e
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VandermondeTerm {
    pub weight: f64,
    pub node: Node,
}

pub fn vandermonde_sum(terms: &[VandermondeTerm], n: usize) -> RMat {
    let mut m = RMat::zeros(n, n);
    for t in terms {
        let z = t.node.vector(n);
        m += &z * z.transpose() * t.weight;
    }
    m
}

/// Nodes of the moments h₀…h_{2k−1} from the k×k leading and shifted blocks.
fn prony_nodes(h: &[f64], k: usize) -> Result<Vec<f64>> {
    let h0 = RMat::from_fn(k, k, |i, j| h[i + j]);
    let h1 = RMat::from_fn(k, k, |i, j| h[i + j + 1]);
    let l = h0.cholesky().ok_or_else(|| Error::Numeric("leading Hankel block not positive definite".into()))?.l();
    let linv = l.clone().try_inverse().ok_or_else(|| Error::Numeric("singular Cholesky factor".into()))?;
    let c = &linv * h1 * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let (vals, _) = linalg::symmetric_eigen(&c);
    Ok(vals)
}

fn vandermonde_weights(nodes: &[f64], moments: &[f64]) -> Result<Vec<f64>> {
    let a = RMat::from_fn(moments.len(), nodes.len(), |k, i| nodes[i].powi(k as i32));
    let b = RVec::from_column_slice(moments);
    let w = a.svd(true, true).solve(&b, 1e-15).map_err(|e| Error::Numeric(e.to_string()))?;
    Ok(w.iter().copied().collect())
}

/// PSD Hankel M = Σ λᵢ zᵢzᵢᵀ with at most one Infinity node.
pub fn hankel_psd_decompose(m: &RMat) -> Result<Vec<VandermondeTerm>> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(Error::Dimension("square matrix expected".into()));
    }
    if n > 12 {
        return Err(Error::TooLarge(n));
    }
    let scale = linalg::max_abs(m).max(f64::MIN_POSITIVE);
    if !flags_of(m, 1e-12 * scale.max(1.0)).hankel {
        return Err(Error::Invalid("matrix is not Hankel".into()));
    }
    check_psd(m)?;
    let mut h: Vec<f64> = (0..2 * n - 1).map(|k| if k < n { m[(0, k)] } else { m[(k - n + 1, n - 1)] }).collect();
    let r = linalg::rank(m, 1e-10);
    let lead_rank = if r == 0 { 0 } else { linalg::rank(&RMat::from_fn(r, r, |i, j| h[i + j]), 1e-9 * (r as f64)) };
    let mut terms = Vec::new();
    if r == n {
        // flat extension with h_{2n−1} = 0
        h.push(0.0);
        let nodes = prony_nodes(&h, n)?;
        let w = vandermonde_weights(&nodes, &h[..2 * n - 1])?;
        terms.extend(nodes.iter().zip(&w).map(|(&t, &w)| VandermondeTerm { weight: w, node: Node::Finite(t) }));
    } else if lead_rank == r {
        let nodes = prony_nodes(&h, r)?;
        let w = vandermonde_weights(&nodes, &h)?;
        terms.extend(nodes.iter().zip(&w).map(|(&t, &w)| VandermondeTerm { weight: w, node: Node::Finite(t) }));
    } else {
        let k = r - 1;
        let nodes = if k > 0 { prony_nodes(&h, k)? } else { Vec::new() };
        let w = if k > 0 { vandermonde_weights(&nodes, &h[..2 * n - 2])? } else { Vec::new() };
        let last: f64 = h[2 * n - 2] - nodes.iter().zip(&w).map(|(t, w)| w * t.powi(2 * n as i32 - 2)).sum::<f64>();
        terms.extend(nodes.iter().zip(&w).map(|(&t, &w)| VandermondeTerm { weight: w, node: Node::Finite(t) }));
        terms.push(VandermondeTerm { weight: last, node: Node::Infinity });
    }
    let terms = merge_nodes(terms);
    if terms.iter().any(|t| !(t.weight > 0.0)) {
        return Err(Error::Numeric("non-positive Vandermonde weight".into()));
    }
    let err = (vandermonde_sum(&terms, n) - m).norm();
    if err > 1e-8 * m.norm().max(1.0) {
        return Err(Error::Numeric(format!("Vandermonde reconstruction error {err:.3e}")));
    }
    Ok(terms)
}

fn merge_nodes(mut terms: Vec<VandermondeTerm>) -> Vec<VandermondeTerm> {
    terms.sort_by(|a, b| match (a.node, b.node) {
        (Node::Finite(x), Node::Finite(y)) => x.total_cmp(&y),
        (Node::Finite(_), Node::Infinity) => std::cmp::Ordering::Less,
        (Node::Infinity, Node::Finite(_)) => std::cmp::Ordering::Greater,
        _ => std::cmp::Ordering::Equal,
    });
    let mut out: Vec<VandermondeTerm> = Vec::new();
    for t in terms {
        if let (Some(last), Node::Finite(x)) = (out.last_mut(), t.node) {
            if let Node::Finite(y) = last.node {
                if (x - y).abs() < 1e-8 {
                    let w = last.weight + t.weight;
                    last.node = Node::Finite((last.weight * y + t.weight * x) / w);
                    last.weight = w;
                    continue;
                }
            }
        }
        out.push(t);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetricVerdict {
    pub verdict: Verdict,
    pub rule: String,
    /// Smallest partial-transpose eigenvalue over all cuts, relative to λmax.
    pub min_pt_eigenvalue: f64,
}

/// Classifier for multi-qubit symmetric (not necessarily CS) states.
pub fn classify_symmetric(rho: &DensityMatrix) -> Result<SymmetricVerdict> {
    let d = require_qubits(rho)?;
    let rho = rho.normalized();
    let report = states::ppt_report(&rho, 1e-10);
    let min_pt = report.cuts.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min) / report.lambda_max;
    let out = |verdict, rule: &str| Ok(SymmetricVerdict { verdict, rule: rule.into(), min_pt_eigenvalue: min_pt });
    if states::is_cs(&rho, 1e-10) {
        let c = engine::classify(&rho)?;
        return out(c.verdict, c.rule.name());
    }
    if !report.ppt {
        return out(Verdict::Entangled, "ppt-violation");
    }
    if d <= 3 {
        return out(Verdict::Separable, "ppt symmetric state of at most three qubits");
    }
    let pt = states::partial_transpose(&rho, &[0])?;
    if (pt - rho.matrix()).norm() < 1e-12 {
        return out(Verdict::Separable, "invariant under partial transpose");
    }
    out(Verdict::Undetermined, "no rule applies")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRecord {
    pub index: usize,
    pub seed: u64,
    pub symbol: Vec<f64>,
    pub attempts: usize,
    #[serde(flatten)]
    pub result: SymmetricVerdict,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ScanCounts {
    pub separable: usize,
    pub entangled: usize,
    pub undetermined: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub parties: usize,
    pub seed: u64,
    pub samples: usize,
    pub counts: ScanCounts,
    pub records: Vec<ScanRecord>,
}

impl ScanReport {
    /// One JSON object per sample.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("serializable"));
            out.push('\n');
        }
        out
    }

    pub fn summary_json(&self) -> String {
        serde_json::json!({ "parties": self.parties, "seed": self.seed, "samples": self.samples, "counts": self.counts }).to_string()
    }

    pub fn entangled(&self) -> impl Iterator<Item = &ScanRecord> {
        self.records.iter().filter(|r| r.result.verdict == Verdict::Entangled)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Random PSD Toeplitz symbol (1, a₁, …, a_d) with aₖ uniform in [−1, 1],
/// by rejection.
pub fn random_toeplitz_symbol(d: usize, seed: u64) -> (Vec<f64>, usize) {
    let mut rng = random::rng(seed);
    let mut attempts = 0;
    loop {
        attempts += 1;
        let mut a = vec![1.0];
        a.extend((0..d).map(|_| rng.random_range(-1.0..=1.0)));
        let t = toeplitz_matrix(&a).expect("nonempty");
        if linalg::symmetric_eigen(&t).0[0] > 1e-9 {
            return (a, attempts);
        }
    }
}

fn scan_one(index: usize, d: usize, seed: u64) -> Result<ScanRecord> {
    let s = splitmix(seed ^ splitmix(index as u64));
    let (symbol, attempts) = random_toeplitz_symbol(d, s);
    let rho = toeplitz_to_state(&symbol)?;
    let result = classify_symmetric(&rho)?;
    Ok(ScanRecord { index, seed: s, symbol, attempts, result })
}

pub fn toeplitz_scan(samples: usize, d: usize, seed: u64) -> Result<ScanReport> {
    if !(1..=6).contains(&d) {
        return Err(Error::Invalid(format!("party count {d} outside 1..=6")));
    }
    #[cfg(feature = "parallel")]
    let records: Vec<ScanRecord> = {
        use rayon::prelude::*;
        (0..samples).into_par_iter().map(|i| scan_one(i, d, seed)).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let records: Vec<ScanRecord> = (0..samples).map(|i| scan_one(i, d, seed)).collect::<Result<_>>()?;
    let mut counts = ScanCounts::default();
    for r in &records {
        match r.result.verdict {
            Verdict::Separable => counts.separable += 1,
            Verdict::Entangled => counts.entangled += 1,
            Verdict::Undetermined => counts.undetermined += 1,
        }
    }
    Ok(ScanReport { parties: d, seed, samples, counts, records })
}
