//! Decision procedure for CS states: direct-sum splitting, rank rules,
//! product-vector searches, and constructive decompositions by peeling.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, RMat, RVec};
use crate::product::{self, ProductSearch, ProductVector, SearchMode, SearchOptions, SearchTranscript};
use crate::reducibility;
use crate::states::{self, DensityMatrix, Tolerances};
use crate::tensors;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Separable,
    Entangled,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    DirectSum,
    LocalDimensionOne,
    Pure,
    MultiQubit,
    TwoQutrit,
    RankAtMostFive,
    RankEqualsLocalDim,
    RankLocalDimPlusOne,
    RankSixProductVector,
    RankLocalDimPlusTwoProductVector,
    RankSixEmptyProductSet,
    NoProductVectorInRange,
    LinearIndependenceObstruction,
    FiniteProductCone,
    PeelingCompleted,
    TheoremCertifiedNoDecomposition,
    NoRuleApplies,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::DirectSum => "direct sum of separable components",
            Rule::LocalDimensionOne => "one-dimensional local support",
            Rule::Pure => "pure CS state",
            Rule::MultiQubit => "multi-qubit",
            Rule::TwoQutrit => "two-qutrit",
            Rule::RankAtMostFive => "rank at most 5",
            Rule::RankEqualsLocalDim => "rank N",
            Rule::RankLocalDimPlusOne => "rank N+1",
            Rule::RankSixProductVector => "rank-6 with real product vector",
            Rule::RankLocalDimPlusTwoProductVector => "rank N+2 with real product vector",
            Rule::RankSixEmptyProductSet => "rank-6 empty product set",
            Rule::NoProductVectorInRange => "no-product-vector-in-range",
            Rule::LinearIndependenceObstruction => "linear-independence obstruction",
            Rule::FiniteProductCone => "finite product set spans a cone containing the state",
            Rule::PeelingCompleted => "peeling completed",
            Rule::TheoremCertifiedNoDecomposition => "theorem-certified, decomposition not found numerically",
            Rule::NoRuleApplies => "no rule applies",
        }
    }

    /// Rules allowed to back an Entangled verdict.
    pub fn certifies_entanglement(self) -> bool {
        matches!(self, Rule::RankSixEmptyProductSet | Rule::NoProductVectorInRange | Rule::LinearIndependenceObstruction)
    }
}

impl std::fmt::Display for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Rule {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term {
    pub weight: f64,
    pub vector: ProductVector,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Evidence {
    pub rank: usize,
    pub local_dim: usize,
    pub parties: usize,
    pub support_dim: usize,
    pub components: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reconstruction_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certified_by: Option<Rule>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchTranscript>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub product_vectors: Option<Vec<ProductVector>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cone_residual: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub verdict: Verdict,
    pub rule: Rule,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<Vec<Term>>,
    pub evidence: Evidence,
}

impl Certificate {
    fn new(verdict: Verdict, rule: Rule, evidence: Evidence) -> Self {
        Certificate { verdict, rule, decomposition: None, evidence }
    }

    /// Σ λᵢ (xᵢxᵢᵀ)^{⊗d}.
    pub fn reconstruct(&self) -> Option<RMat> {
        let terms = self.decomposition.as_ref()?;
        let d = self.evidence.parties;
        let n = self.evidence.local_dim;
        let dim = n.pow(d as u32);
        let mut m = RMat::zeros(dim, dim);
        for t in terms {
            let v = t.vector.full();
            m += &v * v.transpose() * t.weight;
        }
        Some(m)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EngineOptions {
    pub tol: Tolerances,
    pub search: SearchOptions,
    /// Candidate vectors tried per peeling step before giving up.
    pub backtrack: usize,
    /// Largest dense dimension for which the exhaustive cone test is attempted.
    pub cone_limit: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions { tol: Tolerances::default(), search: SearchOptions::default(), backtrack: 4, cone_limit: 4096 }
    }
}

/// Options plus the absolute eigenvalue floor fixed by the top-level state,
/// so peeling debris in deep residuals is not mistaken for a component.
struct Ctx<'a> {
    opts: &'a EngineOptions,
    floor: f64,
}

pub fn classify(rho: &DensityMatrix) -> Result<Certificate> {
    classify_with(rho, &EngineOptions::default())
}

/// Constructive form of [`classify`]: the same decision procedure, whose
/// Separable verdicts carry a decomposition whenever peeling succeeds.
pub fn s_decompose(rho: &DensityMatrix) -> Result<Certificate> {
    classify(rho)
}

pub fn classify_with(rho: &DensityMatrix, opts: &EngineOptions) -> Result<Certificate> {
    let n = rho.local_dim().ok_or_else(|| Error::Dimension("parties have different local dimensions".into()))?;
    let dev = states::cs_deviation(rho);
    if dev > opts.tol.cs {
        return Err(Error::NotCs(dev));
    }
    let d = rho.parties();
    let m = rho.real_matrix();
    let lmax = linalg::symmetric_eigen(&m).0.last().copied().unwrap_or(0.0);
    let ctx = Ctx { opts, floor: opts.tol.rank * lmax.max(0.0) };
    let mut cert = analyze(&m, n, d, &ctx)?;
    if let Some(rec) = cert.reconstruct() {
        let err = (&rec - &m).norm();
        cert.evidence.reconstruction_error = Some(err);
        if err > 1e-8 * m.norm().max(1.0) {
            cert.evidence.notes.push(format!("decomposition discarded: reconstruction error {err:.3e}"));
            cert.decomposition = None;
            if cert.verdict == Verdict::Separable && cert.rule == Rule::PeelingCompleted {
                cert.verdict = Verdict::Undetermined;
                cert.rule = Rule::NoRuleApplies;
            } else if cert.verdict == Verdict::Separable {
                cert.evidence.certified_by = Some(cert.rule);
                cert.rule = Rule::TheoremCertifiedNoDecomposition;
            }
        }
    }
    debug_assert!(cert.verdict != Verdict::Entangled || cert.rule.certifies_entanglement());
    Ok(cert)
}

/// Subtracts the maximal multiple of |x^{⊗d}⟩⟨x^{⊗d}| keeping ρ PSD.
pub fn peel(rho: &DensityMatrix, x: &ProductVector) -> Result<(f64, DensityMatrix)> {
    let d = rho.parties();
    if x.power != d || rho.local_dim() != Some(x.local.len()) {
        return Err(Error::Dimension("product vector does not match the state".into()));
    }
    let (lambda, res) = peel_real(&rho.real_matrix(), &x.vector(), d, 1e-9, Tolerances::default().rank, 0.0)?;
    Ok((lambda, DensityMatrix::trusted(linalg::complexify(&res), rho.dims().to_vec())))
}

fn peel_real(m: &RMat, x: &RVec, d: usize, range_tol: f64, tol: f64, floor: f64) -> Result<(f64, RMat)> {
    let v = linalg::tensor_power(&linalg::normalize_real(x), d);
    let (vals, vecs) = linalg::symmetric_eigen(m);
    let lmax = vals.last().copied().unwrap_or(0.0);
    if lmax <= 0.0 {
        return Err(Error::ZeroTrace);
    }
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > (tol * lmax).max(floor)).collect();
    let mut proj = 0.0;
    let mut inv = 0.0;
    let mut inside = RVec::zeros(v.len());
    for &i in &keep {
        let c = vecs.column(i).dot(&v);
        proj += c * c;
        inv += c * c / vals[i];
        inside.axpy(c, &vecs.column(i), 1.0);
    }
    let resid = (1.0 - proj).max(0.0).sqrt();
    if resid > range_tol {
        return Err(Error::Invalid(format!("product vector not in range (residual {resid:.3e})")));
    }
    let lambda = 1.0 / inv;
    if !(lambda.is_finite() && lambda > tol * lmax) {
        return Err(Error::Numeric(format!("degenerate peel weight {lambda:.3e}")));
    }
    // subtracting the in-range part keeps the rank drop exact
    let n = x.len();
    let raw = tensors::symmetrize_cs(&(m - &inside * inside.transpose() * lambda), n, d);
    let (rv, re) = linalg::symmetric_eigen(&raw);
    let r = keep.len();
    let dim = rv.len();
    let dropped = rv[dim - r];
    if dropped.abs() > 1e-7 * lmax {
        return Err(Error::Numeric(format!("peel did not lower the rank (eigenvalue {dropped:.3e})")));
    }
    let mut out = RMat::zeros(dim, dim);
    for i in dim + 1 - r..dim {
        if rv[i] > floor {
            let c = re.column(i);
            out += c * c.transpose() * rv[i];
        }
    }
    Ok((lambda, tensors::symmetrize_cs(&out, n, d)))
}

fn evidence_for(rank: usize, n: usize, d: usize) -> Evidence {
    Evidence { rank, local_dim: n, parties: d, support_dim: n, components: 1, ..Default::default() }
}

fn numeric_rank(m: &RMat, tol: f64, floor: f64) -> (usize, RMat) {
    let (vals, vecs) = linalg::symmetric_eigen(m);
    let lmax = vals.last().copied().unwrap_or(0.0);
    let cut = (tol * lmax).max(floor);
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| lmax > 0.0 && vals[i] > cut).collect();
    let basis = RMat::from_fn(m.nrows(), keep.len(), |r, c| vecs[(r, keep[c])]);
    (keep.len(), basis)
}

/// Orthonormal range basis with every column projected onto the symmetric subspace.
fn symmetric_range(range: &RMat, n: usize, d: usize) -> RMat {
    let cols: Vec<RVec> = range.column_iter().map(|c| tensors::project_symmetric(&c.into_owned(), n, d).expect("dimension checked")).collect();
    if cols.is_empty() {
        return range.clone();
    }
    let q = RMat::from_columns(&cols).qr().q();
    q.columns(0, cols.len()).into_owned()
}

/// Pushes terms of a component through its local embedding E.
fn embed_terms(terms: &[Term], e: &RMat, d: usize) -> Vec<Term> {
    terms
        .iter()
        .map(|t| {
            let y = e * t.vector.vector();
            let nrm = y.norm();
            Term { weight: t.weight * nrm.powi(2 * d as i32), vector: ProductVector::new(&y, d) }
        })
        .collect()
}

fn analyze(m: &RMat, n: usize, d: usize, ctx: &Ctx) -> Result<Certificate> {
    let tol = ctx.opts.tol.rank;
    let lmax = linalg::symmetric_eigen(m).0.last().copied().unwrap_or(0.0);
    if lmax <= ctx.floor || m.trace() <= 0.0 {
        let mut c = Certificate::new(Verdict::Separable, Rule::Pure, evidence_for(0, n, d));
        c.decomposition = Some(Vec::new());
        return Ok(c);
    }
    let rho = DensityMatrix::trusted(linalg::complexify(m), vec![n; d]);
    let parts = reducibility::decompose_direct_sum(&rho, tol)?;
    let support_dim: usize = parts.iter().map(|(e, _)| e.ncols()).sum();
    let mut certs = Vec::with_capacity(parts.len());
    for (e, comp) in &parts {
        let cert = core(&comp.real_matrix(), e.ncols(), d, ctx)?;
        certs.push((e, cert));
    }
    let rank = numeric_rank(m, tol, ctx.floor).0;
    if certs.len() == 1 {
        let (e, mut cert) = certs.pop().unwrap();
        cert.decomposition = cert.decomposition.map(|t| embed_terms(&t, e, d));
        cert.evidence.local_dim = n;
        cert.evidence.support_dim = support_dim;
        cert.evidence.rank = rank;
        return Ok(cert);
    }
    let mut ev = evidence_for(rank, n, d);
    ev.support_dim = support_dim;
    ev.components = certs.len();
    if let Some(k) = certs.iter().position(|(_, c)| c.verdict == Verdict::Entangled) {
        let (_, c) = &certs[k];
        ev.notes.push(format!("component {k} of {} is entangled", certs.len()));
        ev.search = c.evidence.search.clone();
        ev.product_vectors = c.evidence.product_vectors.clone();
        ev.cone_residual = c.evidence.cone_residual;
        return Ok(Certificate::new(Verdict::Entangled, c.rule, ev));
    }
    if certs.iter().any(|(_, c)| c.verdict == Verdict::Undetermined) {
        ev.notes.push("a component is undetermined".into());
        return Ok(Certificate::new(Verdict::Undetermined, Rule::NoRuleApplies, ev));
    }
    let mut terms = Vec::new();
    let mut complete = true;
    for (e, c) in &certs {
        match &c.decomposition {
            Some(t) => terms.extend(embed_terms(t, e, d)),
            None => complete = false,
        }
    }
    let mut cert = Certificate::new(Verdict::Separable, Rule::DirectSum, ev);
    if complete {
        cert.decomposition = Some(terms);
    } else {
        cert.evidence.certified_by = Some(Rule::DirectSum);
        cert.rule = Rule::TheoremCertifiedNoDecomposition;
    }
    Ok(cert)
}

/// Rule that certifies separability of a supported CS state from its shape alone.
fn shape_rule(n: usize, d: usize, rank: usize) -> Option<Rule> {
    if n == 1 {
        Some(Rule::LocalDimensionOne)
    } else if rank == 1 {
        Some(Rule::Pure)
    } else if n <= 2 {
        Some(Rule::MultiQubit)
    } else if d == 2 && n <= 3 {
        Some(Rule::TwoQutrit)
    } else if rank <= 5 {
        Some(Rule::RankAtMostFive)
    } else if rank == n {
        Some(Rule::RankEqualsLocalDim)
    } else if rank == n + 1 {
        Some(Rule::RankLocalDimPlusOne)
    } else {
        None
    }
}

/// Supported and irreducible input.
fn core(m: &RMat, n: usize, d: usize, ctx: &Ctx) -> Result<Certificate> {
    let opts = ctx.opts;
    let (rank, range) = numeric_rank(m, opts.tol.rank, ctx.floor);
    let range = symmetric_range(&range, n, d);
    let mut ev = evidence_for(rank, n, d);
    if let Some(rule) = shape_rule(n, d, rank) {
        let terms = if rank == 1 {
            pure_term(m, n, d).map(|t| vec![t])
        } else {
            let mut cands = Vec::new();
            if rule == Rule::TwoQutrit && rank >= 5 {
                if let Ok(x) = product::two_qutrit_product_step(&range) {
                    cands.push(x);
                }
            }
            peel_chain(m, &range, n, d, cands, true, ctx)?
        };
        let mut cert = Certificate::new(Verdict::Separable, rule, ev);
        match terms {
            Some(t) => cert.decomposition = Some(t),
            None => {
                cert.evidence.certified_by = Some(rule);
                cert.rule = Rule::TheoremCertifiedNoDecomposition;
            }
        }
        return Ok(cert);
    }
    let dim = n.pow(d as u32);
    if dim > opts.cone_limit {
        ev.notes.push("dimension above the search limit".into());
        return Ok(Certificate::new(Verdict::Undetermined, Rule::NoRuleApplies, ev));
    }
    let search = product::symmetric_product_vectors(&range, n, d, &SearchOptions { mode: SearchMode::Exhaustive, ..opts.search })?;
    let ProductSearch { vectors, complete, transcript } = search;
    ev.search = Some(transcript);
    ev.product_vectors = Some(vectors.clone());
    let special = rank == 6 || rank == n + 2;
    if vectors.is_empty() {
        if complete {
            let rule = if rank == 6 { Rule::RankSixEmptyProductSet } else { Rule::NoProductVectorInRange };
            return Ok(Certificate::new(Verdict::Entangled, rule, ev));
        }
        ev.notes.push("no product vector found and the search is incomplete".into());
        return Ok(Certificate::new(Verdict::Undetermined, Rule::NoRuleApplies, ev));
    }
    let locals: Vec<RVec> = vectors.iter().map(|v| v.vector()).collect();
    if special {
        let rule = if rank == 6 { Rule::RankSixProductVector } else { Rule::RankLocalDimPlusTwoProductVector };
        let terms = peel_chain(m, &range, n, d, locals, false, ctx)?;
        let mut cert = Certificate::new(Verdict::Separable, rule, ev);
        match terms {
            Some(t) => cert.decomposition = Some(t),
            None => {
                cert.evidence.certified_by = Some(rule);
                cert.rule = Rule::TheoremCertifiedNoDecomposition;
            }
        }
        return Ok(cert);
    }
    if complete {
        let (weights, resid) = cone_fit(m, &locals, n, d);
        ev.cone_residual = Some(resid);
        let scale = m.norm();
        if resid <= 1e-9 * scale {
            let terms = locals
                .iter()
                .zip(&weights)
                .filter(|(_, &w)| w > 0.0)
                .map(|(x, &w)| Term { weight: w, vector: ProductVector::new(x, d) })
                .collect();
            let mut cert = Certificate::new(Verdict::Separable, Rule::FiniteProductCone, ev);
            cert.decomposition = Some(terms);
            return Ok(cert);
        }
        if resid > 1e-6 * scale {
            return Ok(Certificate::new(Verdict::Entangled, Rule::LinearIndependenceObstruction, ev));
        }
        ev.notes.push(format!("cone residual {resid:.3e} between thresholds"));
        return Ok(Certificate::new(Verdict::Undetermined, Rule::NoRuleApplies, ev));
    }
    match peel_chain(m, &range, n, d, locals, false, ctx)? {
        Some(t) => {
            let mut cert = Certificate::new(Verdict::Separable, Rule::PeelingCompleted, ev);
            cert.decomposition = Some(t);
            Ok(cert)
        }
        None => {
            ev.notes.push("peeling did not complete".into());
            Ok(Certificate::new(Verdict::Undetermined, Rule::NoRuleApplies, ev))
        }
    }
}

/// Rank-one CS state c·vvᵀ with v = ±x^{⊗d}.
fn pure_term(m: &RMat, n: usize, d: usize) -> Option<Term> {
    let (vals, vecs) = linalg::symmetric_eigen(m);
    let k = vals.len() - 1;
    let v = vecs.column(k).into_owned();
    let reshaped = RMat::from_fn(n, n.pow(d as u32 - 1), |i, j| v[i * n.pow(d as u32 - 1) + j]);
    let svd = reshaped.svd(true, false);
    let (imax, _) = svd.singular_values.iter().enumerate().fold((0, -1.0), |a, (i, &s)| if s > a.1 { (i, s) } else { a });
    let x = svd.u?.column(imax).into_owned();
    let p = linalg::tensor_power(&x, d);
    let overlap = p.dot(&v);
    if (1.0 - overlap.abs()) > 1e-10 {
        return None;
    }
    Some(Term { weight: vals[k], vector: ProductVector::new(&x, d) })
}

/// Peels candidate vectors (plus freshly searched ones when `search` is set)
/// and recurses on the residual until it is a full decomposition.
fn peel_chain(m: &RMat, range: &RMat, n: usize, d: usize, mut cands: Vec<RVec>, search: bool, ctx: &Ctx) -> Result<Option<Vec<Term>>> {
    let opts = ctx.opts;
    if search && range.ncols() == tensors::binomial(n + d - 1, d) {
        cands.extend(heaviest_directions(m, n, d, opts.backtrack, opts.search.seed));
    }
    let mut attempt = 0u64;
    let mut idx = 0;
    let mut tried: Vec<RVec> = Vec::new();
    while tried.len() < opts.backtrack {
        if idx >= cands.len() {
            if !search || attempt >= opts.backtrack as u64 {
                break;
            }
            let so = SearchOptions { mode: SearchMode::AnyOne, seed: opts.search.seed.wrapping_add(attempt * 7919), ..opts.search };
            attempt += 1;
            let found = product::symmetric_product_vectors(range, n, d, &so)?;
            for v in found.vectors {
                let x = v.vector();
                if !tried.iter().chain(cands.iter()).any(|y| linalg::line_angle(&x, y) < 1e-6) {
                    cands.push(x);
                }
            }
            continue;
        }
        let x = cands[idx].clone();
        idx += 1;
        if tried.iter().any(|y| linalg::line_angle(&x, y) < 1e-6) {
            continue;
        }
        tried.push(x.clone());
        let Ok((lambda, residual)) = peel_real(m, &x, d, 1e-7, opts.tol.rank, ctx.floor) else {
            continue;
        };
        let sub = analyze(&residual, n, d, ctx)?;
        if sub.verdict != Verdict::Separable {
            continue;
        }
        if let Some(mut terms) = sub.decomposition {
            terms.insert(0, Term { weight: lambda, vector: ProductVector::new(&x, d) });
            return Ok(Some(terms));
        }
    }
    Ok(None)
}

/// When every x^{⊗d} lies in the range, the directions with the largest
/// peel weight 1/⟨x^{⊗d}|ρ⁺|x^{⊗d}⟩ among deterministic samples.
fn heaviest_directions(m: &RMat, n: usize, d: usize, count: usize, seed: u64) -> Vec<RVec> {
    let pinv = linalg::real_part(&linalg::psd_pinv(&linalg::complexify(m), 1e-12));
    let mut rng = crate::random::rng(seed);
    let mut scored: Vec<(f64, RVec)> = (0..n)
        .map(|i| {
            let mut e = RVec::zeros(n);
            e[i] = 1.0;
            e
        })
        .chain((0..64).map(|_| crate::random::unit_vector(n, &mut rng)))
        .map(|x| {
            let v = linalg::tensor_power(&x, d);
            (1.0 / v.dot(&(&pinv * &v)), x)
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    scored.into_iter().take(count).map(|(_, x)| x).collect()
}

/// Nonnegative least squares of ρ against the product projectors, in
/// Frobenius-isometric CS coordinates. Returns weights and the residual norm.
fn cone_fit(m: &RMat, locals: &[RVec], n: usize, d: usize) -> (Vec<f64>, f64) {
    let classes = tensors::multisets(n, 2 * d);
    let coord = |slots: &[usize]| -> (usize, usize) {
        let row = tensors::compose(&slots[..d], n);
        let col = tensors::compose(&slots[d..], n);
        (row, col)
    };
    let b = RVec::from_iterator(
        classes.len(),
        classes.iter().map(|c| {
            let (r, col) = coord(c);
            m[(r, col)] * (tensors::orbit_size(c) as f64).sqrt()
        }),
    );
    let a = RMat::from_fn(classes.len(), locals.len(), |i, j| {
        let x = linalg::normalize_real(&locals[j]);
        let c = &classes[i];
        c.iter().map(|&k| x[k]).product::<f64>() * (tensors::orbit_size(c) as f64).sqrt()
    });
    let w = nnls(&a, &b);
    let resid = (&b - &a * RVec::from_column_slice(&w)).norm();
    (w, resid)
}

/// Lawson–Hanson active-set NNLS.
pub fn nnls(a: &RMat, b: &RVec) -> Vec<f64> {
    let k = a.ncols();
    let mut x = RVec::zeros(k);
    let mut passive = vec![false; k];
    let tol = 1e-12 * a.norm().max(1.0) * b.norm().max(1.0);
    for _outer in 0..3 * k + 10 {
        let w = a.transpose() * (b - a * &x);
        let best = (0..k).filter(|&j| !passive[j]).max_by(|&i, &j| w[i].total_cmp(&w[j]));
        match best {
            Some(j) if w[j] > tol => passive[j] = true,
            _ => break,
        }
        for _inner in 0..3 * k + 10 {
            let idx: Vec<usize> = (0..k).filter(|&j| passive[j]).collect();
            let sub = RMat::from_fn(a.nrows(), idx.len(), |r, c| a[(r, idx[c])]);
            let z = sub.clone().svd(true, true).solve(b, 1e-14).unwrap_or_else(|_| RVec::zeros(idx.len()));
            if z.iter().all(|&v| v > 0.0) {
                for (c, &j) in idx.iter().enumerate() {
                    x[j] = z[c];
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (c, &j) in idx.iter().enumerate() {
                if z[c] <= 0.0 {
                    alpha = alpha.min(x[j] / (x[j] - z[c]));
                }
            }
            for (c, &j) in idx.iter().enumerate() {
                x[j] += alpha * (z[c] - x[j]);
                if x[j] <= 1e-15 {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
        }
    }
    x.iter().copied().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BisepDiagnostic {
    pub checked: bool,
    /// Cuts {0..k}:{k..d} examined.
    pub cuts: Vec<usize>,
    /// Largest second singular value of any term across any cut.
    pub max_violation: f64,
}

/// Confirms that every decomposition term factors across every cut.
pub fn bisep_equals_fullsep_check(cert: &Certificate) -> BisepDiagnostic {
    let skipped = BisepDiagnostic { checked: false, cuts: vec![], max_violation: 0.0 };
    let (Verdict::Separable, Some(terms)) = (cert.verdict, &cert.decomposition) else {
        return skipped;
    };
    let d = cert.evidence.parties;
    let n = cert.evidence.local_dim;
    let cuts: Vec<usize> = (1..d).collect();
    let mut worst: f64 = 0.0;
    for t in terms {
        let v = t.vector.full();
        for &k in &cuts {
            let rows = n.pow(k as u32);
            let cols = n.pow((d - k) as u32);
            let mat = RMat::from_fn(rows, cols, |i, j| v[i * cols + j]);
            let mut sv: Vec<f64> = mat.singular_values().iter().copied().collect();
            sv.sort_by(|a, b| b.total_cmp(a));
            worst = worst.max(sv.get(1).copied().unwrap_or(0.0));
        }
    }
    BisepDiagnostic { checked: true, cuts, max_violation: worst }
}
