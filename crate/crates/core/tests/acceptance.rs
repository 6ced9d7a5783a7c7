//! End-to-end acceptance run: one PASS/FAIL line per criterion.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;

use cssep::engine::{classify, Rule, Verdict};
use cssep::gme::{self, GmeOptions};
use cssep::linalg::{self, RMat, RVec};
use cssep::named::{self, DEFAULT_SIGMA_WEIGHTS};
use cssep::product::{bipartite, symmetric_product_vectors, SearchOptions};
use cssep::structured::{self, Node, VandermondeTerm};
use cssep::{random, states, DensityMatrix};
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn real_range(rho: &DensityMatrix) -> RMat {
    states::range_kernel(rho, 1e-10).range.real_basis(1e-9).expect("real range")
}

// ---------- product-vector oracle: dense angle grid + Gauss-Newton ----------

fn kernel_forms(range: &RMat) -> Vec<RMat> {
    let kernel = linalg::nullspace(&range.transpose(), 1e-10);
    (0..kernel.ncols())
        .map(|c| {
            let k = RMat::from_fn(4, 4, |i, j| kernel[(i * 4 + j, c)]);
            (&k + k.transpose()) * 0.5
        })
        .collect()
}

fn form_residual(forms: &[RMat], x: &RVec) -> f64 {
    forms.iter().map(|k| x.dot(&(k * x)).powi(2)).sum::<f64>().sqrt()
}

fn newton_on_sphere(forms: &[RMat], x0: &RVec) -> RVec {
    let mut x = x0.normalize();
    for _ in 0..60 {
        let m = forms.len();
        let mut jac = RMat::zeros(m + 1, 4);
        let mut r = RVec::zeros(m + 1);
        for (i, k) in forms.iter().enumerate() {
            let kx = k * &x;
            r[i] = x.dot(&kx);
            jac.row_mut(i).copy_from(&(kx * 2.0).transpose());
        }
        r[m] = x.norm_squared() - 1.0;
        jac.row_mut(m).copy_from(&(&x * 2.0).transpose());
        let Ok(step) = jac.svd(true, true).solve(&r, 1e-14) else { break };
        x -= &step;
        if step.norm() < 1e-16 {
            break;
        }
    }
    x.normalize()
}

/// All real x (up to sign) with x⊗x in the range, from 10⁶ grid samples.
fn grid_product_vectors(range: &RMat) -> Vec<RVec> {
    let forms = kernel_forms(range);
    let steps = 100usize;
    let pi = std::f64::consts::PI;
    let mut seeds: Vec<(f64, RVec)> = Vec::new();
    for i in 0..steps {
        let t1 = pi * (i as f64 + 0.5) / steps as f64;
        for j in 0..steps {
            let t2 = pi * (j as f64 + 0.5) / steps as f64;
            for k in 0..steps {
                let t3 = 2.0 * pi * k as f64 / steps as f64;
                let x = RVec::from_vec(vec![t1.cos(), t1.sin() * t2.cos(), t1.sin() * t2.sin() * t3.cos(), t1.sin() * t2.sin() * t3.sin()]);
                let r = form_residual(&forms, &x);
                if r < 0.05 {
                    seeds.push((r, x));
                }
            }
        }
    }
    seeds.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut reps: Vec<RVec> = Vec::new();
    for (_, x) in seeds {
        if reps.iter().any(|y| linalg::line_angle(&x, y) < 0.15) {
            continue;
        }
        reps.push(x);
    }
    let mut found: Vec<RVec> = Vec::new();
    for x in reps {
        let y = newton_on_sphere(&forms, &x);
        if form_residual(&forms, &y) < 1e-12 && !found.iter().any(|z| linalg::line_angle(&y, z) < 1e-6) {
            found.push(y);
        }
    }
    found
}

fn criterion_1() -> Outcome {
    let sigma = named::build_sigma(&DEFAULT_SIGMA_WEIGHTS).map_err(|e| e.to_string())?;
    let range = real_range(&sigma.state);
    let search = symmetric_product_vectors(&range, 4, 2, &SearchOptions::default()).map_err(|e| e.to_string())?;
    ensure(search.complete, || format!("search not certified: {:?}", search.transcript))?;
    ensure(search.vectors.len() == 8, || format!("{} product vectors", search.vectors.len()))?;
    let locals = named::sigma_locals();
    let mut worst: f64 = 0.0;
    for x in &locals[4..] {
        let a = search.vectors.iter().map(|p| linalg::line_angle(&p.vector(), x)).fold(f64::INFINITY, f64::min);
        worst = worst.max(a);
    }
    ensure(worst < 1e-8, || format!("x4..x7 angular error {worst:.2e}"))?;
    let oracle = grid_product_vectors(&range);
    ensure(oracle.len() == 8, || format!("grid oracle found {} vectors", oracle.len()))?;
    let mut cross: f64 = 0.0;
    for y in &oracle {
        let a = search.vectors.iter().map(|p| linalg::line_angle(&p.vector(), y)).fold(f64::INFINITY, f64::min);
        cross = cross.max(a);
    }
    ensure(cross < 1e-8, || format!("oracle disagreement {cross:.2e}"))?;
    Ok(format!("8 vectors, x4..x7 within {worst:.1e}, grid oracle 8 vectors within {cross:.1e}"))
}

fn criterion_2() -> Outcome {
    let rho = named::build_entangled_rank6(&DEFAULT_SIGMA_WEIGHTS).map_err(|e| e.to_string())?.state;
    let rank = rho.rank(1e-10);
    ensure(rank == 6, || format!("rank {rank}"))?;
    ensure(states::is_cs(&rho, 1e-10), || "not CS".into())?;
    ensure(states::is_ppt(&rho, 1e-10), || "not PPT".into())?;
    let c = classify(&rho).map_err(|e| e.to_string())?;
    ensure(c.verdict == Verdict::Entangled && c.rule == Rule::RankSixEmptyProductSet, || format!("{:?} via {}", c.verdict, c.rule))?;
    let search = c.evidence.search.as_ref().ok_or("no enumeration transcript")?;
    ensure(search.real_candidates == 0 && search.paths > 0, || format!("transcript {search:?}"))?;
    let edge = named::check_edge_extreme(&rho).map_err(|e| e.to_string())?;
    ensure(edge.edge && edge.extreme && edge.certified, || format!("{edge:?}"))?;
    Ok(format!("rank 6, CS, PPT, entangled via \"{}\" ({} paths, 0 real), edge and extreme", c.rule, search.paths))
}

fn criterion_3() -> Outcome {
    let (a, b, c, d, eps) = (1.0, 1.0, 1.0, 1.0, 1e-2);
    let bl = named::build_blokovi(a, b, c, d, eps).map_err(|e| e.to_string())?;
    let ra = bl.alpha.rank(1e-10);
    ensure(ra == 4, || format!("rank α = {ra}"))?;
    let pt = states::partial_transpose(&bl.alpha, &[0]).map_err(|e| e.to_string())?;
    ensure(pt == *bl.alpha.matrix(), || "α^{T1} ≠ α".into())?;
    let rr = bl.rho.rank(1e-10);
    ensure(rr == 6, || format!("rank ρ = {rr}"))?;
    let span = bl.rows.transpose();
    let joint = RMat::from_columns(&[real_range(&bl.rho).column_iter().map(|c| c.into_owned()).collect::<Vec<_>>(), span.column_iter().map(|c| c.into_owned()).collect()].concat());
    ensure(linalg::rank(&joint, 1e-9) == 6, || "row span differs from the range".into())?;
    let expected = RVec::from_vec(vec![0.0, 1.0, 1.0 + d]).kronecker(&RVec::from_vec(vec![1.0, 0.0, 0.0, -1.0]));
    let g = |i: usize| bl.rows.row(i - 1).transpose();
    let identity = (g(3) - g(5) + g(4) - g(6) - &expected).norm();
    ensure(identity < 1e-10, || format!("γ3−γ5+γ4−γ6 differs by {identity:.2e}"))?;
    let s = bipartite::bipartite_product_vectors(&span, 3, 4, 11, 300);
    ensure(!s.found.is_empty(), || format!("no product vector, best residual {:.2e}", s.best_residual))?;
    // the search lands on a family x ⊗ y with a fixed y; with y pinned, the
    // admissible x form a linear space, which must contain the factor
    let y_expected = RVec::from_vec(vec![1.0, 0.0, 0.0, -1.0]);
    let x_expected = RVec::from_vec(vec![0.0, 1.0, 1.0 + d]);
    let hit = s
        .found
        .iter()
        .map(|p| RVec::from_column_slice(&p.y))
        .find(|y| linalg::line_angle(y, &y_expected) < 1e-10)
        .ok_or_else(|| format!("{} product vectors, none with second factor ∝ |1⟩−|4⟩", s.found.len()))?;
    let kernel = linalg::nullspace(&span.transpose(), 1e-10);
    let lift = RMat::from_fn(12, 3, |r, c| if r / 4 == c { hit[r % 4] } else { 0.0 });
    let xs = linalg::nullspace(&(kernel.transpose() * lift), 1e-10);
    let miss = (&x_expected - &xs * (xs.transpose() * &x_expected)).norm() / x_expected.norm();
    ensure(miss < 1e-10, || format!("factor (|2⟩+(1+d)|3⟩) outside the admissible first factors by {miss:.2e}"))?;
    Ok(format!(
        "rank α 4, α^T1 = α exactly, rank ρ 6, product vectors x⊗(|1⟩−|4⟩) with x in a {}-dim space containing |2⟩+(1+d)|3⟩ (residual {miss:.1e})",
        xs.ncols()
    ))
}

fn regime(n: usize, d: usize, k: usize, count: usize, seed: u64) -> Result<f64, String> {
    let mut rng = random::rng(seed);
    let mut worst: f64 = 0.0;
    for i in 0..count {
        let m = random::s_separable(n, d, k, &mut rng);
        let c = classify(&m.state).map_err(|e| format!("n={n} d={d} k={k} #{i}: {e}"))?;
        if c.verdict != Verdict::Separable {
            return Err(format!("n={n} d={d} k={k} #{i}: {:?} via {}", c.verdict, c.rule));
        }
        let rec = c.reconstruct().ok_or_else(|| format!("n={n} d={d} k={k} #{i}: no decomposition"))?;
        if c.decomposition.as_ref().is_some_and(|t| t.iter().any(|t| !(t.weight > 0.0))) {
            return Err(format!("n={n} d={d} k={k} #{i}: nonpositive weight"));
        }
        worst = worst.max((rec - m.state.real_matrix()).norm());
    }
    Ok(worst)
}

fn criterion_4() -> Outcome {
    let mut cases = Vec::new();
    for d in 2..=4 {
        for k in 1..=6 {
            cases.push((2, d, k));
        }
    }
    for k in 1..=6 {
        cases.push((3, 2, k));
    }
    for k in 1..=5 {
        cases.push((4, 2, k));
    }
    for n in 2..=5 {
        cases.push((n, 2, n));
        cases.push((n, 2, n + 1));
    }
    let mut worst: f64 = 0.0;
    for (i, &(n, d, k)) in cases.iter().enumerate() {
        worst = worst.max(regime(n, d, k, 100, 9000 + i as u64)?);
    }
    ensure(worst < 1e-8, || format!("reconstruction error {worst:.2e}"))?;
    Ok(format!("{} regimes × 100 separable, worst reconstruction {worst:.1e}", cases.len()))
}

fn criterion_5() -> Outcome {
    let suites: [(&str, fn(u64) -> f64, u64); 6] = [
        ("partial trace keeps CS", common::partial_trace_cs, 100),
        ("RILO keeps CS verdict", common::rilo_preserves_cs, 100),
        ("range in Sym / F", common::range_in_invariant_space, 100),
        ("conjugate kernel closure", common::conjugate_kernel_closure, 100),
        ("reduced-state reducibility", common::reduced_state_reducibility, 50),
        ("zero diagonal, zero row", common::zero_diagonal_row, 100),
    ];
    let mut parts = Vec::new();
    for (name, f, trials) in suites {
        let worst = (0..trials).map(|s| f(50_000 + s)).fold(0.0, f64::max);
        ensure(worst < 1e-9, || format!("{name}: violation {worst:.2e}"))?;
        parts.push(format!("{name} {worst:.0e}"));
    }
    let ent = common::entangled_range_in_sym();
    ensure(ent < 1e-9, || format!("entangled range leaves Sym by {ent:.2e}"))?;
    Ok(parts.join(", "))
}

// ---------- GME oracles ----------

fn quad(m: &RMat, a: &RVec) -> f64 {
    let v = a.kronecker(a);
    v.dot(&(m * &v))
}

fn angles_to_vec(t: &[f64; 3]) -> RVec {
    let (s1, c1) = t[0].sin_cos();
    let (s2, c2) = t[1].sin_cos();
    let (s3, c3) = t[2].sin_cos();
    RVec::from_vec(vec![c1, s1 * c2, s1 * s2 * c3, s1 * s2 * s3])
}

/// max over nonnegative unit a ∈ R⁴ of ⟨aa|M|aa⟩: 80³ angle grid, then
/// compass search from the best 20 cells.
fn gme_grid_oracle(m: &RMat) -> f64 {
    let steps = 80;
    let h = std::f64::consts::FRAC_PI_2 / steps as f64;
    let mut cells: Vec<(f64, [f64; 3])> = Vec::new();
    for i in 0..=steps {
        for j in 0..=steps {
            for k in 0..=steps {
                let t = [i as f64 * h, j as f64 * h, k as f64 * h];
                cells.push((quad(m, &angles_to_vec(&t)), t));
            }
        }
    }
    cells.sort_by(|a, b| b.0.total_cmp(&a.0));
    let clamp = |x: f64| x.clamp(0.0, std::f64::consts::FRAC_PI_2);
    let mut best = f64::NEG_INFINITY;
    for (mut f, mut t) in cells.into_iter().take(20) {
        let mut step = h;
        while step > 1e-12 {
            let mut moved = false;
            for axis in 0..3 {
                for sgn in [-1.0, 1.0] {
                    let mut u = t;
                    u[axis] = clamp(u[axis] + sgn * step);
                    let g = quad(m, &angles_to_vec(&u));
                    if g > f {
                        f = g;
                        t = u;
                        moved = true;
                    }
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        best = best.max(f);
    }
    best
}

/// max over unit A, B of ⟨A⊗B|M|A⊗B⟩ by alternating top eigenvectors.
fn alternating_oracle(m: &RMat, n: usize, seed: u64) -> f64 {
    let mut rng = random::rng(seed);
    let partial = |b: &RVec, left: bool| {
        RMat::from_fn(n, n, |i, j| {
            let mut s = 0.0;
            for k in 0..n {
                for l in 0..n {
                    let (r, c) = if left { (i * n + k, j * n + l) } else { (k * n + i, l * n + j) };
                    s += b[k] * m[(r, c)] * b[l];
                }
            }
            s
        })
    };
    let top = |x: &RMat| {
        let (vals, vecs) = linalg::symmetric_eigen(x);
        (vals[n - 1], vecs.column(n - 1).into_owned())
    };
    let mut best: f64 = 0.0;
    for _ in 0..20 {
        let mut b = random::unit_vector(n, &mut rng);
        let mut val = 0.0;
        for _ in 0..2000 {
            let (_, a) = top(&partial(&b, true));
            let (v, nb) = top(&partial(&a, false));
            let done = (v - val).abs() < 1e-15;
            val = v;
            b = nb;
            if done {
                break;
            }
        }
        best = best.max(val);
    }
    best
}

fn random_nonnegative_symmetric(n: usize, rng: &mut random::Rng64) -> DensityMatrix {
    let mut psi = RMat::from_fn(n, n, |_, _| rng.random_range(0.0..1.0));
    psi = &psi + psi.transpose();
    let v = RVec::from_column_slice(psi.as_slice()).normalize();
    let mut m = &v * v.transpose() * rng.random_range(0.3..1.0);
    for _ in 0..2 {
        let x = RVec::from_fn(n, |_, _| rng.random_range(0.0..1.0)).normalize();
        let xx = x.kronecker(&x);
        m += &xx * xx.transpose() * rng.random_range(0.0..0.5);
    }
    DensityMatrix::from_real(&m, vec![n, n]).unwrap().normalized()
}

fn criterion_6() -> Outcome {
    let (rec, st) = gme::conditioned_state().map_err(|e| e.to_string())?;
    let cf = gme::gme_closed_form(&rec).map_err(|e| e.to_string())?;
    let run = gme::gme_power_iteration(&st, &GmeOptions::default()).map_err(|e| e.to_string())?;
    let diff = (run.mu - cf.mu).abs();
    ensure(diff < 1e-6, || format!("power iteration {} vs closed form {}", run.mu, cf.mu))?;
    ensure(gme::verify_kkt(&st, &[0.5; 4], cf.mu, 1e-8), || "KKT fails at the uniform vector".into())?;
    let grid = gme_grid_oracle(&st.real_matrix());
    ensure((grid - cf.mu).abs() < 1e-5, || format!("grid oracle {grid} vs {}", cf.mu))?;
    let mut rng = random::rng(606);
    let mut worst: f64 = 0.0;
    for i in 0..6 {
        let n = 2 + i % 2;
        let rho = random_nonnegative_symmetric(n, &mut rng);
        let one = gme::gme_power_iteration(&rho, &GmeOptions::default()).map_err(|e| e.to_string())?;
        let two_state = gme::two_copy(&rho).map_err(|e| e.to_string())?;
        let two = gme::gme_power_iteration(&two_state, &GmeOptions::default()).map_err(|e| e.to_string())?;
        let alt_one = alternating_oracle(&rho.real_matrix(), n, 1 + i as u64);
        let alt_two = alternating_oracle(&two_state.real_matrix(), n * n, 100 + i as u64);
        let g_alt = -alt_one.log2();
        let g2_alt = -alt_two.log2();
        let dev = (two.gme - 2.0 * one.gme).abs().max((g_alt - one.gme).abs()).max((g2_alt - two.gme).abs());
        worst = worst.max(dev);
    }
    ensure(worst < 1e-5, || format!("two-copy additivity deviation {worst:.2e}"))?;
    Ok(format!("μ = {:.9} (closed form {:.9}), grid {:.9}, KKT ok, additivity within {worst:.1e}", run.mu, cf.mu, grid))
}

fn hankel_case(nodes: &[Node], weights: &[f64], n: usize) -> Result<(f64, f64), String> {
    let planted: Vec<VandermondeTerm> = nodes.iter().zip(weights).map(|(&node, &weight)| VandermondeTerm { weight, node }).collect();
    let m = structured::vandermonde_sum(&planted, n);
    let terms = structured::hankel_psd_decompose(&m).map_err(|e| e.to_string())?;
    if terms.len() != planted.len() {
        return Err(format!("{} terms recovered, {} planted", terms.len(), planted.len()));
    }
    let mut node_err: f64 = 0.0;
    for p in &planted {
        let e = terms
            .iter()
            .map(|t| match (t.node, p.node) {
                (Node::Finite(a), Node::Finite(b)) => (a - b).abs(),
                (Node::Infinity, Node::Infinity) => 0.0,
                _ => f64::INFINITY,
            })
            .fold(f64::INFINITY, f64::min);
        node_err = node_err.max(e);
    }
    let rec = (structured::vandermonde_sum(&terms, n) - &m).norm();
    Ok((node_err, rec))
}

fn criterion_7() -> Outcome {
    let mut rng = random::rng(707);
    let mut worst_node: f64 = 0.0;
    let mut worst_rec: f64 = 0.0;
    let mut count = 0;
    for r in 1..=4usize {
        for n in (r + 1).max(3)..=8 {
            let nodes: Vec<f64> = loop {
                let mut v: Vec<f64> = (0..r).map(|_| rng.random_range(-1.5..1.5)).collect();
                v.sort_by(|a, b| a.total_cmp(b));
                if v.windows(2).all(|w| w[1] - w[0] > 0.4) {
                    break v;
                }
            };
            let weights: Vec<f64> = (0..r).map(|_| rng.random_range(0.5..1.5)).collect();
            let mut all: Vec<Node> = nodes.iter().map(|&t| Node::Finite(t)).collect();
            let mut w = weights.clone();
            if r == 3 && n == 6 {
                all.push(Node::Infinity);
                w.push(0.8);
            }
            let (e, rec) = hankel_case(&all, &w, n).map_err(|e| format!("r={r} n={n}: {e}"))?;
            worst_node = worst_node.max(e);
            worst_rec = worst_rec.max(rec);
            count += 1;
        }
    }
    ensure(worst_node < 1e-7 && worst_rec < 1e-8, || format!("node error {worst_node:.2e}, reconstruction {worst_rec:.2e}"))?;
    // congruence: moments → state → coefficient matrix is the Hankel matrix again
    let mut worst_cong: f64 = 0.0;
    for d in 2..=6usize {
        let t: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a: Vec<f64> = (0..=2 * d).map(|k| t.iter().map(|x| x.powi(k as i32)).sum::<f64>() + if k == 2 * d { 0.5 } else { 0.0 }).collect();
        let st = structured::hankel_to_state(&a).map_err(|e| e.to_string())?;
        let dm = structured::state_to_dicke_matrix(&st).map_err(|e| e.to_string())?;
        let h = dm.coefficients();
        let target = structured::hankel_matrix(&a).map_err(|e| e.to_string())?;
        let mut dev = (&h - &target).abs().max();
        for i in 0..=d {
            for j in 0..=d {
                if i + j <= d {
                    dev = dev.max((h[(i, j)] - h[(0, i + j)]).abs());
                } else {
                    dev = dev.max((h[(i, j)] - h[(i + j - d, d)]).abs());
                }
            }
        }
        ensure(dm.flags.hankel, || format!("d={d}: Hankel flag not set"))?;
        worst_cong = worst_cong.max(dev);
    }
    ensure(worst_cong < 1e-12, || format!("congruence deviation {worst_cong:.2e}"))?;
    Ok(format!("{count} planted instances (one with a node at infinity), node error {worst_node:.1e}, reconstruction {worst_rec:.1e}, congruence {worst_cong:.1e}"))
}

fn criterion_8() -> Outcome {
    let a = structured::toeplitz_scan(1000, 3, 2024).map_err(|e| e.to_string())?;
    let b = structured::toeplitz_scan(1000, 3, 2024).map_err(|e| e.to_string())?;
    ensure(a.to_json_lines() == b.to_json_lines() && a.summary_json() == b.summary_json(), || "report not deterministic".into())?;
    if a.counts.entangled > 0 {
        let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("toeplitz-entangled.jsonl");
        let lines: Vec<String> = a.entangled().map(|r| serde_json::to_string(r).unwrap()).collect();
        let _ = std::fs::write(&path, lines.join("\n"));
        return Err(format!("{} entangled records written to {}", a.counts.entangled, path.display()));
    }
    Ok(format!("1000 samples: {} separable, {} undetermined, 0 entangled, deterministic", a.counts.separable, a.counts.undetermined))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 product vectors in range(σ)", criterion_1),
        ("2 rank-6 entanglement certificate", criterion_2),
        ("3 two-qutrit edge counterexample", criterion_3),
        ("4 constructive separability regimes", criterion_4),
        ("5 property suites", criterion_5),
        ("6 geometric measure", criterion_6),
        ("7 Hankel decomposition", criterion_7),
        ("8 Toeplitz scan", criterion_8),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = std::time::Instant::now();
        let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match out {
            Ok(detail) => println!("PASS criterion {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
