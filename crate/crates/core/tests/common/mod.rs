//! Randomized property checks shared by the proptest suite and the
//! acceptance runner. Each returns the worst violation for one seed.
#![allow(dead_code)]

use cssep::linalg::{self, CMat, CVec, RMat, RVec};
use cssep::reducibility::{find_reduction, ReductionResult};
use cssep::{random, states, structured, tensors, Complex64, DensityMatrix};
use rand::Rng;

fn subsets(d: usize) -> Vec<Vec<usize>> {
    (1..(1usize << d) - 1).map(|mask| (0..d).filter(|&p| mask >> p & 1 == 1).collect()).collect()
}

/// Every proper partial trace of a random S-separable state is CS.
pub fn partial_trace_cs(seed: u64) -> f64 {
    let mut rng = random::rng(seed);
    let n = rng.random_range(2..=4);
    let d = rng.random_range(2..=4);
    let k = rng.random_range(1..=6);
    let rho = random::s_separable(n, d, k, &mut rng).state;
    subsets(d)
        .iter()
        .map(|kset| states::cs_deviation(&states::partial_trace(&rho, kset).unwrap()))
        .fold(0.0, f64::max)
}

fn random_non_cs(n: usize, d: usize, rng: &mut random::Rng64) -> DensityMatrix {
    // product of distinct real local vectors, mixed
    let dim = n.pow(d as u32);
    let mut m = CMat::zeros(dim, dim);
    for _ in 0..3 {
        let mut v = RVec::from_element(1, 1.0);
        for _ in 0..d {
            v = v.kronecker(&random::unit_vector(n, rng));
        }
        m += states::real_projector(&v);
    }
    DensityMatrix::new(m, vec![n; d]).unwrap()
}

/// is_cs agrees on ρ and A^{⊗d}ρ(A^{⊗d})ᵀ; returns 1 on disagreement.
pub fn rilo_preserves_cs(seed: u64) -> f64 {
    let mut rng = random::rng(seed);
    let n = rng.random_range(2..=4);
    let d = rng.random_range(2..=3);
    let rho = if rng.random_bool(0.5) {
        random::s_separable(n, d, rng.random_range(1..=5), &mut rng).state
    } else {
        random_non_cs(n, d, &mut rng)
    };
    let a = random::invertible(n, &mut rng);
    let out = states::apply_rilo(&rho, &a).unwrap();
    let tol = 1e-9;
    if states::is_cs(&rho, tol) != states::is_cs(&out, tol) {
        return 1.0;
    }
    if states::is_cs(&rho, tol) {
        states::cs_deviation(&out)
    } else {
        0.0
    }
}

fn random_cs_state(n: usize, d: usize, rng: &mut random::Rng64) -> DensityMatrix {
    let base = random::s_separable(n, d, rng.random_range(1..=8), rng).state;
    match rng.random_range(0..3) {
        0 => base,
        1 => states::apply_rilo(&base, &random::invertible(n, rng)).unwrap(),
        _ if n == 2 && d >= 2 => {
            // PSD Hankel from a random nonnegative measure plus a point at infinity
            let nodes: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let a: Vec<f64> = (0..=2 * d)
                .map(|k| nodes.iter().map(|t| t.powi(k as i32)).sum::<f64>() + if k == 2 * d { 0.7 } else { 0.0 })
                .collect();
            structured::hankel_to_state(&a).unwrap()
        }
        _ => base,
    }
}

/// Range vectors of CS states sit in the symmetric space (d = 2) or in the
/// cyclic-shift invariant space (d ≥ 3).
pub fn range_in_invariant_space(seed: u64) -> f64 {
    let mut rng = random::rng(seed);
    let n = rng.random_range(2..=4);
    let d = if n == 4 { rng.random_range(2..=3) } else { rng.random_range(2..=4) };
    let rho = random_cs_state(n, d, &mut rng);
    // the columns of ρ span its range; eigenvectors of tiny eigenvalues would
    // only measure eigensolver error
    let m = rho.matrix();
    let scale = m.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    (0..m.ncols())
        .map(|c| {
            let v: CVec = m.column(c).into_owned();
            let p = if d == 2 { tensors::project_symmetric(&v, n, d) } else { tensors::project_periodic(&v, n, d) };
            (p.unwrap() - &v).norm() / scale
        })
        .fold(0.0, f64::max)
}

/// The rank-6 entangled state's range lies in the symmetric space.
pub fn entangled_range_in_sym() -> f64 {
    let rho = cssep::named::build_entangled_rank6(&cssep::named::DEFAULT_SIGMA_WEIGHTS).unwrap().state;
    let basis = states::range_kernel(&rho, 1e-10).range.basis().clone();
    (0..basis.ncols())
        .map(|c| {
            let v: CVec = basis.column(c).into_owned();
            (tensors::project_symmetric(&v, 4, 2).unwrap() - &v).norm()
        })
        .fold(0.0, f64::max)
}

fn complex_unit(n: usize, rng: &mut random::Rng64) -> CVec {
    let re = random::gaussian_vector(n, rng);
    let im = random::gaussian_vector(n, rng);
    let v = CVec::from_fn(n, |i, _| Complex64::new(re[i], im[i]));
    let s = v.norm();
    v / Complex64::new(s, 0.0)
}

/// For a bipartite CS ρ with ⟨b,c|ρ|b,c⟩ = 0, the conjugated product
/// vectors are also in the kernel.
pub fn conjugate_kernel_closure(seed: u64) -> f64 {
    let mut rng = random::rng(seed);
    let n = rng.random_range(3..=5);
    let k = rng.random_range(1..n);
    let rho = random::s_separable(n, 2, k, &mut rng).state;
    let b = complex_unit(n, &mut rng);
    // c from the kernel of (⟨b|⊗I)ρ(|b⟩⊗I)
    let bi = CMat::from_fn(n * n, n, |r, c| if r % n == c { b[r / n] } else { Complex64::new(0.0, 0.0) });
    let mb = bi.adjoint() * rho.matrix() * &bi;
    let ker = linalg::nullspace(&mb, 1e-12);
    let coeffs = complex_unit(ker.ncols(), &mut rng);
    let c = &ker * coeffs;
    let c = &c / Complex64::new(c.norm(), 0.0);
    let scale = linalg::max_abs(rho.matrix());
    let expect = |x: &CVec, y: &CVec| rho.expectation(&x.kronecker(y)).abs() / scale;
    if expect(&b, &c) >= 1e-12 {
        return f64::INFINITY;
    }
    let (bs, cs) = (b.conjugate(), c.conjugate());
    [expect(&bs, &c), expect(&b, &cs), expect(&bs, &cs)].into_iter().fold(0.0, f64::max)
}

fn reducible(rho: &DensityMatrix) -> bool {
    matches!(find_reduction(rho, 1e-10).unwrap(), ReductionResult::Reducible(_))
}

/// For d ≥ 3, find_reduction agrees on ρ and on every partial trace leaving
/// at least two parties; returns 1 on disagreement.
pub fn reduced_state_reducibility(seed: u64) -> f64 {
    let mut rng = random::rng(seed);
    let n = rng.random_range(2..=3);
    let d = rng.random_range(3..=4);
    let k = rng.random_range(1..=n + 3);
    // splitting nearly parallel directions is ill-conditioned (error grows
    // like cond^{2d}), so the local vectors stay close to an orthogonal frame
    let q = random::orthogonal(n, &mut rng);
    let locals: Vec<RVec> = (0..k)
        .map(|i| {
            let base = if i < n { q.column(i).into_owned() } else { random::unit_vector(n, &mut rng) };
            base + random::gaussian_vector(n, &mut rng) * 0.2
        })
        .collect();
    let rho = random::mixture(&locals, &random::weights(k, &mut rng), d);
    let full = reducible(&rho);
    for kset in subsets(d).into_iter().filter(|s| s.len() >= 1 && d - s.len() >= 2) {
        let reduced = states::partial_trace(&rho, &kset).unwrap();
        if reducible(&reduced) != full {
            return 1.0;
        }
    }
    0.0
}

/// A PSD matrix with a vanishing diagonal entry has a vanishing row.
pub fn zero_diagonal_row(seed: u64) -> f64 {
    let mut rng = random::rng(seed);
    let n = rng.random_range(3..=8);
    let r = rng.random_range(1..n);
    let g = RMat::from_fn(n, r, |_, _| rng.random_range(-1.0..1.0));
    let m = &g * g.transpose();
    let kvec = linalg::nullspace(&g.transpose(), 1e-12).column(0).into_owned();
    let i = rng.random_range(0..n);
    // Householder reflection sending the kernel vector to eᵢ
    let mut e = RVec::zeros(n);
    e[i] = 1.0;
    let w = &kvec - &e;
    let h = if w.norm() < 1e-14 { RMat::identity(n, n) } else { RMat::identity(n, n) - &w * w.transpose() * (2.0 / w.norm_squared()) };
    let mh = &h * m * &h;
    if mh[(i, i)].abs() > 1e-12 {
        return f64::INFINITY;
    }
    (0..n).map(|j| mh[(i, j)].abs()).fold(0.0, f64::max)
}
