use cssep::engine::{classify, Verdict};
use cssep::random;

fn run(n: usize, d: usize, k: usize, count: usize, seed: u64) {
    let mut rng = random::rng(seed);
    for i in 0..count {
        let m = random::s_separable(n, d, k, &mut rng);
        let c = classify(&m.state).unwrap_or_else(|e| panic!("n={n} d={d} k={k} instance {i}: {e:?}"));
        assert_eq!(c.verdict, Verdict::Separable, "n={n} d={d} k={k} instance {i}: {:?}", c.evidence);
        let err = (c.reconstruct().unwrap_or_else(|| panic!("n={n} d={d} k={k} instance {i}: {c:?}")) - m.state.real_matrix()).norm();
        assert!(err < 1e-8, "n={n} d={d} k={k} instance {i}: error {err:.3e}");
    }
}

#[test]
fn multi_qubit() {
    for d in 2..=4 {
        for k in 1..=6 {
            run(2, d, k, 20, 100 + d as u64 * 10 + k as u64);
        }
    }
}

#[test]
fn two_qutrit() {
    for k in 1..=7 {
        run(3, 2, k, 20, 200 + k as u64);
    }
}

#[test]
fn four_by_four_low_rank() {
    for k in 1..=5 {
        run(4, 2, k, 20, 300 + k as u64);
    }
}

#[test]
fn rank_n_and_n_plus_one() {
    for n in 2..=5 {
        run(n, 2, n, 20, 400 + n as u64);
        run(n, 2, n + 1, 20, 500 + n as u64);
    }
}

