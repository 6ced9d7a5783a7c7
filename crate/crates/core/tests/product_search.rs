use cssep::linalg::{self, RMat, RVec};
use cssep::named::{self, DEFAULT_SIGMA_WEIGHTS};
use cssep::product::{symmetric_product_vectors, SearchOptions};
use cssep::states;

fn real_range(rho: &cssep::DensityMatrix) -> RMat {
    states::range_kernel(rho, 1e-10).range.real_basis(1e-9).unwrap()
}

#[test]
fn sigma_has_eight_product_vectors() {
    let sigma = named::build_sigma(&DEFAULT_SIGMA_WEIGHTS).unwrap();
    let s = symmetric_product_vectors(&real_range(&sigma.state), 4, 2, &SearchOptions::default()).unwrap();
    assert!(s.complete, "{:?}", s.transcript);
    assert_eq!(s.vectors.len(), 8);
    for x in named::sigma_locals() {
        assert!(s.vectors.iter().any(|p| linalg::line_angle(&p.vector(), &x) < 1e-8));
    }
}

#[test]
fn rank_six_range_is_empty() {
    let rho = named::build_entangled_rank6(&DEFAULT_SIGMA_WEIGHTS).unwrap();
    let s = symmetric_product_vectors(&real_range(&rho.state), 4, 2, &SearchOptions::default()).unwrap();
    assert!(s.complete, "{:?}", s.transcript);
    assert!(s.vectors.is_empty());
}

#[test]
fn planted_vectors_three_qubits() {
    let xs = [RVec::from_vec(vec![1.0, 0.3]), RVec::from_vec(vec![-0.4, 1.0])];
    let cols: Vec<RVec> = xs.iter().map(|x| linalg::tensor_power(x, 3)).collect();
    let s = symmetric_product_vectors(&RMat::from_columns(&cols), 2, 3, &SearchOptions::default()).unwrap();
    assert!(s.complete);
    assert_eq!(s.vectors.len(), 2);
}
