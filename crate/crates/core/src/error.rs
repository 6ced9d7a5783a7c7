use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (minimum eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("state has zero trace")]
    ZeroTrace,
    #[error("state is not completely symmetric (deviation {0:.3e})")]
    NotCs(f64),
    #[error("dense size {0} exceeds the limit of 4096")]
    TooLarge(usize),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("condition violated: {0}")]
    Condition(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
