use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("{what} is not positive definite")]
    NotPositiveDefinite { what: String },

    #[error("eigenvalues of JM could not be grouped into +/- pairs: {0}")]
    PairingFailure(String),

    #[error("eliminated block is numerically singular (condition number {condition:e})")]
    SingularBlock { condition: f64 },

    #[error("matrix is not symplectic (residual {residual:e})")]
    NotSymplectic { residual: f64 },

    #[error("state violates the quantum condition (max symplectic eigenvalue of M = {max_eigenvalue})")]
    InvalidState { max_eigenvalue: f64 },

    #[error("epsilon entries must be finite and positive, got {0:?}")]
    InvalidEpsilon(Vec<f64>),

    #[error("lambda must lie in (0, 1], got {0}")]
    InvalidLambda(f64),

    #[error("{param}[{index}] = {value} outside [{lower}, {upper}]")]
    RangeViolation {
        param: &'static str,
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("state is not in the diagonal-coupling normal form (off-pattern residual {residual:e})")]
    NotApplicable { residual: f64 },

    #[error("mode pair {pair} is out of range (1..={pairs})")]
    InvalidPair { pair: usize, pairs: usize },

    #[error("point (a, b) = ({a}, {b}) for pair {pair} is infeasible")]
    InfeasiblePoint { pair: usize, a: f64, b: f64 },

    #[error("sample count must be at least 1, got {0}")]
    InvalidSampleCount(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
