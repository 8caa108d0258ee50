use thiserror::Error;

/// Errors raised anywhere in the planning pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("covariance matrix is not positive definite after jitter escalation (dim {dim})")]
    FactorizationFailure { dim: usize },

    #[error("covariance is numerically singular: triangular factor entry {pivot:e} below floor")]
    SingularCovariance { pivot: f64 },

    #[error("duplicate observed location ({col}, {row}) with zero noise variance")]
    DuplicateNoiseless { col: usize, row: usize },

    #[error("grid of {locations} locations exceeds the dense factorization limit of {limit}")]
    GridTooLarge { locations: usize, limit: usize },

    #[error("invalid robot count k={k} for a column of {rows} rows")]
    InvalidArity { k: usize, rows: usize },

    #[error("invalid robot configuration: {0}")]
    InvalidConfig(String),

    #[error("column {col} is past the last column {last}")]
    ColumnOverflow { col: usize, last: usize },

    #[error("search of {leaves} leaves exceeds budget {budget}")]
    BudgetExceeded { leaves: u128, budget: u128 },

    #[error("sufficient condition violated: {0}")]
    ConditionViolated(String),

    #[error("multi-robot bound needs equal normalized length-scales, got {ell1_norm} vs {ell2_norm}")]
    AnisotropyViolated { ell1_norm: f64, ell2_norm: f64 },

    #[error("no unobserved locations remain")]
    EmptyUnobservedSet,

    #[error("field mean is zero; relative error is undefined")]
    ZeroMeanField,

    #[error("grid carries no ground-truth measurements")]
    MissingMeasurements,

    #[error("records describe different instances: {0}")]
    MismatchedInstances(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
