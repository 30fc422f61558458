use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("a channel needs at least one Kraus operator")]
    EmptyKraus,

    #[error("eigenvalue iteration did not converge for a {dim}x{dim} matrix")]
    EigenNoConvergence { dim: usize },

    #[error("matrix is singular within tolerance (smallest singular value {smallest:e}, largest {largest:e})")]
    NearSingular { smallest: f64, largest: f64 },

    #[error("subspace is not invariant: Kraus operator {kraus_index} leaks with residual {residual:e}")]
    NotInvariant { kraus_index: usize, residual: f64 },

    #[error("no stationary state found (input is not trace preserving?)")]
    NoStationaryState,

    #[error("generic element draws exhausted after {attempts} attempts: {detail}")]
    RetryExhausted { attempts: usize, detail: String },

    #[error("tolerance inconsistency: {0}")]
    Inconsistency(String),

    #[error("{0} is not an irreducible tensor")]
    NotIrreducible(&'static str),

    #[error("expansion of size {size} exceeds the cap {cap}")]
    ExpansionTooLarge { size: u128, cap: u128 },

    #[error("Cesàro averages did not converge within {n_max} steps (last change {last_change:e})")]
    NoConvergence { n_max: usize, last_change: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),
}
