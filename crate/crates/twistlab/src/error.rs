use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid geometry or profile specification.
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    /// A grid is too coarse for the requested operation.
    #[error("under-resolved grid: {msg} (need at least n_points = {min_n})")]
    UnderResolved { msg: String, min_n: usize },

    /// An iterative solver failed to converge.
    #[error("solver failure: {msg}; residuals {residuals:?}")]
    SolverFailure { msg: String, residuals: Vec<f64> },

    /// A resolvent or Krein denominator is too close to singular.
    #[error("near-singular operation: {0}")]
    NearSingular(String),

    /// Configuration rejected; every violation is listed.
    #[error("invalid config:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
