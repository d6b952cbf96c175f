use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular operator: pivot {pivot:.3e} below tolerance at step {step}")]
    SingularOperator { pivot: f64, step: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("eigenvalue iteration did not converge for dim {0}")]
    EigenFailure(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
