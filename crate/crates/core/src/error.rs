use thiserror::Error;

/// Errors raised by the learners, generators and the experiment harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point with norm {norm} lies outside the feasible ball of radius {radius}")]
    Infeasible { norm: f64, radius: f64 },

    #[error("metric matrix is not positive definite")]
    SingularMetric,

    #[error("full-Newton update requires the Hessian of the current loss")]
    MissingHessian,

    #[error("sequence lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
