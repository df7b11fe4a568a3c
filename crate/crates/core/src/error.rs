use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("schedule undefined at m = {0}")]
    ScheduleUndefined(u64),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    /// The mean vector violates `pi * a * mu' Sigma^-1 mu <= p^2`.
    #[error(
        "infeasible limit law: sqrt(pi*a*mu'Sigma^-1 mu)/p = {ratio:.6} exceeds 1 \
         (violated direction Sigma^-1 mu = {witness:?})"
    )]
    Infeasible { ratio: f64, witness: Vec<f64> },

    #[error("limit is the point mass at 0; no density")]
    NoDensity,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient tail data: {0}")]
    InsufficientTailData(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(
        "quadrature did not converge: estimated error {abs_error:e} after {intervals} intervals"
    )]
    Quadrature { abs_error: f64, intervals: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
