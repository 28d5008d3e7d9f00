use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is singular or not normalizable: {0}")]
    Singular(String),

    #[error("eigenvalue iteration did not converge after {iterations} iterations (dimension {dim})")]
    NoConvergence { dim: usize, iterations: usize },

    #[error("ping-pong certificate failed: {0}")]
    Certificate(String),

    #[error("reduction did not terminate within {cap} steps")]
    ReductionCap { cap: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
