//! Error type shared across the solver library.

use thiserror::Error;

/// Errors produced by mesh construction, assembly, decomposition and solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A vector or matrix had the wrong size.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A linear solve could not be completed (factorization breakdown,
    /// iteration cap, or non-finite values).
    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    /// Newton-based inner solver was asked to run on an objective
    /// without second derivatives.
    #[error("objective does not provide a Hessian")]
    HessianUnavailable,

    /// Every subdomain solve in a Schwarz sweep failed.
    #[error("all subdomain solves failed")]
    SubdomainSolvesFailed,

    /// A non-finite value appeared during iteration.
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
