//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by numerical routines and model operations.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative scheme failed to reach its tolerance.
    #[error("convergence error: {0}")]
    Convergence(String),

    /// Mismatched dimensions or incompatible shapes.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A matrix factorization failed (after the jitter escalation policy).
    #[error("decomposition error: {0}")]
    Decomposition(String),

    /// A root-finding bracket could not be established.
    #[error("bracket not found: {0}")]
    Bracket(String),

    /// Every optimization restart failed.
    #[error("optimization error: {0}")]
    Optimization(String),

    /// Invalid configuration or input file contents.
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
