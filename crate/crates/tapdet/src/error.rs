//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by state construction, channel maps, and estimators.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument violates a documented precondition (validation failure).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A covariance matrix does not have the structure an operation requires.
    #[error("covariance structure: {0}")]
    Structure(String),

    /// A state fails the physicality check (symplectic eigenvalue below 1/2).
    #[error("non-physical state: {0}")]
    NonPhysical(String),

    /// A numerical guard tripped (residue, convergence, singularity).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An infinite series failed to reach its truncation target.
    #[error("truncation failure: {0}")]
    Truncation(String),

    /// A Monte Carlo estimate could not be formed (e.g. every run censored).
    #[error("estimation failure: {0}")]
    Estimation(String),
}

impl Error {
    /// True for input-validation errors (CLI exit code 2); the remaining
    /// variants are numeric failures (exit code 3).
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::InvalidArgument(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
