//! Error type shared across the library.

use thiserror::Error;

/// Failure modes surfaced by the library.
#[derive(Debug, Error)]
pub enum IsorecError {
    /// Operator coefficients outside the supported family (NaN, infinite).
    #[error("invalid operator coefficients: {0}")]
    InvalidCoefficients(String),

    /// An argument left the domain where the requested quantity is defined,
    /// e.g. an interval length at or beyond the profile horizon.
    #[error("argument out of range: {0}")]
    OutOfRange(String),

    /// Input left the domain of the requested quantity: a negative kernel
    /// argument, a malformed body (non-convex polygon, empty box), a
    /// dimension mismatch.
    #[error("invalid domain: {0}")]
    Domain(String),

    /// A node-count request below the minimum the construction supports.
    #[error("node budget too small: {0}")]
    NTooSmall(String),

    /// A parameter outside its documented range (dimension, ratio, seed...).
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A certified computation would exceed its sample or subdivision budget.
    #[error("computation budget exceeded: {0}")]
    Budget(String),

    /// The independent numeric oracle failed to converge to tolerance.
    #[error("numeric oracle failure: {0}")]
    OracleFailure(String),

    /// Underlying I/O failure (CLI file handling).
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl IsorecError {
    /// Stable machine-readable tag, used by the CLI for exit codes and
    /// structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            IsorecError::InvalidCoefficients(_) => "invalid_coefficients",
            IsorecError::OutOfRange(_) => "out_of_range",
            IsorecError::Domain(_) => "domain",
            IsorecError::NTooSmall(_) => "n_too_small",
            IsorecError::Parameter(_) => "parameter",
            IsorecError::Budget(_) => "budget",
            IsorecError::OracleFailure(_) => "oracle_failure",
            IsorecError::Io(_) => "io",
        }
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, IsorecError>;
