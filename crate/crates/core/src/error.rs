//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Adaptive quadrature exhausted its bisection budget before reaching the
    /// requested tolerance.
    #[error("quadrature did not converge over [{a}, {b}] (best error {err:.3e})")]
    QuadratureNoConvergence { a: f64, b: f64, err: f64 },

    /// A numeric decision procedure could not distinguish the two outcomes.
    #[error("inconclusive numeric test: {0}")]
    Inconclusive(String),

    /// A divergent quantity was requested as a finite number.
    #[error("quantity diverges: {0}")]
    Divergent(String),

    /// The requested statistic is not registered with the harness.
    #[error("unknown statistic: {0}")]
    UnknownStatistic(String),

    /// The requested verification suite does not exist.
    #[error("unknown suite: {0}")]
    UnknownSuite(String),

    /// A query fell below the resolution the object was built with.
    #[error("query below resolution floor: {0}")]
    BelowResolution(String),

    /// (De)serialization failure for one of the artifact formats.
    #[error("artifact format error: {0}")]
    Format(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
