//! Error type shared across the library.

use thiserror::Error;

/// Errors produced by operator construction, spectral routines, and reports.
#[derive(Debug, Error)]
pub enum ProlateError {
    /// A numeric parameter is outside its admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// A point lies outside the domain it was used in.
    #[error("domain error: {0}")]
    Domain(String),
    /// Pieces of a computation do not fit together (group vs band, basis vs operator).
    #[error("configuration error: {0}")]
    Config(String),
    /// Input data violates a structural requirement (e.g. Hermitian symmetry).
    #[error("validation error: {0}")]
    Validation(String),
    /// A sampling grid is too coarse for the requested construction.
    #[error("resolution error: {0}")]
    Resolution(String),
    /// Vector or matrix sizes do not match.
    #[error("dimension error: {0}")]
    Dimension(String),
    /// An index is out of range.
    #[error("index error: {0}")]
    Index(String),
    /// An iterative numeric routine failed to converge or produced invalid output.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// A truncation rank reaches into numerically zero eigenvalues.
    #[error("rank error: {0}")]
    Rank(String),
    /// The inputs violate a hypothesis the requested quantity depends on.
    #[error("hypothesis violation: {0}")]
    Hypothesis(String),
}

pub type Result<T> = std::result::Result<T, ProlateError>;
