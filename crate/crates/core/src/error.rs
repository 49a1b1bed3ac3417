use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies on a singular set (flux position, discontinuity line,
    /// coincident particles) or outside the mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// A size parameter exceeds what the routine supports.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// Mismatched dimensions or a violated structural contract (e.g. a
    /// non-Hermitian operator).
    #[error("contract violation: {0}")]
    Contract(String),
    /// A discretization that would place a matrix element on the flux.
    #[error("configuration error: {0}")]
    Configuration(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
