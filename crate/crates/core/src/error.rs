//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A stated precondition (parameter ranges, dimension agreement) fails.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The requested quantity diverges (e.g. K(1), Gauss sum with c <= a+b).
    #[error("divergent: {0}")]
    Divergence(String),

    /// Monte Carlo integration produced non-finite samples or a
    /// non-decaying singular tail.
    #[error("integration failure: {0}")]
    Integration(String),

    /// A built-in dual-route consistency check failed; indicates a bug,
    /// not a user error.
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
    pub fn divergence(msg: impl Into<String>) -> Self {
        Error::Divergence(msg.into())
    }
    pub fn integration(msg: impl Into<String>) -> Self {
        Error::Integration(msg.into())
    }
    pub fn consistency(msg: impl Into<String>) -> Self {
        Error::Consistency(msg.into())
    }
}
