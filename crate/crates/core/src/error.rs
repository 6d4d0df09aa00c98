use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the routine
    /// (a probability outside its interval, a nonpositive variance, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The caller broke a structural contract: mismatched lengths, empty
    /// inputs, invalid weights.
    #[error("contract violation: {0}")]
    Contract(String),

    /// The data does not support the requested statistic (constant sample,
    /// singular covariance, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// An iterative routine failed to produce a usable answer.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}

pub(crate) fn degenerate(msg: impl Into<String>) -> Error {
    Error::Degenerate(msg.into())
}
