use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A size parameter fell outside the supported range.
    #[error("{what} = {value} is outside the supported range {min}..={max}")]
    OutOfRange {
        what: &'static str,
        value: usize,
        min: usize,
        max: usize,
    },
    /// Arguments violate an operation's precondition.
    #[error("domain error: {0}")]
    Domain(String),
    /// Malformed text input.
    #[error("parse error: {0}")]
    Parse(String),
    /// The operation refuses an input it cannot handle faithfully.
    #[error("unsupported input {subject}: {reason}")]
    Capability { subject: String, reason: String },
    /// An internal cross-check failed. Never expected on valid input.
    #[error("internal consistency error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
