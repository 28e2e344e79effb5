use thiserror::Error;

/// Errors raised by the library. Verdicts are never errors: a property that
/// fails at the horizon is reported through [`crate::verdict::Verdict`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("index {index} is beyond the evaluation bound {bound}")]
    OutOfHorizon { index: u64, bound: u64 },
    #[error("resource limit: {count} instances exceed the cap of {cap}")]
    ResourceLimit { count: u128, cap: u128 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

pub(crate) fn unsupported<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Unsupported(msg.into()))
}
