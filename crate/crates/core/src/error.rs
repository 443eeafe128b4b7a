use thiserror::Error;

/// Errors produced by tree construction, the coalescent, the exact oracles
/// and the experiment drivers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("unsatisfiable condition: {0}")]
    UnsatisfiableCondition(String),

    #[error("conditioning event has zero probability: {0}")]
    EmptyCondition(String),

    #[error(
        "invariant violated in replicate {replicate} (stream seed {stream_seed:#018x}): {message}"
    )]
    InvariantViolation {
        replicate: u64,
        stream_seed: u64,
        message: String,
    },

    #[error("replicate {replicate} (stream seed {stream_seed:#018x}) failed: {source}")]
    Replicate {
        replicate: u64,
        stream_seed: u64,
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
