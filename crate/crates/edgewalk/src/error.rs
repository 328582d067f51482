use thiserror::Error;

/// Errors surfaced by every fallible operation in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration `{key}`: {reason}")]
    Config { key: String, reason: String },

    /// A stopping time did not occur within its step cap. The ledger that was
    /// being advanced is left at the state reached when the cap was hit.
    #[error("step cap {cap} exceeded at time {time} (position {position})")]
    Overrun { cap: u64, time: u64, position: i64 },

    #[error("range error: {0}")]
    Range(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("rejection sampler gave up after {attempts} attempts")]
    Sampling { attempts: u64 },

    #[error("size {size} exceeds the exhaustive cap {cap}")]
    Size { size: usize, cap: usize },

    /// A failure inside one Monte Carlo replication, tagged with its stream
    /// so the replication can be replayed alone.
    #[error("replication stream {stream:#x}: {source}")]
    Replication { stream: u64, source: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(key: &str, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.to_string(),
            reason: reason.into(),
        }
    }
}
