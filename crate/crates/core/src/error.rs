use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value breaks an invariant. `field` names the offending key.
    #[error("invalid configuration `{field}`: {reason}")]
    Config { field: String, reason: String },

    /// Caller broke a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A data file row could not be parsed.
    #[error("{file}: row {row}: {reason}")]
    Ingest {
        file: String,
        row: u64,
        reason: String,
    },

    /// A distribution indicator is set on a link that is not active.
    #[error("slot {slot}: transfer {from}->{to} has no active link")]
    InactiveLink { slot: usize, from: u32, to: u32 },

    #[error("failed to parse scenario file: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
