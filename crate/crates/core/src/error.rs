use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::pipeline::config::ConfigError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    /// A data file (spectrum, report, table) that does not parse.
    #[error("{what}: {message} at byte offset {offset}")]
    Format {
        what: String,
        offset: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(what: impl Into<String>, offset: usize, message: impl Into<String>) -> Self {
        Error::Format {
            what: what.into(),
            offset,
            message: message.into(),
        }
    }

    /// Process exit code used by the command-line front-end.
    ///
    /// | code | meaning |
    /// |------|---------|
    /// | 3 | configuration error |
    /// | 4 | i/o error |
    /// | 5 | domain error |
    /// | 6 | malformed data file |
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 3,
            Error::Io { .. } => 4,
            Error::Domain(_) => 5,
            Error::Format { .. } => 6,
        }
    }
}
