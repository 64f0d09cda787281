//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors are grouped so a caller can map them onto coarse failure classes:
/// [`Error::InvalidArgument`] is a usage/configuration problem,
/// [`Error::Numeric`] is a numeric failure (NaN, non-convergence), and the
/// remaining variants are data problems (unreadable, malformed, or
/// degenerate inputs).
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("word not found: {0:?}")]
    NotFound(String),

    #[error("{context}: missing words {words:?}")]
    MissingWords { context: String, words: Vec<String> },

    /// Degenerate or unusable data (empty vocabulary, zero vector, zero
    /// variance, too few covered pairs, ...).
    #[error("{0}")]
    Data(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    pub(crate) fn parse(path: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
