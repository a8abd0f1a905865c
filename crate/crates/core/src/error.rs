use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::model::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown site `{0}`")]
    UnknownSite(String),

    #[error("unknown factor `{0}`")]
    UnknownFactor(String),

    #[error("unknown level `{0}`")]
    UnknownLevel(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    /// A malformed record. `line` is 1-based; 0 when the location is not a line.
    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    #[error("geometry feature #{feature}: {message}")]
    Geometry { feature: usize, message: String },

    #[error("bundle failed validation with {} error(s): {}", .0.errors().count(), .0.summary())]
    Validation(ValidationReport),

    #[error("unsupported bundle format version {0}")]
    UnsupportedVersion(u32),

    #[error("invalid time `{0}`")]
    InvalidTime(String),

    #[error("invalid predicate: {0}")]
    InvalidPredicate(String),

    #[error("invalid checklist criteria: {0}")]
    InvalidCriteria(String),

    #[error("inverted time range {from}..{to}")]
    InvertedRange { from: String, to: String },

    #[error("site `{0}` has no children")]
    ChildlessParent(String),

    #[error("{0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(file: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            file: file.into(),
            line,
            message: message.into(),
        }
    }
}
