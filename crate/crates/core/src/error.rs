use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "composition {found:?} does not belong to the simplex of level {level} with {parts} parts"
    )]
    IncompatibleComposition {
        found: Vec<usize>,
        level: usize,
        parts: usize,
    },

    #[error("color {color} out of range for {stocks} colors")]
    ColorOutOfRange { color: usize, stocks: usize },

    #[error("simplex with {parts} parts at level {level} is too large ({what})")]
    SimplexTooLarge {
        parts: usize,
        level: usize,
        what: String,
    },

    #[error("{path}: empty input")]
    EmptyInput { path: PathBuf },

    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
