//! Error type shared across the crate.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A configuration value violates its contract (bad dims, bad ranges, ...).
    #[error("invalid config: {0}")]
    Config(String),

    /// A runtime input violates a precondition (non-finite values, bad label, ...).
    #[error("invalid input: {0}")]
    Input(String),

    /// The API was called in an unsupported way (mismatched cache, bad call order).
    #[error("usage error: {0}")]
    Usage(String),

    /// A numerical problem surfaced mid-computation (NaN/inf gradients, ...).
    #[error("numerical error: {0}")]
    Numeric(String),

    /// A data file could not be ingested; `row` is the 1-based data row.
    #[error("ingestion error at row {row}: {msg}")]
    Ingest { row: usize, msg: String },

    /// Filesystem failure, tagged with the offending path.
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
