//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad construction-time argument (qubit count out of range, empty seed
    /// list, malformed config key, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Runtime precondition violated (non-unitary gate, control == target,
    /// duplicate qubit indices, length mismatch, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// Input is degenerate for the requested operation (all-zero amplitude
    /// vector, empty dataset, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// IDX file has the wrong magic number.
    #[error("IDX magic mismatch in {path}: expected {expected:#010x}, found {found:#010x}")]
    IdxMagic {
        path: String,
        expected: u32,
        found: u32,
    },

    /// IDX file ended before the declared payload.
    #[error("IDX file truncated: {0}")]
    IdxTruncated(String),

    /// Image and label files disagree on the sample count.
    #[error("IDX count mismatch: {images} images vs {labels} labels")]
    IdxCountMismatch { images: usize, labels: usize },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Versioned artifact or model file could not be decoded.
    #[error("artifact format error: {0}")]
    Artifact(String),
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
