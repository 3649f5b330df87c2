use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected_w}x{expected_h}, got {actual_w}x{actual_h}")]
    DimensionMismatch {
        expected_w: usize,
        expected_h: usize,
        actual_w: usize,
        actual_h: usize,
    },

    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("invalid value for `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },

    #[error("config line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("unknown receptive field {0}")]
    UnknownRf(u32),

    #[error("DVS state used before initialization")]
    UninitializedState,

    #[error("{}: byte {offset}: {message}", path.display())]
    Format {
        path: PathBuf,
        offset: u64,
        message: String,
    },

    #[error("{}: trailing partial frame: expected a multiple of {expected} bytes, got {actual}", path.display())]
    PartialFrame {
        path: PathBuf,
        expected: u64,
        actual: u64,
    },

    #[error("event coordinate ({x}, {y}) or frame {frame} does not fit the AER record")]
    CoordinateOverflow { frame: u64, x: u64, y: u64 },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by configuration or arguments rather than input data.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig { .. } | Error::ConfigParse { .. } | Error::UnknownRf(_)
        )
    }
}
