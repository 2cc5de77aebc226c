use std::path::PathBuf;

/// Errors raised by argument validation, configuration checks and profile parsing.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// BLAS-style illegal argument: `position` is the 1-based parameter index
    /// of `routine`, following the reference `xerbla` convention.
    #[error("on entry to {routine}, parameter number {position} had an illegal value: {reason}")]
    IllegalArgument {
        routine: &'static str,
        position: usize,
        reason: String,
    },

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid kernel configuration (nb={nb}, q={q_bar}, y={y_bar}): {reason}")]
    InvalidConfig {
        nb: usize,
        q_bar: usize,
        y_bar: usize,
        reason: String,
    },

    #[error("offset out of range: {0}")]
    OffsetOutOfRange(String),

    #[error("invalid device profile: {0}")]
    InvalidProfile(String),

    #[error("{path}:{line}: {message}")]
    ProfileParse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
