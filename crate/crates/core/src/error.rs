use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access '{path}': {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A file was readable but does not follow its declared binary layout.
    #[error("malformed file '{path}': {message}")]
    Format { path: PathBuf, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("nesting violation at pixel ({row}, {col}) between level {level} and level {next}")]
    NestingViolation {
        row: usize,
        col: usize,
        level: usize,
        next: usize,
    },

    #[error("kernel error at ({row}, {col}): {source}")]
    GramEntry {
        row: usize,
        col: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("self-kernel underflowed to {0}; gamma is too large for these sequences")]
    SelfKernelUnderflow(f64),

    #[error("training failed: {0}")]
    Training(String),

    #[error("repetition {repetition}: {source}")]
    Repetition {
        repetition: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidInput(message.into())
    }

    /// Short stable identifier used in CLI error lines.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Format { .. } => "format",
            Error::InvalidInput(_) => "invalid-input",
            Error::DimensionMismatch { .. } => "dimension",
            Error::NestingViolation { .. } => "nesting",
            Error::GramEntry { .. } | Error::SelfKernelUnderflow(_) => "kernel",
            Error::Training(_) => "training",
            Error::Repetition { source, .. } => source.code(),
        }
    }
}
