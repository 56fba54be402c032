use std::path::PathBuf;

/// Errors raised by the emulator, the bound calculator and the harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation (NaN, infinity,
    /// `ulp(0)`, division by zero, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// A result would leave the normal range of the binary64 substrate.
    #[error("range error: {0}")]
    Range(String),
    /// A parameter violates the documented constraints.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A kernel failed at a specific element.
    #[error("at index {index}: {source}")]
    AtIndex {
        index: usize,
        #[source]
        source: Box<Error>,
    },
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
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn at(index: usize, source: Error) -> Self {
        Error::AtIndex {
            index,
            source: Box::new(source),
        }
    }

    /// True for range errors, including those wrapped with an index.
    pub fn is_range(&self) -> bool {
        match self {
            Error::Range(_) => true,
            Error::AtIndex { source, .. } => source.is_range(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
