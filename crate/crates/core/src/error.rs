use thiserror::Error;

/// Errors produced by sketch construction, evaluation, and dataset IO.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("numeric integrity violated: {0}")]
    NumericIntegrity(String),

    #[error("incompatible sketches: {0}")]
    IncompatibleSketch(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn dimension(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
