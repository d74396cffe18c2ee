use std::path::PathBuf;

/// Errors produced by the conformal prediction library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid size: {0}")]
    Size(String),

    #[error("invalid parameter `{name}`: {message}")]
    Parameter { name: &'static str, message: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("malformed input at row {row}: {message}")]
    Row { row: usize, message: String },

    #[error("malformed input: {0}")]
    Format(String),

    #[error("split {index} failed: {source}")]
    Split {
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

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parameter(name: &'static str, message: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            message: message.into(),
        }
    }

    /// True for errors caused by invalid caller input (sizes, parameters,
    /// dimensions) rather than by data, numerics or I/O.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Size(_) | Error::Parameter { .. } | Error::Dimension { .. } => true,
            Error::Split { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Checks `0 < alpha < 1`.
pub(crate) fn check_level(name: &'static str, alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::parameter(
            name,
            format!("must lie strictly between 0 and 1, got {alpha}"),
        ))
    }
}
