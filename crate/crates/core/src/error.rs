use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A type invariant was violated on construction.
    #[error("validation failed: {0}")]
    Validation(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// The requested quantity diverges or is undefined for these arguments.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("numerical error: {msg} (achieved tolerance {achieved:e})")]
    Numeric { msg: String, achieved: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("sampling budget exceeded: {0}")]
    Budget(String),

    #[error("coverage error: {0}")]
    Coverage(String),

    #[error("stability error: {0}")]
    Stability(String),

    #[error("divergence at step {step}: {msg}")]
    Divergence { step: usize, msg: String },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
