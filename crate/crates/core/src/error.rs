use thiserror::Error;

/// Errors produced by dataset ingestion, model estimation, and training.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input file; `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Invalid configuration or option value.
    #[error("config error: {0}")]
    Config(String),

    /// Mismatched feature or label dimensions.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// Dataset contents violate an operation's preconditions.
    #[error("data error: {0}")]
    Data(String),

    /// Numerical failure (singular system, non-finite objective, ...).
    #[error("numeric error: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short category tag used by the CLI for exit diagnostics.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Config(_) => "config",
            Error::Dimension { .. } => "dimension",
            Error::Data(_) => "data",
            Error::Numeric(_) => "numeric",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
