use thiserror::Error;

/// Errors raised by the channel models, routing algorithms and experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular geometry: {0}")]
    Singular(String),

    #[error("failed to converge after {iterations} iterations: {detail}")]
    Convergence { iterations: usize, detail: String },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("path enumeration exceeded {limit} paths")]
    Overflow { limit: usize },

    #[error("no route from {source_node} to {dest}")]
    NoRoute { source_node: usize, dest: usize },

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

impl Error {
    pub(crate) fn from_json(err: serde_json::Error) -> Self {
        Error::Parse {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}
