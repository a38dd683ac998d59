use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates its documented constraint.
    #[error("invalid value for `{key}`: {constraint}")]
    Config { key: String, constraint: String },

    /// A configuration document could not be parsed.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// A network does not satisfy the structural invariants.
    #[error("invalid network: {0}")]
    Network(String),

    /// A results or state file does not satisfy the trajectory invariants.
    #[error("invalid trajectory data: {0}")]
    Trajectory(String),

    #[error("sweep aborted at cell {cell_index}: {source}")]
    Sweep {
        cell_index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("write failed: {0}")]
    Write(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(key: impl Into<String>, constraint: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            constraint: constraint.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the user's input rather than the runtime.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Config { .. }
            | Error::Parse { .. }
            | Error::Network(_)
            | Error::Trajectory(_) => true,
            Error::Sweep { source, .. } => source.is_validation(),
            Error::Json(e) => !e.is_io(),
            Error::Io { .. } | Error::Write(_) | Error::Csv(_) => false,
        }
    }
}
