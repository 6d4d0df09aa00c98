use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExpError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Numerical(#[from] riskopt::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed table: {0}")]
    Table(String),

    #[error("cell mismatch at ({row}, {col}): table has {stored}, recomputed {recomputed}")]
    Mismatch {
        row: String,
        col: String,
        stored: String,
        recomputed: String,
    },
}

impl ExpError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        ExpError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExpError::Config(_) => 2,
            ExpError::Numerical(_) => 3,
            ExpError::Io { .. } | ExpError::Table(_) | ExpError::Mismatch { .. } => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, ExpError>;

pub(crate) fn config_err(msg: impl Into<String>) -> ExpError {
    ExpError::Config(msg.into())
}

pub(crate) fn table_err(msg: impl Into<String>) -> ExpError {
    ExpError::Table(msg.into())
}
