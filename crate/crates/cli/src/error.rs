use std::io;
use std::path::PathBuf;

use sbbf::{BuildError, HasherId, ModelError, PersistError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("writing output: {0}")]
    Output(#[from] io::Error),
    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("writing JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{}: {source}", path.display())]
    Persist { path: PathBuf, source: PersistError },
    #[error(
        "filter uses hasher {found}, but keys are hashed with {expected}; \
         query it through the API with the matching hash function"
    )]
    HasherMismatch { found: HasherId, expected: HasherId },
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("check failed: {0}")]
    Check(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    /// 0 success, 1 usage, 2 I/O or format, 3 failed check.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Model(_) => 1,
            CliError::Check(_) => 3,
            _ => 2,
        }
    }
}
