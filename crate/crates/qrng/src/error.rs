use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::formats::FormatError;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VALIDATION: i32 = 2;
    pub const IO: i32 = 3;
    pub const STATISTICAL: i32 = 4;
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Validation(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Format { path: PathBuf, source: FormatError },
    #[error("{0}")]
    Statistical(String),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn io(path: &Path, source: io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) => exit::VALIDATION,
            // A malformed input file is bad input, not a failing disk.
            Error::Format { .. } => exit::VALIDATION,
            Error::Io { .. } => exit::IO,
            Error::Statistical(_) => exit::STATISTICAL,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
