use std::io;
use std::path::PathBuf;

use heisenberg_core::GeometryError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid {field}: {message}")]
    Config {
        field: &'static str,
        message: String,
    },
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: io::Error },
    #[error("cannot write to stdout: {0}")]
    Stdout(io::Error),
    #[error("{field}: {source}")]
    Geometry {
        field: &'static str,
        #[source]
        source: GeometryError,
    },
}

impl CliError {
    pub fn config(field: &'static str, message: impl Into<String>) -> Self {
        CliError::Config {
            field,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } | CliError::Geometry { .. } => 1,
            CliError::Read { .. } | CliError::Write { .. } | CliError::Stdout(_) => 2,
        }
    }
}

/// Attaches the offending option to a core error.
pub trait Context<T> {
    fn field(self, field: &'static str) -> Result<T, CliError>;
}

impl<T> Context<T> for Result<T, GeometryError> {
    fn field(self, field: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Geometry { field, source })
    }
}
