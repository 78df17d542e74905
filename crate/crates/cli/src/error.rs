use std::path::Path;

use aniso_fdtd::Error as CoreError;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const OTHER: u8 = 1;
    pub const CONFIG: u8 = 2;
    pub const NUMERICAL: u8 = 3;
    pub const GUARD: u8 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Io { .. } => exit::OTHER,
            CliError::Core(e) => match e {
                CoreError::SizeGuard(_) => exit::GUARD,
                CoreError::NonFinite { .. }
                | CoreError::CflNotConverged { .. }
                | CoreError::SingularJacobian { .. }
                | CoreError::Eigensolver(_)
                | CoreError::Analysis(_) => exit::NUMERICAL,
                CoreError::Io(_) => exit::OTHER,
                _ => exit::CONFIG,
            },
        }
    }
}
