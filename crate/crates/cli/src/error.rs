use std::path::{Path, PathBuf};

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const OTHER: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const BLOW_UP: i32 = 3;
    pub const VERIFY_FAILED: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error{}: {message}", line.map(|l| format!(" on line {l}")).unwrap_or_default())]
    Config { line: Option<usize>, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Core(#[from] tcm_core::Error),
    #[error("blow-up detected at t = {time}: {reason}")]
    BlowUp { time: f64, reason: String },
    #[error("verification failed: {}", .0.join(", "))]
    VerifyFailed(Vec<String>),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn config(line: usize, message: impl Into<String>) -> CliError {
        CliError::Config { line: Some(line), message: message.into() }
    }

    pub fn io(path: &Path, source: std::io::Error) -> CliError {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => exit::CONFIG,
            CliError::BlowUp { .. } => exit::BLOW_UP,
            CliError::VerifyFailed(_) => exit::VERIFY_FAILED,
            CliError::Io { .. } | CliError::Core(_) | CliError::Other(_) => exit::OTHER,
        }
    }
}
