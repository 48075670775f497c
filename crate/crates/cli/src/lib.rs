//! Command-line driver: simulation runs, parameter sweeps, inequality
//! benches and the verification table, plus the file formats they use.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod verify;

pub use error::CliError;
