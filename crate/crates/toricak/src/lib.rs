//! File formats, catalog and command implementations for the `toricak` tool.
//!
//! The numerics live in `toricak_core`; this crate reads polytopes and field
//! dumps, runs the commands and writes [`report::RunReport`] documents.

pub mod catalog;
pub mod cli;
pub mod commands;
pub mod config;
pub mod format;
pub mod report;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] toricak_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INPUT_ERROR: i32 = 1;
    pub const TOLERANCE_FAILURE: i32 = 2;
}
