//! Command-line front end of `qlid`: data ingestion, run configuration, the
//! fit / sweep / simulate pipelines and report and plot output.

pub mod app;
pub mod config;
pub mod ingest;
pub mod pipeline;
pub mod plot;
pub mod report;

use std::fmt;

/// Process exit status.
pub mod exit {
    pub const OK: i32 = 0;
    /// Some fits failed; the rest were written.
    pub const PARTIAL: i32 = 1;
    /// Bad configuration or unreadable data.
    pub const CONFIG: i32 = 2;
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Ingest(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Ingest(_) => exit::CONFIG,
            CliError::Io(_) => exit::PARTIAL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Ingest(m) => write!(f, "data error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}
