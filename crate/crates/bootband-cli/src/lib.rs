//! Command-line harness for the bootstrap confidence band experiments.
//!
//! The `bootband` binary exposes four subcommands, `band`, `coverage`,
//! `correction`, and `bias`, each mapping a [`RunConfig`] to a CSV table.
//! Configuration comes from defaults mirroring the reference experiment,
//! optionally overlaid by a `--preset`, a flat key=value `--config` file,
//! and individual flags, in that order. Runs are deterministic in the seed:
//! two invocations with the same configuration produce byte-identical CSV,
//! whatever `--threads` says.

pub mod commands;
pub mod config;
pub mod csvout;

pub use commands::{cmd_band, cmd_bias, cmd_correction, cmd_coverage};
pub use config::{parse_config, ConfigError, MeanKey, Preset, RunConfig};
pub use csvout::CsvTable;

use std::fmt;

/// Anything a command can fail with, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Invalid or inconsistent configuration (exit code 2).
    Config(ConfigError),
    /// A numerical failure inside the engine, such as an exhausted redraw
    /// budget or a singular normalization matrix (exit code 3).
    Numerical(bootband::Error),
    /// Filesystem trouble while writing results (exit code 1).
    Io(std::io::Error),
}

impl CliError {
    /// The process exit code this error maps to.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for CliError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            CliError::Config(e) => Some(e),
            CliError::Numerical(e) => Some(e),
            CliError::Io(e) => Some(e),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<bootband::Error> for CliError {
    fn from(e: bootband::Error) -> Self {
        CliError::Numerical(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}
