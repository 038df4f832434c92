//! Command-line front end for `iie-core`: run configuration files, binary
//! snapshots, CSV diagnostics and the subcommand implementations behind the
//! `iie` binary.

pub mod commands;
pub mod config;
pub mod csv_out;
pub mod snapshot;

use thiserror::Error;

pub use config::{parse_config, parse_config_str, ConfigError};
pub use csv_out::write_diagnostics_csv;
pub use snapshot::{read_snapshot, write_snapshot, Snapshot, SnapshotError};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const IO: u8 = 1;
    pub const CONFIG: u8 = 2;
    pub const NUMERICAL: u8 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] iie_core::Error),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

fn core_exit_code(e: &iie_core::Error) -> u8 {
    use iie_core::Error as E;
    match e {
        E::InvalidGrid(_)
        | E::InvalidParameters(_)
        | E::UnknownPreset(_)
        | E::AssumptionViolated { .. }
        | E::GridMismatch
        | E::LengthMismatch { .. } => exit::CONFIG,
        _ => exit::NUMERICAL,
    }
}

impl CliError {
    /// Bad configuration or parameters map to 2, solver breakdowns (no
    /// convergence, no contraction, CFL violation and similar) to 3, and
    /// snapshot or CSV file trouble to 1.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Core(e) | CliError::Snapshot(SnapshotError::Core(e)) => core_exit_code(e),
            CliError::Snapshot(_) | CliError::Csv(_) | CliError::Io(_) => exit::IO,
        }
    }
}
