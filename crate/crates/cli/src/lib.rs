//! Experiment drivers: configuration, reports with verdicts, and one function
//! per subcommand of the `wavemap` binary.

pub mod commands;
pub mod config;
pub mod report;

pub use commands::{
    cmd_cone_balance, cmd_identity_checks, cmd_nonuniq_demo, cmd_penalized_run, cmd_s_table, cmd_stationary_demo,
    Artifacts, Command,
};
pub use config::ExperimentConfig;
pub use report::{Comparison, ExperimentReport, Metric, Provenance, Verdict};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] wavemap_core::Error),

    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
