//! Experiment presets, configuration and reporting for the `qfk` binary.

pub mod config;
pub mod report;
pub mod run;

use qfk_core::QfkError;

pub use config::{ExperimentConfig, Preset};
pub use report::{CheckRecord, RunReport, Target};
pub use run::{convergence, run};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] QfkError),
    #[error("output error: {0}")]
    Io(String),
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const CHECK_FAILURE: i32 = 1;
    pub const CONFIG_ERROR: i32 = 2;
}

/// Parses `h0,h1,h2`.
pub fn parse_ladder(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| CliError::Config(format!("cannot parse ladder entry {x:?}"))))
        .collect()
}
