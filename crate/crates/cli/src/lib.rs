//! Experiment harness for the vorticity solver: configs, ν sweeps,
//! persisted tables and certificate reports.

pub mod config;
pub mod experiment;
pub mod report;
pub mod tools;

pub use config::RunConfig;
pub use experiment::{execute, Mode, Report};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] vll_core::Error),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

/// Exit status for "certificate failed".
pub const EXIT_FAIL: i32 = 1;
/// Exit status for configuration and input errors.
pub const EXIT_ERROR: i32 = 2;

/// Worker count from VLL_THREADS, else the available parallelism.
pub fn thread_count() -> Result<usize, CliError> {
    match std::env::var("VLL_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(CliError::Config(vec![format!("VLL_THREADS = {v:?} must be a positive integer")])),
        },
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}
