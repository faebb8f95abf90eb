//! Benchmark harness for the hybrid beamforming pipeline: configuration
//! parsing, Monte-Carlo sum-rate and robustness sweeps, timing comparison,
//! and dataset/model persistence.

pub mod cli;
pub mod config;
pub mod dataset_io;
pub mod results;
pub mod sweeps;

/// Harness-level error, split by exit code: configuration problems exit
/// with 1, runtime failures with 2.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
