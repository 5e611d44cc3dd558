//! Command-line front end for `springrods`: configuration handling, run
//! directories and the `solve`, `sweep`, `converge` and `validate` workflows.

mod args;
mod commands;
mod config;

use std::path::PathBuf;

use springrods::experiments::ExperimentError;
use springrods::fem::FemError;
use springrods::model::ModelError;
use springrods::solver::SolverError;
use thiserror::Error;

pub use args::{Cli, Command, Overrides};
pub use commands::{create_run_dir, dispatch, run_converge, run_solve, run_sweep, run_validate, Outcome, VALIDATE_LIMIT};
pub use config::{parse_config, parse_damping, parse_formats, parse_grid, Format, Method, RunConfig, KEYS};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}, key `{key}`: {message}")]
    Parse { line: usize, key: String, message: String },
    #[error("invalid value for {flag}: {message}")]
    Flag { flag: String, message: String },
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("invalid configuration: {0}")]
    Model(#[from] ModelError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
}

impl CliError {
    /// 2 for bad input, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. }
            | CliError::Flag { .. }
            | CliError::Validation(_)
            | CliError::Model(_)
            | CliError::Usage(_) => 2,
            CliError::Io { .. } | CliError::Fem(_) | CliError::Solver(_) | CliError::Experiment(_) => 1,
        }
    }
}
