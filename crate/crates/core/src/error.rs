use thiserror::Error;

use crate::experiments::ExperimentError;
use crate::fem::FemError;
use crate::linalg::LinalgError;
use crate::model::ModelError;
use crate::oracle::OracleError;
use crate::solver::SolverError;

/// Any error raised by this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
}
