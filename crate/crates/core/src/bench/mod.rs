//! Benchmark harness: run configurations, parameter sweeps with Markdown and
//! CSV tables, and the structural verification suite.

mod config;
mod sweep;
mod verify;

pub use config::{GeometrySpec, OutputSpec, PermSpec, RunConfig};
pub use sweep::{sweep_alpha, sweep_fractures, sweep_h, sweep_k, worker_threads, SweepMeta, SweepResult, SweepRow, THREADS_ENV};
pub use verify::{
    verify, verify_mesh, verify_meshes, Check, VerifyOptions, VerifyReport, COMMUTING_TOL, DD_TOL, KAPPA_LIMIT,
    SHAPE_FLOOR, SYMMETRY_TOL,
};

use std::path::PathBuf;

use thiserror::Error;

use crate::darcy::DarcyError;
use crate::fem::FemError;
use crate::mesh::MeshError;
use crate::precond::PrecondError;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}", path = .0.display(), source = .1)]
    Io(PathBuf, std::io::Error),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Precond(#[from] PrecondError),
    #[error(transparent)]
    Darcy(#[from] DarcyError),
}
