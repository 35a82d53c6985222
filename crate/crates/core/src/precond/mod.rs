//! Auxiliary-space flux preconditioner, augmented flux block and block
//! preconditioners for the mixed-dimensional Darcy saddle-point system.

mod aux;
mod block;
mod operators;
mod quality;

pub use aux::{AuxConfig, AuxSpacePreconditioner, AuxTerm, CurlRegular, SmootherKind, WeightPolicy};
pub use block::{BlockKind, BlockPreconditioner, InnerStats};
pub use operators::{AlphaPolicy, AugmentedFluxBlock, FluxOperators};
pub use quality::{precond_quality, QualityReport};

use serde::Serialize;
use thiserror::Error;

use crate::fem::FemError;
use crate::la::LaError;
use crate::solvers::SolverError;

#[derive(Debug, Error)]
pub enum PrecondError {
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    La(#[from] LaError),
    #[error("invalid preconditioner input: {0}")]
    Invalid(String),
}

/// One entry of a preconditioner manifest.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ManifestTerm {
    pub name: String,
    pub shape: [usize; 2],
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub amg_levels: Vec<usize>,
}
