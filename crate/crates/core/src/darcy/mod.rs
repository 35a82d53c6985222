//! Mixed-dimensional Darcy problem: boundary conditions, saddle-point
//! assembly, block-preconditioned solves and diagnostics.
//!
//! Pressure conditions are natural: a rock boundary facet with pressure
//! `p_bc` contributes `−p_bc(midpoint)` to its flux DOF, a fracture end on the
//! boundary contributes `−p_bc·ε` with `ε = +1` at the fracture end vertex and
//! `−1` at its start. No-flux DOFs are removed from the system.

mod bc;
mod diagnostics;
mod solve;
mod system;
mod vtk;

pub use bc::{boundary_entities, BoundaryConditions, BoundaryEntity, BoundaryValue, SideBc, SideBcs};
pub use diagnostics::{inf_sup_constant, mass_balance_report, net_boundary_outflux, MassBalance};
pub use solve::{
    dense_solution, solve, solve_prepared, FluxSolve, PreparedSolver, Solution, SolveInfo, SolveOptions,
};
pub use system::{DarcyProblem, SaddleSystem};
pub use vtk::{cell_flux_vectors, vtk_subdomain, write_vtk};

use thiserror::Error;

use crate::fem::FemError;
use crate::la::LaError;
use crate::precond::PrecondError;
use crate::solvers::SolverError;

#[derive(Debug, Error)]
pub enum DarcyError {
    #[error("invalid problem: {0}")]
    Input(String),
    #[error("boundary entity {0:?} has no boundary condition")]
    Uncovered(BoundaryEntity),
    #[error("no pressure condition anywhere: the problem is singular")]
    Singular,
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Precond(#[from] PrecondError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    La(#[from] LaError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
