//! Krylov solvers, relaxation smoothers, aggregation multigrid and Lanczos.

mod amg;
mod krylov;
mod lanczos;
mod smoother;

pub use amg::{pairwise_aggregate, AmgConfig, AmgHierarchy, AmgLevel, Cycle};
pub use krylov::{fgmres, gmres, gmres_left};
pub use lanczos::{lanczos_extreme_eigs, LanczosResult};
pub use smoother::{JacobiSmoother, SgsSmoother};

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::la::LaError;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("zero diagonal entry in row {row}")]
    ZeroDiagonal { row: usize },
    #[error("matrix is not symmetric (relative asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("inner product lost positivity at Lanczos step {step}")]
    IndefiniteInnerProduct { step: usize },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    La(#[from] LaError),
}

/// Stopping rule for a Krylov solve; `restart = 0` keeps the full recurrence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrylovConfig {
    pub tol_rel: f64,
    pub max_iter: usize,
    pub restart: usize,
}

impl KrylovConfig {
    pub fn new(tol_rel: f64, max_iter: usize) -> Self {
        Self {
            tol_rel,
            max_iter,
            restart: 0,
        }
    }

    /// Outer solver settings: 1e-6 within 500 iterations.
    pub fn outer() -> Self {
        Self::new(1e-6, 500)
    }

    /// Inner flux-block settings: 1e-3 within 100 iterations.
    pub fn inner() -> Self {
        Self::new(1e-3, 100)
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.tol_rel > 0.0 && self.tol_rel < 1.0) {
            return Err(SolverError::InvalidConfig(format!(
                "tol_rel must lie in (0, 1), got {}",
                self.tol_rel
            )));
        }
        if self.max_iter == 0 {
            return Err(SolverError::InvalidConfig("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Outcome of an iterative solve.
///
/// `residual_history[0]` is the initial residual norm; entry `k` the residual
/// after `k` iterations (absolute values).
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub breakdown: bool,
    pub wall_time: f64,
}

impl SolveReport {
    pub fn initial_residual(&self) -> f64 {
        self.residual_history.first().copied().unwrap_or(0.0)
    }

    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(0.0)
    }

    pub fn relative_residual(&self) -> f64 {
        let r0 = self.initial_residual();
        if r0 == 0.0 {
            0.0
        } else {
            self.final_residual() / r0
        }
    }

    pub fn is_monotone(&self) -> bool {
        self.residual_history
            .windows(2)
            .all(|w| w[1] <= w[0] * (1.0 + 1e-12))
    }

    /// `iter,residual` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iter,residual\n");
        for (k, r) in self.residual_history.iter().enumerate() {
            let _ = writeln!(s, "{k},{r:.17e}");
        }
        s
    }
}
