use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{DarcyError, SaddleSystem};
use crate::la::{norm2, DenseLu};
use crate::precond::{
    AlphaPolicy, AugmentedFluxBlock, AuxConfig, AuxSpacePreconditioner, BlockKind, BlockPreconditioner,
    FluxOperators,
};
use crate::solvers::{fgmres, gmres_left, KrylovConfig};

/// How the flux block of the block preconditioner is approximated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FluxSolve {
    /// Inner GMRES preconditioned by the auxiliary-space preconditioner.
    Auxiliary,
    /// Dense factorization of the augmented block (small problems only).
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveOptions {
    pub kind: BlockKind,
    pub alpha: AlphaPolicy,
    pub outer: KrylovConfig,
    pub inner: KrylovConfig,
    pub aux: AuxConfig,
    pub flux_solve: FluxSolve,
    /// Left-preconditioned GMRES instead of right-preconditioned FGMRES.
    pub left: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            kind: BlockKind::D,
            alpha: AlphaPolicy::KMin100,
            outer: KrylovConfig::outer(),
            inner: KrylovConfig::inner(),
            aux: AuxConfig::default(),
            flux_solve: FluxSolve::Auxiliary,
            left: false,
        }
    }
}

/// Iteration counts, residuals and timings of one solve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveInfo {
    pub kind: BlockKind,
    pub alpha: f64,
    pub num_flux: usize,
    pub num_pressure: usize,
    pub num_dofs: usize,
    pub outer_iterations: usize,
    pub inner_average: f64,
    pub inner_calls: usize,
    pub inner_unconverged: usize,
    pub converged: bool,
    pub relative_residual: f64,
    /// Relative residual of the unpreconditioned system at the returned iterate.
    pub true_relative_residual: f64,
    pub residual_history: Vec<f64>,
    /// Wall time in seconds.
    pub setup_time: f64,
    pub solve_time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Solution {
    /// Flux on the full flux space (zeros on no-flux DOFs).
    pub flux: Vec<f64>,
    pub pressure: Vec<f64>,
    pub info: SolveInfo,
}

impl Solution {
    /// Free flux DOFs followed by pressures, as ordered in the system.
    pub fn system_vector(&self, system: &SaddleSystem) -> Vec<f64> {
        let mut x: Vec<f64> = system.free_flux.iter().map(|&i| self.flux[i]).collect();
        x.extend_from_slice(&self.pressure);
        x
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution report serializes")
    }
}

/// Preconditioner operators of a system for a given α.
pub struct PreparedSolver {
    pub alpha: f64,
    pub ops: FluxOperators,
    pub aug: Arc<AugmentedFluxBlock>,
    pub precond: BlockPreconditioner,
    pub setup_time: f64,
}

impl PreparedSolver {
    pub fn new(system: &SaddleSystem, opts: &SolveOptions) -> Result<Self, DarcyError> {
        let t0 = Instant::now();
        let pb = &system.problem;
        let alpha = opts.alpha.alpha(pb.perm.k_min());
        let weights = opts.aux.weights.weights(&pb.mesh, &pb.perm, alpha);
        let ops = FluxOperators::assemble(&pb.mesh, &pb.perm, &weights, Some(system.free_flux.clone()))?;
        let aug = Arc::new(ops.augmented(alpha)?);
        let precond = match opts.flux_solve {
            FluxSolve::Auxiliary => {
                let aux = AuxSpacePreconditioner::new(&ops, &aug, opts.aux)?;
                BlockPreconditioner::new(opts.kind, aug.clone(), Arc::new(aux), opts.inner)
            }
            FluxSolve::Exact => {
                let lu = DenseLu::new(&aug.matrix.to_dense())?;
                BlockPreconditioner::with_exact_flux(opts.kind, aug.clone(), Arc::new(lu))
            }
        }
        .with_pressure_sign(system.sign);
        Ok(Self {
            alpha,
            ops,
            aug,
            precond,
            setup_time: t0.elapsed().as_secs_f64(),
        })
    }
}

/// Solves the system with a block-preconditioned Krylov method from a zero
/// initial guess. Non-convergence is reported in the result, not as an error.
pub fn solve(system: &SaddleSystem, opts: &SolveOptions) -> Result<Solution, DarcyError> {
    let prep = PreparedSolver::new(system, opts)?;
    solve_prepared(system, &prep, opts)
}

pub fn solve_prepared(system: &SaddleSystem, prep: &PreparedSolver, opts: &SolveOptions) -> Result<Solution, DarcyError> {
    let rhs = system.rhs();
    prep.precond.stats.reset();
    let t0 = Instant::now();
    let (x, rep) = if opts.left {
        gmres_left(system, &rhs, &prep.precond, &opts.outer)?
    } else {
        fgmres(system, &rhs, &prep.precond, &opts.outer)?
    };
    let solve_time = t0.elapsed().as_secs_f64();
    let mut r = crate::la::LinearOperator::apply_vec(system, &x);
    for (ri, bi) in r.iter_mut().zip(&rhs) {
        *ri = bi - *ri;
    }
    let nb = norm2(&rhs);
    let nq = system.num_flux();
    let stats = &prep.precond.stats;
    let info = SolveInfo {
        kind: opts.kind,
        alpha: prep.alpha,
        num_flux: nq,
        num_pressure: system.num_pressure(),
        num_dofs: system.num_dofs(),
        outer_iterations: rep.iterations,
        inner_average: stats.average(),
        inner_calls: stats.calls(),
        inner_unconverged: stats.unconverged(),
        converged: rep.converged,
        relative_residual: rep.relative_residual(),
        true_relative_residual: if nb == 0.0 { 0.0 } else { norm2(&r) / nb },
        residual_history: rep.residual_history,
        setup_time: prep.setup_time,
        solve_time,
    };
    Ok(Solution {
        flux: system.expand_flux(&x[..nq]),
        pressure: x[nq..].to_vec(),
        info,
    })
}

/// Wraps a direct solution in a [`Solution`] with an empty report.
pub fn dense_solution(system: &SaddleSystem) -> Result<Solution, DarcyError> {
    let t0 = Instant::now();
    let x = system.dense_solve()?;
    let nq = system.num_flux();
    Ok(Solution {
        flux: system.expand_flux(&x[..nq]),
        pressure: x[nq..].to_vec(),
        info: SolveInfo {
            kind: BlockKind::D,
            alpha: f64::NAN,
            num_flux: nq,
            num_pressure: system.num_pressure(),
            num_dofs: system.num_dofs(),
            outer_iterations: 0,
            inner_average: 0.0,
            inner_calls: 0,
            inner_unconverged: 0,
            converged: true,
            relative_residual: 0.0,
            true_relative_residual: 0.0,
            residual_history: Vec::new(),
            setup_time: 0.0,
            solve_time: t0.elapsed().as_secs_f64(),
        },
    })
}
