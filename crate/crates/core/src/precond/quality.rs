use serde::Serialize;

use super::{AugmentedFluxBlock, PrecondError};
use crate::la::LinearOperator;
use crate::solvers::lanczos_extreme_eigs;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QualityReport {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub kappa: f64,
    pub steps: usize,
    /// The Lanczos process stopped on an invariant subspace.
    pub early_exit: bool,
}

struct Preconditioned<'a> {
    b: &'a dyn LinearOperator,
    a: &'a dyn LinearOperator,
}

impl LinearOperator for Preconditioned<'_> {
    fn nrows(&self) -> usize {
        self.a.nrows()
    }
    fn ncols(&self) -> usize {
        self.a.ncols()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let t = self.a.apply_vec(x);
        self.b.apply(&t, y);
    }
}

/// Lanczos estimate of `κ(𝔅 𝔄)` in the `𝔄` inner product.
pub fn precond_quality(
    aug: &AugmentedFluxBlock,
    prec: &dyn LinearOperator,
    steps: usize,
) -> Result<QualityReport, PrecondError> {
    let t = Preconditioned { b: prec, a: aug };
    let r = lanczos_extreme_eigs(&t, aug, steps)?;
    Ok(QualityReport {
        lambda_min: r.lambda_min,
        lambda_max: r.lambda_max,
        kappa: r.condition(),
        steps: r.steps,
        early_exit: r.early_exit,
    })
}
