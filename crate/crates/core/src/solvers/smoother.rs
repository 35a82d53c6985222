use std::sync::Arc;

use super::SolverError;
use crate::la::{LinearOperator, SparseMatrix};

fn inverse_diagonal(a: &SparseMatrix) -> Result<Vec<f64>, SolverError> {
    a.diagonal()
        .iter()
        .enumerate()
        .map(|(row, &d)| {
            if d == 0.0 || !d.is_finite() {
                Err(SolverError::ZeroDiagonal { row })
            } else {
                Ok(1.0 / d)
            }
        })
        .collect()
}

/// `x = D⁻¹ r`.
#[derive(Clone, Debug)]
pub struct JacobiSmoother {
    inv_diag: Vec<f64>,
}

impl JacobiSmoother {
    pub fn new(a: &SparseMatrix) -> Result<Self, SolverError> {
        Ok(Self {
            inv_diag: inverse_diagonal(a)?,
        })
    }
}

impl LinearOperator for JacobiSmoother {
    fn nrows(&self) -> usize {
        self.inv_diag.len()
    }
    fn ncols(&self) -> usize {
        self.inv_diag.len()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for ((yi, xi), di) in y.iter_mut().zip(x).zip(&self.inv_diag) {
            *yi = xi * di;
        }
    }
}

/// Symmetric Gauss-Seidel: a forward sweep followed by a backward sweep.
///
/// Applied to `r` from a zero guess this is `(D+U)⁻¹ D (D+L)⁻¹ r`.
#[derive(Clone, Debug)]
pub struct SgsSmoother {
    a: Arc<SparseMatrix>,
    inv_diag: Vec<f64>,
}

impl SgsSmoother {
    pub fn new(a: Arc<SparseMatrix>) -> Result<Self, SolverError> {
        if a.nrows() != a.ncols() {
            return Err(SolverError::InvalidConfig("SGS needs a square matrix".into()));
        }
        let inv_diag = inverse_diagonal(&a)?;
        Ok(Self { a, inv_diag })
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.a
    }

    pub fn forward_sweep(&self, b: &[f64], x: &mut [f64]) {
        for i in 0..x.len() {
            x[i] += self.residual_at(i, b, x) * self.inv_diag[i];
        }
    }

    pub fn backward_sweep(&self, b: &[f64], x: &mut [f64]) {
        for i in (0..x.len()).rev() {
            x[i] += self.residual_at(i, b, x) * self.inv_diag[i];
        }
    }

    /// One symmetric sweep on `A x = b` starting from the current `x`.
    pub fn smooth(&self, b: &[f64], x: &mut [f64]) {
        self.forward_sweep(b, x);
        self.backward_sweep(b, x);
    }

    fn residual_at(&self, i: usize, b: &[f64], x: &[f64]) -> f64 {
        let (cols, vals) = self.a.row(i);
        let mut s = b[i];
        for (&j, &v) in cols.iter().zip(vals) {
            s -= v * x[j];
        }
        s
    }
}

impl LinearOperator for SgsSmoother {
    fn nrows(&self) -> usize {
        self.inv_diag.len()
    }
    fn ncols(&self) -> usize {
        self.inv_diag.len()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        self.smooth(x, y);
    }
}
