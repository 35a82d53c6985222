//! Minimal sparse and dense linear algebra.
//!
//! Everything that gets assembled ends up as a [`SparseMatrix`] (CSR), and
//! everything that gets applied goes through the [`LinearOperator`] trait:
//! matrices, smoothers, multigrid cycles, preconditioners, and inner Krylov
//! solves all compose through it.

mod csr;
mod dense;
pub mod mtx;
mod operator;

pub use csr::{SparseMatrix, TripletBuilder};
pub use dense::{dense_eigs_sym, dense_rank, dense_solve, DenseLu, DenseMatrix, DENSE_LIMIT};
pub use operator::{
    axpy, dot, norm2, IdentityOperator, LinearOperator, ScaledOperator, SumOperator,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LaError {
    #[error("dimension mismatch in {op}: expected {expected}, got {got}")]
    DimensionMismatch {
        op: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("matrix is singular to working precision (pivot {pivot} at column {column})")]
    Singular { column: usize, pivot: f64 },
    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,
    #[error("matrix is too large for dense processing ({size} > {limit})")]
    TooLarge { size: usize, limit: usize },
    #[error("operation not supported: {0}")]
    Unsupported(&'static str),
    #[error("matrix market parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn check_dim(op: &'static str, expected: usize, got: usize) -> Result<(), LaError> {
    if expected == got {
        Ok(())
    } else {
        Err(LaError::DimensionMismatch { op, expected, got })
    }
}
