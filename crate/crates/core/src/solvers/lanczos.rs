use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::SolverError;
use crate::la::{axpy, dot, LinearOperator};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LanczosResult {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub steps: usize,
    /// An invariant subspace was found before `k` steps; the Ritz values are exact
    /// for that subspace.
    pub early_exit: bool,
}

impl LanczosResult {
    pub fn condition(&self) -> f64 {
        self.lambda_max / self.lambda_min
    }
}

/// Extreme Ritz values of `A` after `k` Lanczos steps in the `M` inner product.
///
/// `A` must be self-adjoint with respect to `⟨x, y⟩_M = xᵀ M y`. Full
/// reorthogonalization is used; the start vector is drawn from a fixed seed.
pub fn lanczos_extreme_eigs(
    a: &dyn LinearOperator,
    m: &dyn LinearOperator,
    k: usize,
) -> Result<LanczosResult, SolverError> {
    if k < 10 {
        return Err(SolverError::InvalidConfig("Lanczos needs at least 10 steps".into()));
    }
    let n = a.nrows();
    let k = k.min(n.max(1));
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut mv = m.apply_vec(&v);
    let nrm2 = dot(&v, &mv);
    if !(nrm2 > 0.0) {
        return Err(SolverError::IndefiniteInnerProduct { step: 0 });
    }
    let s = 1.0 / nrm2.sqrt();
    v.iter_mut().for_each(|x| *x *= s);
    mv.iter_mut().for_each(|x| *x *= s);

    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut mbasis: Vec<Vec<f64>> = vec![mv];
    let mut alpha: Vec<f64> = Vec::with_capacity(k);
    let mut beta: Vec<f64> = Vec::with_capacity(k);
    let mut early = false;
    let mut scale = 0.0f64;
    for j in 0..k {
        let mut w = a.apply_vec(&basis[j]);
        let aj = dot(&w, &mbasis[j]);
        alpha.push(aj);
        scale = scale.max(aj.abs());
        for _ in 0..2 {
            for (vi, mvi) in basis.iter().zip(&mbasis) {
                let c = dot(&w, mvi);
                axpy(-c, vi, &mut w);
            }
        }
        if j + 1 == k {
            break;
        }
        let mw = m.apply_vec(&w);
        let b2 = dot(&w, &mw);
        if b2 < -1e-12 * scale * scale {
            return Err(SolverError::IndefiniteInnerProduct { step: j + 1 });
        }
        let bj = b2.max(0.0).sqrt();
        if bj <= 1e-10 * scale {
            early = true;
            break;
        }
        beta.push(bj);
        basis.push(w.iter().map(|x| x / bj).collect());
        mbasis.push(mw.iter().map(|x| x / bj).collect());
    }
    let steps = alpha.len();
    let mut t = DMatrix::<f64>::zeros(steps, steps);
    for i in 0..steps {
        t[(i, i)] = alpha[i];
        if i + 1 < steps {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let ev = t.symmetric_eigen().eigenvalues;
    let lambda_min = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let lambda_max = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(LanczosResult {
        lambda_min,
        lambda_max,
        steps,
        early_exit: early,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::la::{IdentityOperator, SparseMatrix};

    #[test]
    fn diagonal_spectrum() {
        let d: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let a = SparseMatrix::diagonal_from(&d);
        let r = lanczos_extreme_eigs(&a, &IdentityOperator(100), 40).unwrap();
        assert!((r.lambda_max - 100.0).abs() <= 1.0);
        assert!(r.lambda_min >= 1.0 - 1e-10);
    }

    #[test]
    fn identity_is_exact() {
        let r = lanczos_extreme_eigs(&IdentityOperator(50), &IdentityOperator(50), 20).unwrap();
        assert!((r.lambda_min - 1.0).abs() < 1e-12 && (r.lambda_max - 1.0).abs() < 1e-12);
        assert!(r.early_exit);
    }

    #[test]
    fn generalized_inner_product() {
        // A = M⁻¹K with K = diag(2, 6, 12), M = diag(1, 2, 3) has eigenvalues 2, 3, 4
        struct MinvK;
        impl LinearOperator for MinvK {
            fn nrows(&self) -> usize {
                3
            }
            fn ncols(&self) -> usize {
                3
            }
            fn apply(&self, x: &[f64], y: &mut [f64]) {
                y[0] = 2.0 * x[0];
                y[1] = 3.0 * x[1];
                y[2] = 4.0 * x[2];
            }
        }
        let m = SparseMatrix::diagonal_from(&[1.0, 2.0, 3.0]);
        let r = lanczos_extreme_eigs(&MinvK, &m, 10).unwrap();
        assert!((r.lambda_min - 2.0).abs() < 1e-10 && (r.lambda_max - 4.0).abs() < 1e-10);
    }

    #[test]
    fn too_few_steps_is_an_error() {
        assert!(lanczos_extreme_eigs(&IdentityOperator(5), &IdentityOperator(5), 3).is_err());
    }
}
