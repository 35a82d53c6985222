use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::AugmentedFluxBlock;
use crate::la::LinearOperator;
use crate::solvers::{gmres, KrylovConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockKind {
    /// `diag(M_q, α M_p⁻¹)`
    D,
    /// Lower block triangular: flux solve, then pressure update with `−B`.
    L,
    /// Upper block triangular: pressure scaling, then flux solve with `+Bᵀ`.
    U,
}

impl std::str::FromStr for BlockKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "D" | "d" => Ok(BlockKind::D),
            "L" | "l" => Ok(BlockKind::L),
            "U" | "u" => Ok(BlockKind::U),
            other => Err(format!("unknown block preconditioner kind '{other}' (expected D, L or U)")),
        }
    }
}

/// Counters of the inner flux solves.
#[derive(Debug, Default)]
pub struct InnerStats {
    calls: AtomicUsize,
    iterations: AtomicUsize,
    unconverged: AtomicUsize,
}

impl InnerStats {
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn iterations(&self) -> usize {
        self.iterations.load(Ordering::Relaxed)
    }

    pub fn unconverged(&self) -> usize {
        self.unconverged.load(Ordering::Relaxed)
    }

    pub fn average(&self) -> f64 {
        let c = self.calls();
        if c == 0 {
            0.0
        } else {
            self.iterations() as f64 / c as f64
        }
    }

    pub fn reset(&self) {
        self.calls.store(0, Ordering::Relaxed);
        self.iterations.store(0, Ordering::Relaxed);
        self.unconverged.store(0, Ordering::Relaxed);
    }
}

/// Block preconditioner for `[[A_q, −Bᵀ], [B, 0]]`.
///
/// The flux block `M_q` is an inner GMRES solve on the augmented block,
/// preconditioned by `flux_prec`; the pressure block is `α M_p⁻¹`.
pub struct BlockPreconditioner {
    pub kind: BlockKind,
    pub aug: Arc<AugmentedFluxBlock>,
    flux_prec: Arc<dyn LinearOperator>,
    pub inner: KrylovConfig,
    pub stats: InnerStats,
    /// Exact inner solves: `flux_prec` is applied once instead of GMRES.
    direct: bool,
    /// Sign of the constraint row of the system being preconditioned.
    pressure_sign: f64,
}

impl BlockPreconditioner {
    pub fn new(
        kind: BlockKind,
        aug: Arc<AugmentedFluxBlock>,
        flux_prec: Arc<dyn LinearOperator>,
        inner: KrylovConfig,
    ) -> Self {
        Self {
            kind,
            aug,
            flux_prec,
            inner,
            stats: InnerStats::default(),
            direct: false,
            pressure_sign: 1.0,
        }
    }

    /// Preconditions `[[A_q, −Bᵀ], [s B, 0]]` instead; `s` must be ±1.
    pub fn with_pressure_sign(mut self, s: f64) -> Self {
        self.pressure_sign = s;
        self
    }

    /// Uses `flux_inverse` directly as `M_q` (e.g. a dense factorization).
    pub fn with_exact_flux(kind: BlockKind, aug: Arc<AugmentedFluxBlock>, flux_inverse: Arc<dyn LinearOperator>) -> Self {
        Self {
            direct: true,
            ..Self::new(kind, aug, flux_inverse, KrylovConfig::inner())
        }
    }

    fn nq(&self) -> usize {
        self.aug.matrix.nrows()
    }

    fn flux_solve(&self, r: &[f64]) -> Vec<f64> {
        if self.direct {
            return self.flux_prec.apply_vec(r);
        }
        let (x, rep) = gmres(&*self.aug, r, Some(&*self.flux_prec), &self.inner)
            .expect("inner solve shapes are fixed at construction");
        self.stats.calls.fetch_add(1, Ordering::Relaxed);
        self.stats.iterations.fetch_add(rep.iterations, Ordering::Relaxed);
        if !rep.converged {
            self.stats.unconverged.fetch_add(1, Ordering::Relaxed);
        }
        x
    }

    /// `α M_p⁻¹ r`
    pub fn pressure_apply(&self, r: &[f64]) -> Vec<f64> {
        r.iter().zip(&self.aug.mp).map(|(v, m)| self.aug.alpha * v / m).collect()
    }
}

impl LinearOperator for BlockPreconditioner {
    fn nrows(&self) -> usize {
        self.nq() + self.aug.mp.len()
    }
    fn ncols(&self) -> usize {
        self.nrows()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let nq = self.nq();
        let (rq, rp) = x.split_at(nq);
        let signed: Vec<f64>;
        let rp = if self.pressure_sign == 1.0 {
            rp
        } else {
            signed = rp.iter().map(|v| self.pressure_sign * v).collect();
            &signed
        };
        let (zq, zp) = match self.kind {
            BlockKind::D => (self.flux_solve(rq), self.pressure_apply(rp)),
            BlockKind::L => {
                let zq = self.flux_solve(rq);
                let bz = self.aug.b.apply_vec(&zq);
                let t: Vec<f64> = rp.iter().zip(&bz).map(|(a, b)| a - b).collect();
                (zq, self.pressure_apply(&t))
            }
            BlockKind::U => {
                let zp = self.pressure_apply(rp);
                let mut t = vec![0.0; nq];
                self.aug.b.mul_transpose_vec_into(&zp, &mut t);
                for (ti, ri) in t.iter_mut().zip(rq) {
                    *ti += ri;
                }
                (self.flux_solve(&t), zp)
            }
        };
        y[..nq].copy_from_slice(&zq);
        y[nq..].copy_from_slice(&zp);
    }
}
