use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{SgsSmoother, SolverError};
use crate::la::{DenseLu, LinearOperator, SparseMatrix, TripletBuilder};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cycle {
    V,
    W,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmgConfig {
    /// Strength threshold θ in `|a_ij| ≥ θ √(a_ii a_jj)`.
    pub theta: f64,
    /// Pairwise matching passes per level (2 gives aggregates of up to 4).
    pub passes: usize,
    pub cycle: Cycle,
    /// Levels at or below this size are solved directly.
    pub max_coarse: usize,
    pub pre_smooth: usize,
    pub post_smooth: usize,
    pub max_levels: usize,
}

impl Default for AmgConfig {
    fn default() -> Self {
        Self {
            theta: 0.08,
            passes: 2,
            cycle: Cycle::W,
            max_coarse: 64,
            pre_smooth: 1,
            post_smooth: 1,
            max_levels: 25,
        }
    }
}

/// Dense direct solves are used on a stalled coarsest level up to this size.
const DENSE_FALLBACK: usize = 1024;
/// Sweeps used when the coarsest level is too large for a dense solve.
const COARSE_SWEEPS: usize = 20;

#[derive(Clone, Debug)]
pub struct AmgLevel {
    pub a: Arc<SparseMatrix>,
    /// Prolongation to this level from the next coarser one (absent on the coarsest).
    pub p: Option<SparseMatrix>,
    pub r: Option<SparseMatrix>,
    pub aggregates: Vec<usize>,
    smoother: SgsSmoother,
}

enum CoarseSolver {
    Dense(DenseLu),
    Sweeps,
}

/// Unsmoothed-aggregation multigrid hierarchy; one cycle per application.
pub struct AmgHierarchy {
    pub levels: Vec<AmgLevel>,
    pub config: AmgConfig,
    coarse: CoarseSolver,
}

impl std::fmt::Debug for AmgHierarchy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AmgHierarchy")
            .field("sizes", &self.level_sizes())
            .field("config", &self.config)
            .finish()
    }
}

/// One greedy pairwise matching pass in natural row order.
///
/// Each unmatched row is paired with its strongest unmatched strong neighbour
/// (ties go to the lowest index) or left as a singleton. Returns the aggregate
/// index of every row and the number of aggregates.
pub fn pairwise_aggregate(a: &SparseMatrix, theta: f64) -> (Vec<usize>, usize) {
    let n = a.nrows();
    let diag = a.diagonal();
    let mut agg = vec![usize::MAX; n];
    let mut count = 0;
    for i in 0..n {
        if agg[i] != usize::MAX {
            continue;
        }
        let (cols, vals) = a.row(i);
        let mut best: Option<(usize, f64)> = None;
        for (&j, &v) in cols.iter().zip(vals) {
            if j == i || agg[j] != usize::MAX {
                continue;
            }
            let s = v.abs();
            if s < theta * (diag[i] * diag[j]).abs().sqrt() || s == 0.0 {
                continue;
            }
            if best.is_none_or(|(_, bs)| s > bs) {
                best = Some((j, s));
            }
        }
        agg[i] = count;
        if let Some((j, _)) = best {
            agg[j] = count;
        }
        count += 1;
    }
    (agg, count)
}

fn prolongation(agg: &[usize], nc: usize) -> SparseMatrix {
    let mut b = TripletBuilder::with_capacity(agg.len(), nc, agg.len());
    for (i, &g) in agg.iter().enumerate() {
        b.add(i, g, 1.0);
    }
    b.build()
}

impl AmgHierarchy {
    pub fn new(a: &SparseMatrix, config: AmgConfig) -> Result<Self, SolverError> {
        let asym = a.asymmetry();
        if asym > 1e-10 {
            return Err(SolverError::NotSymmetric { asymmetry: asym });
        }
        if config.passes == 0 || !(config.theta >= 0.0) {
            return Err(SolverError::InvalidConfig(
                "AMG needs at least one pass and a non-negative threshold".into(),
            ));
        }
        let mut levels = Vec::new();
        let mut cur = Arc::new(a.clone());
        loop {
            let n = cur.nrows();
            let smoother = SgsSmoother::new(cur.clone())?;
            if n <= config.max_coarse || levels.len() + 1 >= config.max_levels {
                levels.push(AmgLevel {
                    a: cur,
                    p: None,
                    r: None,
                    aggregates: Vec::new(),
                    smoother,
                });
                break;
            }
            let mut agg: Vec<usize> = (0..n).collect();
            let mut nc = n;
            let mut work = (*cur).clone();
            for _ in 0..config.passes {
                let (pass_agg, pass_nc) = pairwise_aggregate(&work, config.theta);
                if pass_nc == nc {
                    break;
                }
                let p = prolongation(&pass_agg, pass_nc);
                work = SparseMatrix::triple_product(&p.transpose(), &work)?;
                for g in agg.iter_mut() {
                    *g = pass_agg[*g];
                }
                nc = pass_nc;
            }
            if nc as f64 > 0.9 * n as f64 {
                levels.push(AmgLevel {
                    a: cur,
                    p: None,
                    r: None,
                    aggregates: Vec::new(),
                    smoother,
                });
                break;
            }
            let p = prolongation(&agg, nc);
            let r = p.transpose();
            let coarse = SparseMatrix::triple_product(&r, &cur)?;
            levels.push(AmgLevel {
                a: cur,
                p: Some(p),
                r: Some(r),
                aggregates: agg,
                smoother,
            });
            cur = Arc::new(coarse);
        }
        let last = &levels.last().unwrap().a;
        let coarse = if last.nrows() <= config.max_coarse.max(DENSE_FALLBACK) {
            match DenseLu::new(&last.to_dense()) {
                Ok(lu) => CoarseSolver::Dense(lu),
                Err(_) => CoarseSolver::Sweeps,
            }
        } else {
            CoarseSolver::Sweeps
        };
        Ok(Self {
            levels,
            config,
            coarse,
        })
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.a.nrows()).collect()
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// Relative Frobenius defect of `Pᵀ A_l P − A_{l+1}` per level.
    pub fn galerkin_defects(&self) -> Vec<f64> {
        self.levels
            .windows(2)
            .map(|w| {
                let (p, r) = (w[0].p.as_ref().unwrap(), w[0].r.as_ref().unwrap());
                let rap = r.matmul(&w[0].a).unwrap().matmul(p).unwrap();
                let d = rap.add_scaled(-1.0, &w[1].a).unwrap();
                d.frobenius_norm() / w[1].a.frobenius_norm().max(f64::MIN_POSITIVE)
            })
            .collect()
    }

    pub fn operator_complexity(&self) -> f64 {
        let total: usize = self.levels.iter().map(|l| l.a.nnz()).sum();
        total as f64 / self.levels[0].a.nnz().max(1) as f64
    }

    fn cycle(&self, l: usize, b: &[f64], x: &mut [f64]) {
        let level = &self.levels[l];
        if l + 1 == self.levels.len() {
            match &self.coarse {
                CoarseSolver::Dense(lu) => x.copy_from_slice(&lu.solve(b)),
                CoarseSolver::Sweeps => {
                    for _ in 0..COARSE_SWEEPS {
                        level.smoother.smooth(b, x);
                    }
                }
            }
            return;
        }
        for _ in 0..self.config.pre_smooth {
            level.smoother.smooth(b, x);
        }
        let ax = level.a.apply_vec(x);
        let res: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        let r = level.r.as_ref().unwrap();
        let rc = r.apply_vec(&res);
        let mut ec = vec![0.0; rc.len()];
        let visits = match self.config.cycle {
            Cycle::V => 1,
            Cycle::W => 2,
        };
        for _ in 0..visits {
            self.cycle(l + 1, &rc, &mut ec);
        }
        let e = level.p.as_ref().unwrap().apply_vec(&ec);
        for (xi, ei) in x.iter_mut().zip(&e) {
            *xi += ei;
        }
        for _ in 0..self.config.post_smooth {
            level.smoother.smooth(b, x);
        }
    }
}

impl LinearOperator for AmgHierarchy {
    fn nrows(&self) -> usize {
        self.levels[0].a.nrows()
    }
    fn ncols(&self) -> usize {
        self.levels[0].a.nrows()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        self.cycle(0, x, y);
    }
}
