use std::sync::Arc;

use super::{BoundaryConditions, BoundaryEntity, BoundaryValue, DarcyError};
use crate::fem::{MdSpace, PermeabilityField, RegularWeights};
use crate::la::{dense_solve, LinearOperator, SparseMatrix, TripletBuilder, DENSE_LIMIT};
use crate::mesh::MdMesh;
use crate::precond::FluxOperators;

/// Mixed-dimensional Darcy problem: permeabilities are effective values, so
/// fracture apertures are already folded into `perm`.
#[derive(Clone, Debug)]
pub struct DarcyProblem {
    pub mesh: Arc<MdMesh>,
    pub perm: PermeabilityField,
    /// Source per pressure DOF (P0 coefficient on every cell).
    pub source: Vec<f64>,
    pub bc: BoundaryConditions,
}

impl DarcyProblem {
    /// Problem without sources.
    pub fn new(mesh: Arc<MdMesh>, perm: PermeabilityField, bc: BoundaryConditions) -> Self {
        let np = MdSpace::new(&mesh, 2).total_dofs();
        Self {
            mesh,
            perm,
            source: vec![0.0; np],
            bc,
        }
    }

    pub fn with_source(mut self, source: Vec<f64>) -> Self {
        self.source = source;
        self
    }
}

/// `[[A_q, −Bᵀ], [s B, 0]] (q, p) = (g, s f)` on the free flux DOFs.
#[derive(Clone, Debug)]
pub struct SaddleSystem {
    pub problem: DarcyProblem,
    pub flux_space: MdSpace,
    pub pressure_space: MdSpace,
    /// Free flux DOFs as indices into the full flux space.
    pub free_flux: Vec<usize>,
    pub a_q: Arc<SparseMatrix>,
    pub b: Arc<SparseMatrix>,
    pub d: SparseMatrix,
    pub mp: Vec<f64>,
    /// Flux right-hand side from the pressure conditions.
    pub g: Vec<f64>,
    /// `M_p f`.
    pub f: Vec<f64>,
    /// Sign of the constraint row.
    pub sign: f64,
}

impl SaddleSystem {
    pub fn assemble(problem: &DarcyProblem) -> Result<Self, DarcyError> {
        let mesh = &*problem.mesh;
        let bcs = problem.bc.resolve(mesh)?;
        let flux_space = MdSpace::new(mesh, 1);
        let nq = flux_space.total_dofs();
        let mut g_full = vec![0.0; nq];
        let mut eliminated = vec![false; nq];
        let mut any_pressure = false;
        for (e, v) in &bcs {
            let (dof, outward) = match *e {
                BoundaryEntity::RockFacet { sub, facet } => (flux_space.dof(sub, facet), 1.0),
                BoundaryEntity::FractureEnd { sub, vertex } => {
                    let (start, end) = mesh.submeshes[sub].endpoints().ok_or_else(|| {
                        DarcyError::Input(format!("fracture {sub} is not a simple path"))
                    })?;
                    let eps = if vertex == end {
                        1.0
                    } else if vertex == start {
                        -1.0
                    } else {
                        return Err(DarcyError::Input(format!("vertex {vertex} is not an end of fracture {sub}")));
                    };
                    (flux_space.dof(sub, vertex), eps)
                }
            };
            let dof = dof.ok_or_else(|| DarcyError::Input(format!("{e:?} carries no flux DOF")))?;
            match *v {
                BoundaryValue::Pressure(p) => {
                    g_full[dof] -= p * outward;
                    any_pressure = true;
                }
                BoundaryValue::NoFlux => eliminated[dof] = true,
            }
        }
        if !any_pressure {
            return Err(DarcyError::Singular);
        }
        let free_flux: Vec<usize> = (0..nq).filter(|&i| !eliminated[i]).collect();
        let ops = FluxOperators::assemble(mesh, &problem.perm, &RegularWeights::unit(mesh), Some(free_flux.clone()))?;
        if problem.source.len() != ops.num_pressure() {
            return Err(DarcyError::Input(format!(
                "source has {} entries, expected {}",
                problem.source.len(),
                ops.num_pressure()
            )));
        }
        let f = problem.source.iter().zip(&ops.mp).map(|(s, m)| s * m).collect();
        let g = free_flux.iter().map(|&i| g_full[i]).collect();
        Ok(Self {
            problem: problem.clone(),
            flux_space,
            pressure_space: ops.pressure_space,
            free_flux,
            a_q: Arc::new(ops.a_q),
            b: Arc::new(ops.b),
            d: ops.d,
            mp: ops.mp,
            g,
            f,
            sign: 1.0,
        })
    }

    /// Flips the sign of the constraint row and its right-hand side.
    pub fn with_sign(mut self, s: f64) -> Self {
        self.sign = s;
        self
    }

    pub fn num_flux(&self) -> usize {
        self.free_flux.len()
    }

    pub fn num_pressure(&self) -> usize {
        self.mp.len()
    }

    pub fn num_dofs(&self) -> usize {
        self.num_flux() + self.num_pressure()
    }

    pub fn rhs(&self) -> Vec<f64> {
        let mut r = self.g.clone();
        r.extend(self.f.iter().map(|v| self.sign * v));
        r
    }

    /// The full system matrix.
    pub fn matrix(&self) -> SparseMatrix {
        let (nq, n) = (self.num_flux(), self.num_dofs());
        let mut t = TripletBuilder::with_capacity(n, n, self.a_q.nnz() + 2 * self.b.nnz());
        for i in 0..nq {
            let (cols, vals) = self.a_q.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                t.add(i, j, v);
            }
        }
        for p in 0..self.num_pressure() {
            let (cols, vals) = self.b.row(p);
            for (&j, &v) in cols.iter().zip(vals) {
                t.add(nq + p, j, self.sign * v);
                t.add(j, nq + p, -v);
            }
        }
        t.build()
    }

    /// Direct solve of the full system (small problems only).
    pub fn dense_solve(&self) -> Result<Vec<f64>, DarcyError> {
        let n = self.num_dofs();
        if n > DENSE_LIMIT {
            return Err(crate::la::LaError::TooLarge { size: n, limit: DENSE_LIMIT }.into());
        }
        Ok(dense_solve(&self.matrix().to_dense(), &self.rhs())?)
    }

    /// Expands a free-DOF flux vector to the full flux space.
    pub fn expand_flux(&self, q: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.flux_space.total_dofs()];
        for (&g, &v) in self.free_flux.iter().zip(q) {
            full[g] = v;
        }
        full
    }
}

impl LinearOperator for SaddleSystem {
    fn nrows(&self) -> usize {
        self.num_dofs()
    }
    fn ncols(&self) -> usize {
        self.num_dofs()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let nq = self.num_flux();
        let (q, p) = x.split_at(nq);
        let (yq, yp) = y.split_at_mut(nq);
        self.a_q.mul_vec_into(q, yq);
        let mut bt = vec![0.0; nq];
        self.b.mul_transpose_vec_into(p, &mut bt);
        for (a, b) in yq.iter_mut().zip(&bt) {
            *a -= b;
        }
        self.b.mul_vec_into(q, yp);
        if self.sign != 1.0 {
            yp.iter_mut().for_each(|v| *v *= self.sign);
        }
    }
}
