use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::PrecondError;
use crate::fem::{
    assemble_curl, assemble_divergence, assemble_mass, assemble_regular_laplacian, canonical_interpolation,
    p1_element_matrices, MdSpace, PermeabilityField, RegularSpace, RegularWeights,
};
use crate::la::{SparseMatrix, TripletBuilder};
use crate::mesh::{EndKind, MdMesh, Point};

/// Choice of the augmentation parameter α.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy", content = "value")]
pub enum AlphaPolicy {
    Fixed(f64),
    /// `max{1, K_min⁻¹}`
    KMin,
    /// `max{1, 100 K_min⁻¹}`
    KMin100,
}

impl AlphaPolicy {
    pub fn alpha(&self, k_min: f64) -> f64 {
        match *self {
            AlphaPolicy::Fixed(a) => a,
            AlphaPolicy::KMin => 1f64.max(1.0 / k_min),
            AlphaPolicy::KMin100 => 1f64.max(100.0 / k_min),
        }
    }

    /// Whether α respects the admissible lower bound `max{1, K_min⁻¹}`.
    pub fn admissible(alpha: f64, k_min: f64) -> bool {
        alpha >= AlphaPolicy::KMin.alpha(k_min) * (1.0 - 1e-12)
    }
}

/// `𝔄 = A_q + α Bᵀ M_p⁻¹ B = A_q + α Dᵀ M_p D`.
#[derive(Clone, Debug)]
pub struct AugmentedFluxBlock {
    pub a_q: Arc<SparseMatrix>,
    pub b: Arc<SparseMatrix>,
    pub mp: Vec<f64>,
    pub alpha: f64,
    pub matrix: Arc<SparseMatrix>,
}

impl AugmentedFluxBlock {
    pub fn new(a_q: Arc<SparseMatrix>, b: Arc<SparseMatrix>, mp: Vec<f64>, alpha: f64) -> Result<Self, PrecondError> {
        if !(alpha > 0.0) {
            return Err(PrecondError::Invalid(format!("α must be positive, got {alpha}")));
        }
        let s: Vec<f64> = mp.iter().map(|m| 1.0 / m.sqrt()).collect();
        let sb = b.scale_rows(&s);
        let btb = sb.transpose().matmul(&sb)?;
        let matrix = Arc::new(a_q.add_scaled(alpha, &btb)?);
        Ok(Self {
            a_q,
            b,
            mp,
            alpha,
            matrix,
        })
    }
}

impl crate::la::LinearOperator for AugmentedFluxBlock {
    fn nrows(&self) -> usize {
        self.matrix.nrows()
    }
    fn ncols(&self) -> usize {
        self.matrix.ncols()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matrix.mul_vec_into(x, y);
    }
}

/// All discrete operators needed by the solver and the preconditioners, with
/// eliminated (no-flux) DOFs removed.
#[derive(Clone, Debug)]
pub struct FluxOperators {
    pub flux_space: MdSpace,
    pub pressure_space: MdSpace,
    pub potential_space: MdSpace,
    /// Free flux DOFs, as indices into the full flux space.
    pub free_flux: Vec<usize>,
    /// Free potential DOFs: vertices whose curl has no component on an
    /// eliminated flux DOF.
    pub free_potential: Vec<usize>,
    pub a_q: SparseMatrix,
    pub b: SparseMatrix,
    pub d: SparseMatrix,
    pub mp: Vec<f64>,
    pub c: SparseMatrix,
    /// Free regular DOFs: fracture components vanish at immersed tips, where
    /// the flux has no DOF either.
    pub free_regular: Vec<usize>,
    pub pi1: SparseMatrix,
    pub reg1: SparseMatrix,
    /// Weighted P1 mass on free potentials.
    pub m0: SparseMatrix,
    /// Weighted P1 stiffness plus mass on free potentials.
    pub lap0: SparseMatrix,
    pub regular_space: RegularSpace,
}

impl FluxOperators {
    /// Assembles everything; `free_flux = None` keeps all flux DOFs.
    pub fn assemble(
        mesh: &MdMesh,
        perm: &PermeabilityField,
        weights: &RegularWeights,
        free_flux: Option<Vec<usize>>,
    ) -> Result<Self, PrecondError> {
        let flux_space = MdSpace::new(mesh, 1);
        let pressure_space = MdSpace::new(mesh, 2);
        let potential_space = MdSpace::new(mesh, 0);
        let nq = flux_space.total_dofs();
        let free_flux = free_flux.unwrap_or_else(|| (0..nq).collect());
        if free_flux.windows(2).any(|w| w[0] >= w[1]) || free_flux.last().is_some_and(|&l| l >= nq) {
            return Err(PrecondError::Invalid("free flux DOFs must be sorted and in range".into()));
        }
        let mut is_free = vec![false; nq];
        for &f in &free_flux {
            is_free[f] = true;
        }
        let a_full = assemble_mass(mesh, &flux_space, perm)?;
        let div = assemble_divergence(mesh, &flux_space, &pressure_space)?;
        let c_full = assemble_curl(mesh, &potential_space, &flux_space)?;
        let na = potential_space.total_dofs();
        let mut pot_free = vec![true; na];
        for (r, free) in is_free.iter().enumerate() {
            if !free {
                let (cols, vals) = c_full.row(r);
                for (&j, &v) in cols.iter().zip(vals) {
                    if v != 0.0 {
                        pot_free[j] = false;
                    }
                }
            }
        }
        let free_potential: Vec<usize> = (0..na).filter(|&j| pot_free[j]).collect();
        let np = pressure_space.total_dofs();
        let all_p: Vec<usize> = (0..np).collect();
        let regular_space = RegularSpace::new(mesh, 1);
        let pi_full = canonical_interpolation(mesh, &regular_space, &flux_space)?;
        let free_regular = free_regular_dofs(mesh, &regular_space);
        let reg1 = assemble_regular_laplacian(mesh, &regular_space, weights)?.select(&free_regular, &free_regular);
        let (m0_full, lap0_full) = weighted_potential_matrices(mesh, &potential_space, weights);
        Ok(Self {
            a_q: a_full.select(&free_flux, &free_flux),
            b: div.b.select(&all_p, &free_flux),
            d: div.d.select(&all_p, &free_flux),
            mp: div.mp,
            c: c_full.select(&free_flux, &free_potential),
            pi1: pi_full.select(&free_flux, &free_regular),
            reg1,
            m0: m0_full.select(&free_potential, &free_potential),
            lap0: lap0_full.select(&free_potential, &free_potential),
            flux_space,
            pressure_space,
            potential_space,
            free_flux,
            free_potential,
            free_regular,
            regular_space,
        })
    }

    pub fn num_flux(&self) -> usize {
        self.free_flux.len()
    }

    pub fn num_pressure(&self) -> usize {
        self.mp.len()
    }

    /// Expands a free-DOF flux vector to the full flux space (zeros elsewhere).
    pub fn expand_flux(&self, q: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.flux_space.total_dofs()];
        for (&g, &v) in self.free_flux.iter().zip(q) {
            full[g] = v;
        }
        full
    }

    pub fn augmented(&self, alpha: f64) -> Result<AugmentedFluxBlock, PrecondError> {
        AugmentedFluxBlock::new(Arc::new(self.a_q.clone()), Arc::new(self.b.clone()), self.mp.clone(), alpha)
    }
}

fn free_regular_dofs(mesh: &MdMesh, space: &RegularSpace) -> Vec<usize> {
    let mut free = vec![true; space.total_dofs()];
    for i in mesh.ids_of_dim(1) {
        for (v, kind) in mesh.end_kinds(i) {
            if kind == EndKind::Tip {
                free[space.dof(i, 0, v)] = false;
            }
        }
    }
    (0..free.len()).filter(|&d| free[d]).collect()
}

/// P1 mass and stiffness-plus-mass on rock potentials, both weighted per rock
/// by the regular mass weight.
fn weighted_potential_matrices(
    mesh: &MdMesh,
    space: &MdSpace,
    w: &RegularWeights,
) -> (SparseMatrix, SparseMatrix) {
    let n = space.total_dofs();
    let mut m = TripletBuilder::with_capacity(n, n, 7 * n);
    let mut l = TripletBuilder::with_capacity(n, n, 7 * n);
    for i in mesh.ids_of_dim(2) {
        let sm = &mesh.submeshes[i];
        let wi = w.rock_mass[i];
        for cell in &sm.cells {
            let p: Vec<Point> = cell.iter().map(|&v| sm.vertices[v]).collect();
            let (mass, stiff) = p1_element_matrices(&p);
            for a in 0..3 {
                for b in 0..3 {
                    let (da, db) = (space.dof(i, cell[a]).unwrap(), space.dof(i, cell[b]).unwrap());
                    m.add(da, db, wi * mass[3 * a + b]);
                    l.add(da, db, wi * (mass[3 * a + b] + stiff[3 * a + b]));
                }
            }
        }
    }
    (m.build(), l.build())
}
