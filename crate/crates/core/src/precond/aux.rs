use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{AugmentedFluxBlock, FluxOperators, ManifestTerm, PrecondError};
use crate::fem::{PermeabilityField, RegularWeights};
use crate::la::{axpy, LinearOperator, SparseMatrix};
use crate::mesh::MdMesh;
use crate::solvers::{AmgConfig, AmgHierarchy, JacobiSmoother, SgsSmoother};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmootherKind {
    Jacobi,
    Sgs,
}

/// Operator whose AMG hierarchy serves as the potential-space solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurlRegular {
    /// `Cᵀ 𝔄 C + M⁰` with `M⁰` the weighted P1 mass.
    Galerkin,
    /// Weighted P1 stiffness plus mass.
    Laplacian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightPolicy {
    /// Plain `H¹` weights.
    Unit,
    /// Mass weights from `K⁻¹`, stiffness weights from α.
    Coefficient,
}

impl WeightPolicy {
    pub fn weights(&self, mesh: &MdMesh, perm: &PermeabilityField, alpha: f64) -> RegularWeights {
        match self {
            WeightPolicy::Unit => RegularWeights::unit(mesh),
            WeightPolicy::Coefficient => RegularWeights::policy(mesh, perm, alpha),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuxConfig {
    pub amg: AmgConfig,
    pub curl_smoother: SmootherKind,
    pub curl_regular: CurlRegular,
    pub weights: WeightPolicy,
}

impl Default for AuxConfig {
    fn default() -> Self {
        Self {
            amg: AmgConfig::default(),
            curl_smoother: SmootherKind::Sgs,
            curl_regular: CurlRegular::Galerkin,
            weights: WeightPolicy::Coefficient,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuxTerm {
    /// `(S¹)⁻¹`
    Smoother,
    /// `Π B¹_reg Πᵀ`
    Regular,
    /// `C (S⁰)⁻¹ Cᵀ`
    CurlSmoother,
    /// `C B⁰_reg Cᵀ`
    CurlRegular,
}

impl AuxTerm {
    pub const ALL: [AuxTerm; 4] = [AuxTerm::Smoother, AuxTerm::Regular, AuxTerm::CurlSmoother, AuxTerm::CurlRegular];
}

/// `𝔅_q = (S¹)⁻¹ + Π B¹_reg Πᵀ + C (S⁰)⁻¹ Cᵀ + C B⁰_reg Cᵀ`.
pub struct AuxSpacePreconditioner {
    s1: SgsSmoother,
    pi: SparseMatrix,
    b1: AmgHierarchy,
    c: SparseMatrix,
    s0: Box<dyn LinearOperator>,
    b0: AmgHierarchy,
    pub config: AuxConfig,
}

impl std::fmt::Debug for AuxSpacePreconditioner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AuxSpacePreconditioner").field("terms", &self.manifest()).finish()
    }
}

impl AuxSpacePreconditioner {
    pub fn new(ops: &FluxOperators, aug: &AugmentedFluxBlock, config: AuxConfig) -> Result<Self, PrecondError> {
        let a = aug.matrix.clone();
        if ops.pi1.nrows() != a.nrows() || ops.c.nrows() != a.nrows() {
            return Err(PrecondError::Invalid("operator shapes do not match the flux block".into()));
        }
        let s1 = SgsSmoother::new(a.clone())?;
        let b1 = AmgHierarchy::new(&ops.reg1, config.amg)?;
        let g = SparseMatrix::triple_product(&ops.c.transpose(), &a)?;
        let s0: Box<dyn LinearOperator> = match config.curl_smoother {
            SmootherKind::Jacobi => Box::new(JacobiSmoother::new(&g)?),
            SmootherKind::Sgs => Box::new(SgsSmoother::new(Arc::new(g.clone()))?),
        };
        let reg0 = match config.curl_regular {
            CurlRegular::Galerkin => g.add_scaled(1.0, &ops.m0)?,
            CurlRegular::Laplacian => ops.lap0.clone(),
        };
        let b0 = AmgHierarchy::new(&reg0, config.amg)?;
        Ok(Self {
            s1,
            pi: ops.pi1.clone(),
            b1,
            c: ops.c.clone(),
            s0,
            b0,
            config,
        })
    }

    /// Builds the operators without boundary elimination and the
    /// preconditioner for the augmented block with parameter α.
    pub fn build(
        mesh: &MdMesh,
        perm: &PermeabilityField,
        alpha: f64,
        config: AuxConfig,
    ) -> Result<(FluxOperators, AugmentedFluxBlock, Self), PrecondError> {
        let weights = config.weights.weights(mesh, perm, alpha);
        let ops = FluxOperators::assemble(mesh, perm, &weights, None)?;
        let aug = ops.augmented(alpha)?;
        let p = Self::new(&ops, &aug, config)?;
        Ok((ops, aug, p))
    }

    /// Applies a single additive term.
    pub fn apply_term(&self, term: AuxTerm, x: &[f64]) -> Vec<f64> {
        match term {
            AuxTerm::Smoother => self.s1.apply_vec(x),
            AuxTerm::Regular => {
                let t = self.pi.transpose_apply(x);
                self.pi.apply_vec(&self.b1.apply_vec(&t))
            }
            AuxTerm::CurlSmoother => {
                let t = self.c.transpose_apply(x);
                self.c.apply_vec(&self.s0.apply_vec(&t))
            }
            AuxTerm::CurlRegular => {
                let t = self.c.transpose_apply(x);
                self.c.apply_vec(&self.b0.apply_vec(&t))
            }
        }
    }

    pub fn manifest(&self) -> Vec<ManifestTerm> {
        let n = self.s1.matrix().nrows();
        vec![
            ManifestTerm {
                name: "flux smoother SGS(A_aug)".into(),
                shape: [n, n],
                amg_levels: Vec::new(),
            },
            ManifestTerm {
                name: "Pi B1_reg Pi^T".into(),
                shape: [self.pi.nrows(), self.pi.ncols()],
                amg_levels: self.b1.level_sizes(),
            },
            ManifestTerm {
                name: format!("C S0^-1 C^T ({:?})", self.config.curl_smoother).to_lowercase(),
                shape: [self.c.nrows(), self.c.ncols()],
                amg_levels: Vec::new(),
            },
            ManifestTerm {
                name: format!("C B0_reg C^T ({:?})", self.config.curl_regular).to_lowercase(),
                shape: [self.c.nrows(), self.c.ncols()],
                amg_levels: self.b0.level_sizes(),
            },
        ]
    }

    pub fn regular_hierarchy(&self) -> &AmgHierarchy {
        &self.b1
    }

    pub fn curl_hierarchy(&self) -> &AmgHierarchy {
        &self.b0
    }
}

trait TransposeApply {
    fn transpose_apply(&self, x: &[f64]) -> Vec<f64>;
}

impl TransposeApply for SparseMatrix {
    fn transpose_apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.ncols()];
        self.mul_transpose_vec_into(x, &mut y);
        y
    }
}

impl LinearOperator for AuxSpacePreconditioner {
    fn nrows(&self) -> usize {
        self.s1.matrix().nrows()
    }
    fn ncols(&self) -> usize {
        self.s1.matrix().nrows()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.s1.apply(x, y);
        for term in &AuxTerm::ALL[1..] {
            axpy(1.0, &self.apply_term(*term, x), y);
        }
    }
}
