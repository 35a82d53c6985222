use serde::Serialize;

use super::{boundary_entities, BoundaryEntity, DarcyError, SaddleSystem, Solution};
use crate::la::{dense_eigs_sym, DenseLu, DenseMatrix, LaError, DENSE_LIMIT};
use crate::precond::AugmentedFluxBlock;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MassBalance {
    /// `‖M_p D q − M_p f‖` restricted to each subdomain.
    pub per_subdomain: Vec<f64>,
    pub global: f64,
    /// Sum of all entries of `M_p D q − M_p f`.
    pub global_sum: f64,
    /// `‖M_p f‖`.
    pub rhs_norm: f64,
}

pub fn mass_balance_report(solution: &Solution, system: &SaddleSystem) -> MassBalance {
    let q: Vec<f64> = system.free_flux.iter().map(|&i| solution.flux[i]).collect();
    let bq = system.b.spmv(&q).expect("flux length matches the system");
    let r: Vec<f64> = bq.iter().zip(&system.f).map(|(a, b)| a - b).collect();
    let ns = system.problem.mesh.num_subdomains();
    let per_subdomain = (0..ns)
        .map(|s| r[system.pressure_space.range(s)].iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    MassBalance {
        per_subdomain,
        global: crate::la::norm2(&r),
        global_sum: r.iter().sum(),
        rhs_norm: crate::la::norm2(&system.f),
    }
}

/// Net outflow through the outer boundary, read off the boundary flux DOFs.
pub fn net_boundary_outflux(solution: &Solution, system: &SaddleSystem) -> f64 {
    let mesh = &system.problem.mesh;
    let mut total = 0.0;
    for (e, _) in boundary_entities(mesh) {
        match e {
            BoundaryEntity::RockFacet { sub, facet } => {
                total += solution.flux[system.flux_space.dof(sub, facet).unwrap()];
            }
            BoundaryEntity::FractureEnd { sub, vertex } => {
                let (_, end) = mesh.submeshes[sub].endpoints().unwrap();
                let eps = if vertex == end { 1.0 } else { -1.0 };
                total += eps * solution.flux[system.flux_space.dof(sub, vertex).unwrap()];
            }
        }
    }
    total
}

/// Inf-sup constant of the divergence pairing in the α-weighted norms:
/// `γ_B² = λ_min(B 𝔄⁻¹ Bᵀ, α⁻¹ M_p)` with `𝔄 = A_q + α Bᵀ M_p⁻¹ B`.
pub fn inf_sup_constant(system: &SaddleSystem, alpha: f64) -> Result<f64, DarcyError> {
    let nq = system.num_flux();
    if nq > DENSE_LIMIT {
        return Err(LaError::TooLarge { size: nq, limit: DENSE_LIMIT }.into());
    }
    let aug = AugmentedFluxBlock::new(system.a_q.clone(), system.b.clone(), system.mp.clone(), alpha)?;
    let lu = DenseLu::new(&aug.matrix.to_dense())?;
    let np = system.num_pressure();
    let bd = system.b.to_dense();
    let mut x = DenseMatrix::zeros(nq, np);
    let mut col = vec![0.0; nq];
    for j in 0..np {
        for (i, c) in col.iter_mut().enumerate() {
            *c = bd[(j, i)];
        }
        let y = lu.solve(&col);
        for (i, v) in y.into_iter().enumerate() {
            x[(i, j)] = v;
        }
    }
    let s = bd.matmul(&x)?;
    let mut sym = DenseMatrix::zeros(np, np);
    for i in 0..np {
        for j in 0..np {
            sym[(i, j)] = 0.5 * (s[(i, j)] + s[(j, i)]);
        }
    }
    let m = DenseMatrix::from_diagonal(&system.mp.iter().map(|v| v / alpha).collect::<Vec<_>>());
    let eigs = dense_eigs_sym(&sym, &m)?;
    let lmin = eigs.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(lmin.max(0.0).sqrt())
}
