use serde::Serialize;

use super::{
    assemble_curl, assemble_divergence_signed, canonical_interpolation, nodal_regular, FemError, MdSpace,
    RegularField, RegularSpace,
};
use crate::la::{dense_rank, norm2, DENSE_LIMIT};
use crate::mesh::{EndKind, MdMesh};

/// Structural diagnostics of the discrete complex on one mesh.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComplexReport {
    pub flux_dofs: usize,
    pub potential_dofs: usize,
    pub pressure_dofs: usize,
    /// `max |(D¹ D⁰)_ij|`
    pub max_dd: f64,
    pub kernel_dim: Option<usize>,
    pub curl_rank: Option<usize>,
    pub harmonic_dim_predicted: usize,
    pub notice: Option<String>,
    /// Largest commuting residual over the polynomial basis.
    pub commuting_residual: f64,
    pub commuting_per_field: Vec<f64>,
}

impl ComplexReport {
    /// `None` if the ranks are unavailable or inconsistent (`rank C > dim ker D`).
    pub fn harmonic_dim(&self) -> Option<usize> {
        self.kernel_dim?.checked_sub(self.curl_rank?)
    }

    pub fn passes(&self, dd_tol: f64, commuting_tol: f64) -> bool {
        self.max_dd <= dd_tol
            && self.commuting_residual <= commuting_tol
            && self
                .harmonic_dim()
                .is_none_or(|h| h == self.harmonic_dim_predicted)
    }
}

/// The six affine fields `(1,0), (0,1), (x,0), (0,y), (y,0), (0,x)`.
pub fn polynomial_fields() -> Vec<RegularField> {
    let g = |a: f64, b: f64, c: f64, d: f64| RegularField {
        c: [0.0, 0.0],
        g: [[a, b], [c, d]],
    };
    vec![
        RegularField::constant([1.0, 0.0]),
        RegularField::constant([0.0, 1.0]),
        g(1.0, 0.0, 0.0, 0.0),
        g(0.0, 0.0, 0.0, 1.0),
        g(0.0, 1.0, 0.0, 0.0),
        g(0.0, 0.0, 1.0, 0.0),
    ]
}

pub fn complex_report(mesh: &MdMesh) -> Result<ComplexReport, FemError> {
    complex_report_with(mesh, 1.0)
}

/// As [`complex_report`] with the jump terms of the divergence scaled by
/// `jump_sign` (a mutation hook for testing the checks themselves).
pub fn complex_report_with(mesh: &MdMesh, jump_sign: f64) -> Result<ComplexReport, FemError> {
    let a0 = MdSpace::new(mesh, 0);
    let q = MdSpace::new(mesh, 1);
    let p = MdSpace::new(mesh, 2);
    let c = assemble_curl(mesh, &a0, &q)?;
    let div = assemble_divergence_signed(mesh, &q, &p, jump_sign)?;
    let dd = div.d.matmul(&c)?;
    let max_dd = dd.max_abs();

    let (kernel_dim, curl_rank, notice) = if q.total_dofs() <= DENSE_LIMIT && a0.total_dofs() <= DENSE_LIMIT {
        let rd = dense_rank(&div.d.to_dense(), 1e-10)?;
        let rc = dense_rank(&c.to_dense(), 1e-10)?;
        (Some(q.total_dofs() - rd), Some(rc), None)
    } else {
        (
            None,
            None,
            Some(format!(
                "rank check skipped: {} flux DOFs exceed the dense limit of {DENSE_LIMIT}",
                q.total_dofs()
            )),
        )
    };

    let r1 = RegularSpace::new(mesh, 1);
    let pi = canonical_interpolation(mesh, &r1, &q)?;
    // fractures with an immersed tip get a zero fracture component so that
    // the field is admissible (no flux through a tip)
    let tipped: Vec<bool> = (0..mesh.num_subdomains())
        .map(|i| mesh.dim(i) == 1 && mesh.end_kinds(i).iter().any(|e| e.1 == EndKind::Tip))
        .collect();
    let mut per_field = Vec::new();
    for field in polynomial_fields() {
        let frac = |i: usize, x| {
            if tipped[i] {
                0.0
            } else {
                crate::mesh::dot2(field.eval(x), mesh.submeshes[i].tangent().unwrap())
            }
        };
        let nodal = nodal_regular(mesh, &r1, |x| field.eval(x), frac);
        let dq = div.d.spmv(&pi.spmv(&nodal)?)?;
        let mut exact = vec![0.0; p.total_dofs()];
        for i in 0..mesh.num_subdomains() {
            let m = &mesh.submeshes[i];
            for cidx in 0..m.num_cells() {
                let row = p.dof(i, cidx).unwrap();
                exact[row] = match m.dim {
                    2 => field.divergence(),
                    1 if tipped[i] => 0.0,
                    1 => field.directional_derivative(m.tangent().unwrap()),
                    _ => 0.0,
                };
            }
        }
        // point cells: minus the signed fracture fluxes arriving there
        for conn in &mesh.geom.connections {
            if mesh.dim(conn.host) == 1 && mesh.dim(conn.target) == 0 {
                let fm = &mesh.submeshes[conn.host];
                let row = p.dof(conn.target, 0).unwrap();
                for &(v, _, eps) in &mesh.pairings[conn.id].pairs {
                    exact[row] -= eps as f64 * frac(conn.host, fm.vertices[v]);
                }
            }
        }
        let diff: Vec<f64> = dq.iter().zip(&exact).map(|(a, b)| a - b).collect();
        let scale = norm2(&nodal).max(f64::MIN_POSITIVE);
        per_field.push(norm2(&diff) / scale);
    }
    Ok(ComplexReport {
        flux_dofs: q.total_dofs(),
        potential_dofs: a0.total_dofs(),
        pressure_dofs: p.total_dofs(),
        max_dd,
        kernel_dim,
        curl_rank,
        harmonic_dim_predicted: 0,
        notice,
        commuting_residual: per_field.iter().copied().fold(0.0, f64::max),
        commuting_per_field: per_field,
    })
}
