use serde::Serialize;

use super::{FemError, MdSpace, RegularSpace};
use crate::la::{SparseMatrix, TripletBuilder};
use crate::mesh::{dot2, MdMesh, Point};

/// Affine vector field `v(x) = c + G x` on the rocks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegularField {
    pub c: Point,
    /// Row-major gradient.
    pub g: [[f64; 2]; 2],
}

impl RegularField {
    pub fn constant(c: Point) -> Self {
        Self {
            c,
            g: [[0.0; 2]; 2],
        }
    }

    pub fn eval(&self, x: Point) -> Point {
        [
            self.c[0] + self.g[0][0] * x[0] + self.g[0][1] * x[1],
            self.c[1] + self.g[1][0] * x[0] + self.g[1][1] * x[1],
        ]
    }

    pub fn divergence(&self) -> f64 {
        self.g[0][0] + self.g[1][1]
    }

    /// Derivative of `v·t` along the unit direction `t`.
    pub fn directional_derivative(&self, t: Point) -> f64 {
        let gt = [
            self.g[0][0] * t[0] + self.g[0][1] * t[1],
            self.g[1][0] * t[0] + self.g[1][1] * t[1],
        ];
        dot2(t, gt)
    }
}

/// Canonical interpolation `Π` from a regular space to a discrete space.
///
/// For k = 1 the RT0 DOF of a rock facet is the facet integral of the normal
/// component of the P1 vector field (exact by the trapezoid rule) and a
/// fracture DOF is the nodal value of the fracture component. For k = 0 it is
/// the identity.
pub fn canonical_interpolation(
    mesh: &MdMesh,
    rspace: &RegularSpace,
    space: &MdSpace,
) -> Result<SparseMatrix, FemError> {
    if rspace.k != space.k {
        return Err(FemError::Space(format!(
            "interpolation between k = {} and k = {}",
            rspace.k, space.k
        )));
    }
    match space.k {
        0 => {
            if rspace.total_dofs() != space.total_dofs() {
                return Err(FemError::Space("potential layouts differ".into()));
            }
            Ok(SparseMatrix::identity(space.total_dofs()))
        }
        1 => {
            let mut t = TripletBuilder::with_capacity(space.total_dofs(), rspace.total_dofs(), 4 * space.total_dofs());
            for i in 0..mesh.num_subdomains() {
                let m = &mesh.submeshes[i];
                match m.dim {
                    2 => {
                        for (f, e) in m.facets.iter().enumerate() {
                            let row = space.dof(i, f).unwrap();
                            let n = m.facet_normals[f];
                            let w = 0.5 * m.facet_measures[f];
                            for &a in e {
                                for (comp, nc) in n.iter().enumerate() {
                                    t.add(row, rspace.dof(i, comp, a), w * nc);
                                }
                            }
                        }
                    }
                    1 => {
                        for &v in space.entities(i) {
                            t.add(space.dof(i, v).unwrap(), rspace.dof(i, 0, v), 1.0);
                        }
                    }
                    _ => {}
                }
            }
            Ok(t.build().compress_abs(0.0))
        }
        k => Err(FemError::Space(format!("no canonical interpolation for k = {k}"))),
    }
}

/// Nodal coefficient vector of a regular field: rock components from `rock`,
/// fracture values from `fracture(subdomain, x)`.
pub fn nodal_regular(
    mesh: &MdMesh,
    rspace: &RegularSpace,
    rock: impl Fn(Point) -> Point,
    fracture: impl Fn(usize, Point) -> f64,
) -> Vec<f64> {
    let mut x = vec![0.0; rspace.total_dofs()];
    for i in 0..mesh.num_subdomains() {
        let m = &mesh.submeshes[i];
        let nc = rspace.components(i);
        for (v, &p) in m.vertices.iter().enumerate() {
            match (m.dim, nc) {
                (2, _) => {
                    let val = rock(p);
                    for (comp, value) in val.iter().enumerate().take(nc) {
                        x[rspace.dof(i, comp, v)] = *value;
                    }
                }
                (1, 1) => x[rspace.dof(i, 0, v)] = fracture(i, p),
                _ => {}
            }
        }
    }
    x
}

/// Exact flux DOFs of an affine rock field (facet integrals through the
/// midpoint rule) and nodal fracture values.
pub fn interpolate_flux(
    mesh: &MdMesh,
    space: &MdSpace,
    rock: impl Fn(Point) -> Point,
    fracture: impl Fn(usize, Point) -> f64,
) -> Vec<f64> {
    let mut x = vec![0.0; space.total_dofs()];
    for i in 0..mesh.num_subdomains() {
        let m = &mesh.submeshes[i];
        match m.dim {
            2 => {
                for f in 0..m.num_facets() {
                    let v = rock(m.facet_midpoint(f));
                    x[space.dof(i, f).unwrap()] = m.facet_measures[f] * dot2(v, m.facet_normals[f]);
                }
            }
            1 => {
                for &v in space.entities(i) {
                    x[space.dof(i, v).unwrap()] = fracture(i, m.vertices[v]);
                }
            }
            _ => {}
        }
    }
    x
}
