use serde::{Deserialize, Serialize};

use super::{FemError, MdSpace, PermeabilityField, RegularSpace};
use crate::la::{SparseMatrix, TripletBuilder};
use crate::mesh::{dot2, rot_cw, sub, MdMesh, Point};

/// Rejects rock facets that sit inside the domain without an interface pairing.
fn check_pairing(mesh: &MdMesh) -> Result<(), FemError> {
    for i in mesh.ids_of_dim(2) {
        let m = &mesh.submeshes[i];
        let paired = mesh.paired_rock_facets(i);
        for f in 0..m.num_facets() {
            if m.is_boundary_facet(f) && paired[f].is_none() && !mesh.on_outer_boundary(m.facet_midpoint(f)) {
                return Err(FemError::UnpairedFacet { sub: i, facet: f });
            }
        }
    }
    Ok(())
}

fn check_k(space: &MdSpace, k: usize, what: &str) -> Result<(), FemError> {
    if space.k != k {
        return Err(FemError::Space(format!("{what} needs a k = {k} space, got k = {}", space.k)));
    }
    Ok(())
}

fn rock_fracture_connections(mesh: &MdMesh) -> impl Iterator<Item = usize> + '_ {
    mesh.geom
        .connections
        .iter()
        .filter(|c| mesh.dim(c.host) == 2 && mesh.dim(c.target) == 1)
        .map(|c| c.id)
}

fn fracture_point_connections(mesh: &MdMesh) -> impl Iterator<Item = usize> + '_ {
    mesh.geom
        .connections
        .iter()
        .filter(|c| mesh.dim(c.host) == 1 && mesh.dim(c.target) == 0)
        .map(|c| c.id)
}

fn quad_form(k: &[f64; 3], a: Point, b: Point) -> f64 {
    a[0] * (k[0] * b[0] + k[1] * b[1]) + a[1] * (k[1] * b[0] + k[2] * b[1])
}

/// Flux mass matrix `A_q`: `K⁻¹`-weighted RT0 mass on rocks, `K_f⁻¹`-weighted
/// P1 mass on fractures, and `K_ν⁻¹`-weighted normal-trace mass on every
/// paired rock facet and every fracture endpoint at an intersection.
pub fn assemble_mass(
    mesh: &MdMesh,
    flux: &MdSpace,
    perm: &PermeabilityField,
) -> Result<SparseMatrix, FemError> {
    check_k(flux, 1, "assemble_mass")?;
    check_pairing(mesh)?;
    let n = flux.total_dofs();
    let mut t = TripletBuilder::with_capacity(n, n, 9 * n);
    for i in mesh.ids_of_dim(2) {
        let m = &mesh.submeshes[i];
        let kinv = perm.rock_inverse(i);
        for (c, cell) in m.cells.iter().enumerate() {
            let p: Vec<Point> = cell.iter().map(|&v| m.vertices[v]).collect();
            let area = m.cell_measures[c];
            let mids = [
                [(p[1][0] + p[2][0]) / 2.0, (p[1][1] + p[2][1]) / 2.0],
                [(p[2][0] + p[0][0]) / 2.0, (p[2][1] + p[0][1]) / 2.0],
                [(p[0][0] + p[1][0]) / 2.0, (p[0][1] + p[1][1]) / 2.0],
            ];
            let dofs: Vec<(usize, f64)> = m.cell_facets[c]
                .iter()
                .map(|&(f, s)| (flux.dof(i, f).unwrap(), s as f64))
                .collect();
            for k in 0..3 {
                for l in 0..3 {
                    let mut q = 0.0;
                    for mq in &mids {
                        q += quad_form(&kinv, sub(*mq, p[k]), sub(*mq, p[l]));
                    }
                    let v = dofs[k].1 * dofs[l].1 * q / (12.0 * area);
                    t.add(dofs[k].0, dofs[l].0, v);
                }
            }
        }
    }
    for i in mesh.ids_of_dim(1) {
        let m = &mesh.submeshes[i];
        let w = 1.0 / perm.fracture[i];
        for (c, cell) in m.cells.iter().enumerate() {
            let len = m.cell_measures[c];
            for (a, &u) in cell.iter().enumerate() {
                for (b, &v) in cell.iter().enumerate() {
                    if let (Some(du), Some(dv)) = (flux.dof(i, u), flux.dof(i, v)) {
                        let e = if a == b { 2.0 } else { 1.0 };
                        t.add(du, dv, w * e * len / 6.0);
                    }
                }
            }
        }
    }
    for conn in rock_fracture_connections(mesh) {
        let c = mesh.geom.connections[conn];
        let m = &mesh.submeshes[c.host];
        let w = 1.0 / perm.normal[conn];
        for &(f, _, _) in &mesh.pairings[conn].pairs {
            let d = flux.dof(c.host, f).unwrap();
            t.add(d, d, w / m.facet_measures[f]);
        }
    }
    for conn in fracture_point_connections(mesh) {
        let c = mesh.geom.connections[conn];
        let w = 1.0 / perm.normal[conn];
        for &(v, _, _) in &mesh.pairings[conn].pairs {
            if let Some(d) = flux.dof(c.host, v) {
                t.add(d, d, w);
            }
        }
    }
    Ok(t.build())
}

/// `B = M_p D`, the divergence `D` and the diagonal pressure mass `M_p`.
#[derive(Clone, Debug)]
pub struct DivergenceParts {
    pub b: SparseMatrix,
    pub d: SparseMatrix,
    pub mp: Vec<f64>,
}

pub fn assemble_divergence(
    mesh: &MdMesh,
    flux: &MdSpace,
    pressure: &MdSpace,
) -> Result<DivergenceParts, FemError> {
    assemble_divergence_signed(mesh, flux, pressure, 1.0)
}

/// As [`assemble_divergence`], with the inter-dimensional jump terms scaled by
/// `jump_sign`. Any value other than 1 breaks the complex property; used to
/// test that the verification catches sign errors.
pub fn assemble_divergence_signed(
    mesh: &MdMesh,
    flux: &MdSpace,
    pressure: &MdSpace,
    jump_sign: f64,
) -> Result<DivergenceParts, FemError> {
    check_k(flux, 1, "divergence domain")?;
    check_k(pressure, 2, "divergence range")?;
    check_pairing(mesh)?;
    let (np, nq) = (pressure.total_dofs(), flux.total_dofs());
    let mut t = TripletBuilder::with_capacity(np, nq, 4 * np);
    let mut mp = vec![0.0; np];
    for i in 0..mesh.num_subdomains() {
        let m = &mesh.submeshes[i];
        for c in 0..m.num_cells() {
            mp[pressure.dof(i, c).unwrap()] = m.cell_measures[c];
        }
    }
    for i in mesh.ids_of_dim(2) {
        let m = &mesh.submeshes[i];
        for c in 0..m.num_cells() {
            let row = pressure.dof(i, c).unwrap();
            for &(f, s) in &m.cell_facets[c] {
                t.add(row, flux.dof(i, f).unwrap(), s as f64);
            }
        }
    }
    for i in mesh.ids_of_dim(1) {
        let m = &mesh.submeshes[i];
        for (c, cell) in m.cells.iter().enumerate() {
            let row = pressure.dof(i, c).unwrap();
            if let Some(d) = flux.dof(i, cell[1]) {
                t.add(row, d, 1.0);
            }
            if let Some(d) = flux.dof(i, cell[0]) {
                t.add(row, d, -1.0);
            }
        }
    }
    for conn in rock_fracture_connections(mesh) {
        let c = mesh.geom.connections[conn];
        for &(f, cell, _) in &mesh.pairings[conn].pairs {
            let row = pressure.dof(c.target, cell).unwrap();
            t.add(row, flux.dof(c.host, f).unwrap(), -jump_sign);
        }
    }
    for conn in fracture_point_connections(mesh) {
        let c = mesh.geom.connections[conn];
        let row = pressure.dof(c.target, 0).unwrap();
        for &(v, _, eps) in &mesh.pairings[conn].pairs {
            if let Some(d) = flux.dof(c.host, v) {
                t.add(row, d, -jump_sign * eps as f64);
            }
        }
    }
    let b = t.build();
    let inv: Vec<f64> = mp.iter().map(|v| 1.0 / v).collect();
    let d = b.scale_rows(&inv);
    Ok(DivergenceParts { b, d, mp })
}

/// Composite curl `C`: rotated gradients of rock P1 potentials as RT0 facet
/// fluxes, and σ-signed sums of both rock-side traces as fracture DOFs.
pub fn assemble_curl(
    mesh: &MdMesh,
    potential: &MdSpace,
    flux: &MdSpace,
) -> Result<SparseMatrix, FemError> {
    check_k(potential, 0, "curl domain")?;
    check_k(flux, 1, "curl range")?;
    let (nq, na) = (flux.total_dofs(), potential.total_dofs());
    let mut t = TripletBuilder::with_capacity(nq, na, 2 * nq);
    for i in mesh.ids_of_dim(2) {
        let m = &mesh.submeshes[i];
        for (f, e) in m.facets.iter().enumerate() {
            let row = flux.dof(i, f).unwrap();
            let dir = rot_cw(m.facet_normals[f]);
            let forward = dot2(sub(m.vertices[e[1]], m.vertices[e[0]]), dir) > 0.0;
            let (start, end) = if forward { (e[0], e[1]) } else { (e[1], e[0]) };
            t.add(row, potential.dof(i, end).unwrap(), 1.0);
            t.add(row, potential.dof(i, start).unwrap(), -1.0);
        }
    }
    for conn in rock_fracture_connections(mesh) {
        let c = mesh.geom.connections[conn];
        let sigma = mesh.pairings[conn].pairs.first().map_or(1.0, |p| p.2 as f64);
        for (w, a) in mesh.side_vertex_map(conn).into_iter().enumerate() {
            if let (Some(row), Some(a)) = (flux.dof(c.target, w), a) {
                t.add(row, potential.dof(c.host, a).unwrap(), sigma);
            }
        }
    }
    Ok(t.build())
}

/// P1 mass and stiffness element matrices (row-major) of a segment or a
/// triangle.
pub fn p1_element_matrices(p: &[Point]) -> (Vec<f64>, Vec<f64>) {
    match p.len() {
        2 => {
            let l = crate::mesh::norm(sub(p[1], p[0]));
            (
                vec![l / 3.0, l / 6.0, l / 6.0, l / 3.0],
                vec![1.0 / l, -1.0 / l, -1.0 / l, 1.0 / l],
            )
        }
        3 => {
            let e: Vec<Point> = (0..3).map(|k| sub(p[(k + 2) % 3], p[(k + 1) % 3])).collect();
            let area = 0.5 * (e[2][0] * e[1][1] - e[2][1] * e[1][0]).abs();
            let mut mass = vec![area / 12.0; 9];
            let mut stiff = vec![0.0; 9];
            for k in 0..3 {
                mass[4 * k] = area / 6.0;
                for l in 0..3 {
                    stiff[3 * k + l] = dot2(e[k], e[l]) / (4.0 * area);
                }
            }
            (mass, stiff)
        }
        n => panic!("P1 element matrices need 2 or 3 points, got {n}"),
    }
}

/// Which component of a rock vector field enters the fracture trace terms of
/// the regular Laplacian.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceComponent {
    Normal,
    Tangential,
}

/// Coefficients of the regular-space inner product.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularWeights {
    /// Indexed by subdomain id.
    pub rock_mass: Vec<f64>,
    pub rock_stiffness: f64,
    /// Indexed by subdomain id.
    pub fracture_mass: Vec<f64>,
    pub fracture_stiffness: f64,
    /// Indexed by connection id (rock-to-fracture connections).
    pub trace_mass: Vec<f64>,
    pub trace_stiffness: f64,
    /// Indexed by connection id (fracture-to-point connections).
    pub point_mass: Vec<f64>,
    pub trace_component: TraceComponent,
}

impl RegularWeights {
    /// All weights one: the plain `H¹` inner product with `H¹` traces.
    pub fn unit(mesh: &MdMesh) -> Self {
        let ns = mesh.num_subdomains();
        let nc = mesh.geom.connections.len();
        Self {
            rock_mass: vec![1.0; ns],
            rock_stiffness: 1.0,
            fracture_mass: vec![1.0; ns],
            fracture_stiffness: 1.0,
            trace_mass: vec![1.0; nc],
            trace_stiffness: 1.0,
            point_mass: vec![1.0; nc],
            trace_component: TraceComponent::Normal,
        }
    }

    /// Coefficient-aware weights matching `A_q + α BᵀM_p⁻¹B`: mass terms from
    /// the inverse permeabilities, stiffness terms from α. The trace stiffness
    /// is dropped: near immersed tips it makes the auxiliary bound grow like
    /// `h⁻¹`, while the trace mass alone keeps it bounded.
    pub fn policy(mesh: &MdMesh, perm: &PermeabilityField, alpha: f64) -> Self {
        let ns = mesh.num_subdomains();
        let mut w = Self::unit(mesh);
        for i in 0..ns {
            match mesh.dim(i) {
                2 => w.rock_mass[i] = perm.rock_inverse_scale(i),
                1 => w.fracture_mass[i] = 1.0 / perm.fracture[i],
                _ => {}
            }
        }
        for (c, conn) in mesh.geom.connections.iter().enumerate() {
            if mesh.dim(conn.host) == mesh.dim(conn.target) + 1 {
                w.trace_mass[c] = alpha + 1.0 / perm.normal[c];
                w.point_mass[c] = alpha + 1.0 / perm.normal[c];
            }
        }
        w.rock_stiffness = alpha;
        w.fracture_stiffness = alpha;
        w.trace_stiffness = 0.0;
        w
    }
}

/// Regular-space Laplacian `𝔄_reg`: componentwise weighted P1 stiffness and
/// mass per subdomain plus weighted `H¹` trace terms along each matched
/// fracture side and point terms at intersections.
pub fn assemble_regular_laplacian(
    mesh: &MdMesh,
    rspace: &RegularSpace,
    w: &RegularWeights,
) -> Result<SparseMatrix, FemError> {
    let n = rspace.total_dofs();
    let mut t = TripletBuilder::with_capacity(n, n, 10 * n);
    for i in 0..mesh.num_subdomains() {
        let m = &mesh.submeshes[i];
        let ncomp = rspace.components(i);
        if ncomp == 0 {
            continue;
        }
        let (wm, ws) = match m.dim {
            2 => (w.rock_mass[i], w.rock_stiffness),
            _ => (w.fracture_mass[i], w.fracture_stiffness),
        };
        for cell in &m.cells {
            let p: Vec<Point> = cell.iter().map(|&v| m.vertices[v]).collect();
            let (mass, stiff) = p1_element_matrices(&p);
            let nl = cell.len();
            for comp in 0..ncomp {
                for a in 0..nl {
                    for b in 0..nl {
                        let v = wm * mass[a * nl + b] + ws * stiff[a * nl + b];
                        t.add(rspace.dof(i, comp, cell[a]), rspace.dof(i, comp, cell[b]), v);
                    }
                }
            }
        }
    }
    for conn in rock_fracture_connections(mesh) {
        let c = mesh.geom.connections[conn];
        let fr = &mesh.submeshes[c.target];
        let side = mesh.side_vertex_map(conn);
        let dir = match w.trace_component {
            TraceComponent::Normal => mesh.fracture_normal(c.target).unwrap(),
            TraceComponent::Tangential => fr.tangent().unwrap(),
        };
        let ncomp = rspace.components(c.host);
        for &(_, cell, _) in &mesh.pairings[conn].pairs {
            let verts = &fr.cells[cell];
            let p: Vec<Point> = verts.iter().map(|&v| fr.vertices[v]).collect();
            let (mass, stiff) = p1_element_matrices(&p);
            let host = verts
                .iter()
                .map(|&v| side[v].ok_or(FemError::Unmatched(conn)))
                .collect::<Result<Vec<usize>, _>>()?;
            for a in 0..2 {
                for b in 0..2 {
                    let e = w.trace_mass[conn] * mass[2 * a + b] + w.trace_stiffness * stiff[2 * a + b];
                    if ncomp == 1 {
                        t.add(rspace.dof(c.host, 0, host[a]), rspace.dof(c.host, 0, host[b]), e);
                        continue;
                    }
                    for ca in 0..2 {
                        for cb in 0..2 {
                            t.add(
                                rspace.dof(c.host, ca, host[a]),
                                rspace.dof(c.host, cb, host[b]),
                                e * dir[ca] * dir[cb],
                            );
                        }
                    }
                }
            }
        }
    }
    if rspace.k == 1 {
        for conn in fracture_point_connections(mesh) {
            let c = mesh.geom.connections[conn];
            for &(v, _, _) in &mesh.pairings[conn].pairs {
                let d = rspace.dof(c.host, 0, v);
                t.add(d, d, w.point_mass[conn]);
            }
        }
    }
    Ok(t.build())
}
