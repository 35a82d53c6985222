//! Matched simplicial meshes of a mixed-dimensional geometry.
//!
//! Each subdomain carries its own [`SubMesh`]. Rock regions duplicate the
//! vertices along fractures so that the two sides of a fracture own distinct
//! facets. Every boundary connection is realized by an [`InterfacePairing`]
//! between host entities and target cells that coincide geometrically.

mod io;
mod structured;

pub use io::{MeshDoc, MESH_VERSION};
pub use structured::{
    build_builtin, build_random_network, build_structured, builtin_segments, RandomNetworkConfig,
    Segment, BUILTIN_GEOMETRIES,
};

use serde::Serialize;
use thiserror::Error;

use crate::geom::{GeomError, MixedDimGeometry};
use crate::ValidationReport;

pub type Point = [f64; 2];

/// Coordinate tolerance used for geometric coincidence tests.
pub const MATCH_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("segment {index}: {msg}")]
    BadSegment { index: usize, msg: String },
    #[error("segments {first} and {second} overlap")]
    Overlap { first: usize, second: usize },
    #[error("lattice size m must be at least 1")]
    EmptyLattice,
    #[error("could not place {requested} fractures (placed {placed} after {attempts} attempts)")]
    Capacity {
        requested: usize,
        placed: usize,
        attempts: usize,
    },
    #[error("unknown builtin geometry '{0}'")]
    UnknownBuiltin(String),
    #[error("subdomain ids must be 0..{0} for meshing")]
    SparseIds(usize),
    #[error("subdomain {id}: {msg}")]
    BadSubMesh { id: usize, msg: String },
    #[error("unsupported mesh version {0}")]
    Version(u32),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn dot2(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub(crate) fn norm(a: Point) -> f64 {
    dot2(a, a).sqrt()
}

pub(crate) fn rot_cw(a: Point) -> Point {
    [a[1], -a[0]]
}

pub(crate) fn rot_ccw(a: Point) -> Point {
    [-a[1], a[0]]
}

pub(crate) fn close(a: Point, b: Point, tol: f64) -> bool {
    (a[0] - b[0]).abs() <= tol && (a[1] - b[1]).abs() <= tol
}

/// Simplicial mesh of one subdomain with derived facet data.
///
/// Facets are edges (`dim = 2`) or vertices (`dim = 1`); a 0D mesh is one
/// vertex with one cell of measure 1 and no facets. Triangle local facet `k`
/// is the edge opposite local vertex `k`; segment local facets are the start
/// and end vertex. `cell_facets` stores the facet id with the orientation sign
/// of the facet normal relative to the cell's outward normal.
#[derive(Clone, Debug, PartialEq)]
pub struct SubMesh {
    pub dim: usize,
    pub vertices: Vec<Point>,
    pub cells: Vec<Vec<usize>>,
    pub facets: Vec<Vec<usize>>,
    pub cell_facets: Vec<Vec<(usize, i8)>>,
    pub facet_cells: Vec<Vec<usize>>,
    pub cell_measures: Vec<f64>,
    pub facet_measures: Vec<f64>,
    pub facet_normals: Vec<Point>,
}

impl SubMesh {
    pub fn new(dim: usize, vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<Self, String> {
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() != dim + 1 {
                return Err(format!("cell {c} has {} vertices, expected {}", cell.len(), dim + 1));
            }
            if cell.iter().any(|&v| v >= vertices.len()) {
                return Err(format!("cell {c} references a missing vertex"));
            }
        }
        match dim {
            0 => Self::build_point(vertices, cells),
            1 => Self::build_segments(vertices, cells),
            2 => Self::build_triangles(vertices, cells),
            _ => Err(format!("unsupported dimension {dim}")),
        }
    }

    fn build_point(vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<Self, String> {
        if vertices.len() != 1 || cells.len() != 1 {
            return Err("a point mesh has exactly one vertex and one cell".into());
        }
        Ok(Self {
            dim: 0,
            vertices,
            cells,
            facets: Vec::new(),
            cell_facets: vec![Vec::new()],
            facet_cells: Vec::new(),
            cell_measures: vec![1.0],
            facet_measures: Vec::new(),
            facet_normals: Vec::new(),
        })
    }

    fn build_segments(vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<Self, String> {
        let nv = vertices.len();
        let mut facet_cells = vec![Vec::new(); nv];
        let mut facet_normals = vec![[0.0; 2]; nv];
        let mut cell_measures = Vec::with_capacity(cells.len());
        let mut cell_facets = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            let d = sub(vertices[cell[1]], vertices[cell[0]]);
            let len = norm(d);
            if len <= 0.0 {
                return Err(format!("segment cell {c} is degenerate"));
            }
            let t = [d[0] / len, d[1] / len];
            for &v in cell {
                facet_cells[v].push(c);
                facet_normals[v] = t;
            }
            cell_measures.push(len);
            cell_facets.push(vec![(cell[0], -1), (cell[1], 1)]);
        }
        if facet_cells.iter().any(Vec::is_empty) {
            return Err("unused vertex in segment mesh".into());
        }
        Ok(Self {
            dim: 1,
            vertices,
            facets: (0..nv).map(|v| vec![v]).collect(),
            cells,
            cell_facets,
            facet_cells,
            cell_measures,
            facet_measures: vec![1.0; nv],
            facet_normals,
        })
    }

    fn build_triangles(vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<Self, String> {
        let mut keys: Vec<(usize, usize)> = Vec::with_capacity(3 * cells.len());
        for cell in &cells {
            for k in 0..3 {
                let (a, b) = (cell[(k + 1) % 3], cell[(k + 2) % 3]);
                keys.push((a.min(b), a.max(b)));
            }
        }
        keys.sort_unstable();
        keys.dedup();
        let facets: Vec<Vec<usize>> = keys.iter().map(|&(a, b)| vec![a, b]).collect();
        let mut facet_cells = vec![Vec::new(); facets.len()];
        let mut local = Vec::with_capacity(cells.len());
        let mut cell_measures = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            let (p0, p1, p2) = (vertices[cell[0]], vertices[cell[1]], vertices[cell[2]]);
            let e1 = sub(p1, p0);
            let e2 = sub(p2, p0);
            let area = 0.5 * (e1[0] * e2[1] - e1[1] * e2[0]).abs();
            if area <= 0.0 {
                return Err(format!("triangle {c} is degenerate"));
            }
            cell_measures.push(area);
            let mut lf = Vec::with_capacity(3);
            for k in 0..3 {
                let (a, b) = (cell[(k + 1) % 3], cell[(k + 2) % 3]);
                let f = keys.binary_search(&(a.min(b), a.max(b))).unwrap();
                if facet_cells[f].len() == 2 {
                    return Err(format!("edge ({a}, {b}) shared by more than two triangles"));
                }
                facet_cells[f].push(c);
                lf.push(f);
            }
            local.push(lf);
        }
        let mut facet_normals = Vec::with_capacity(facets.len());
        let mut facet_measures = Vec::with_capacity(facets.len());
        for (f, e) in facets.iter().enumerate() {
            let d = sub(vertices[e[1]], vertices[e[0]]);
            let len = norm(d);
            facet_measures.push(len);
            let mut n = rot_cw([d[0] / len, d[1] / len]);
            if facet_cells[f].len() == 1 {
                let c = facet_cells[f][0];
                if Self::outward_sign_of(&vertices, &cells[c], e, n) < 0 {
                    n = [-n[0], -n[1]];
                }
            }
            facet_normals.push(n);
        }
        let cell_facets = local
            .iter()
            .zip(&cells)
            .map(|(lf, cell)| {
                lf.iter()
                    .map(|&f| (f, Self::outward_sign_of(&vertices, cell, &facets[f], facet_normals[f])))
                    .collect()
            })
            .collect();
        Ok(Self {
            dim: 2,
            vertices,
            cells,
            facets,
            cell_facets,
            facet_cells,
            cell_measures,
            facet_measures,
            facet_normals,
        })
    }

    fn outward_sign_of(vertices: &[Point], cell: &[usize], edge: &[usize], n: Point) -> i8 {
        let c = centroid(cell.iter().map(|&v| vertices[v]));
        let m = centroid(edge.iter().map(|&v| vertices[v]));
        if dot2(n, sub(m, c)) > 0.0 {
            1
        } else {
            -1
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_facets(&self) -> usize {
        self.facets.len()
    }

    pub fn is_boundary_facet(&self, f: usize) -> bool {
        self.facet_cells[f].len() == 1
    }

    /// Edge id for the vertex pair `(a, b)` in either order.
    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        if self.dim != 2 {
            return None;
        }
        let key = [a.min(b), a.max(b)];
        self.facets
            .binary_search_by(|f| (f[0], f[1]).cmp(&(key[0], key[1])))
            .ok()
    }

    pub fn outward_normal(&self, cell: usize, local: usize) -> Point {
        let (f, s) = self.cell_facets[cell][local];
        let n = self.facet_normals[f];
        [s as f64 * n[0], s as f64 * n[1]]
    }

    pub fn cell_centroid(&self, c: usize) -> Point {
        centroid(self.cells[c].iter().map(|&v| self.vertices[v]))
    }

    pub fn facet_midpoint(&self, f: usize) -> Point {
        centroid(self.facets[f].iter().map(|&v| self.vertices[v]))
    }

    pub fn cell_diameter(&self, c: usize) -> f64 {
        let cell = &self.cells[c];
        let mut d = 0.0f64;
        for i in 0..cell.len() {
            for j in i + 1..cell.len() {
                d = d.max(norm(sub(self.vertices[cell[i]], self.vertices[cell[j]])));
            }
        }
        d
    }

    /// Smallest inradius-to-diameter ratio over all triangles (1 otherwise).
    pub fn min_shape_ratio(&self) -> f64 {
        if self.dim != 2 {
            return 1.0;
        }
        (0..self.num_cells())
            .map(|c| {
                let per: f64 = self.cell_facets[c]
                    .iter()
                    .map(|&(f, _)| self.facet_measures[f])
                    .sum();
                let r = 2.0 * self.cell_measures[c] / per;
                r / self.cell_diameter(c)
            })
            .fold(1.0, f64::min)
    }

    /// Direction from start to end of the first cell of a 1D mesh.
    pub fn tangent(&self) -> Option<Point> {
        if self.dim != 1 || self.cells.is_empty() {
            return None;
        }
        let c = &self.cells[0];
        let d = sub(self.vertices[c[1]], self.vertices[c[0]]);
        let l = norm(d);
        Some([d[0] / l, d[1] / l])
    }

    /// First and last vertex of a 1D mesh whose cells form one oriented chain.
    pub fn endpoints(&self) -> Option<(usize, usize)> {
        if self.dim != 1 {
            return None;
        }
        let start = (0..self.num_vertices()).find(|&v| {
            self.facet_cells[v].len() == 1 && self.cells[self.facet_cells[v][0]][0] == v
        })?;
        let end = (0..self.num_vertices()).find(|&v| {
            self.facet_cells[v].len() == 1 && self.cells[self.facet_cells[v][0]][1] == v
        })?;
        Some((start, end))
    }

    pub fn total_measure(&self) -> f64 {
        self.cell_measures.iter().sum()
    }
}

pub(crate) fn centroid(pts: impl Iterator<Item = Point>) -> Point {
    let mut s = [0.0; 2];
    let mut n = 0.0;
    for p in pts {
        s[0] += p[0];
        s[1] += p[1];
        n += 1.0;
    }
    [s[0] / n, s[1] / n]
}

/// Entity pairs realizing one boundary connection.
///
/// For a rock-to-fracture connection each pair is (rock facet, fracture cell,
/// σ) with σ the sign of the rock outward normal against the fracture normal.
/// For fracture-to-point pairs the host entity is the fracture end vertex and
/// the sign is +1 at the fracture end and −1 at its start. For rock-to-point
/// pairs the host entity is the rock vertex touching the point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InterfacePairing {
    pub connection: usize,
    pub pairs: Vec<(usize, usize, i8)>,
}

/// How a fracture end vertex is coupled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EndKind {
    /// Meets an intersection point.
    Point,
    /// Touches the outer boundary.
    Boundary,
    /// Ends inside a rock region; the flux vanishes there.
    Tip,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MdMesh {
    pub geom: MixedDimGeometry,
    pub submeshes: Vec<SubMesh>,
    pub pairings: Vec<InterfacePairing>,
    pub h: f64,
}

impl MdMesh {
    /// Assembles an `MdMesh` after checking ids and pairing coverage.
    pub fn new(
        geom: MixedDimGeometry,
        submeshes: Vec<SubMesh>,
        mut pairings: Vec<InterfacePairing>,
    ) -> Result<Self, MeshError> {
        let n = geom.subdomains.len();
        for (k, s) in geom.subdomains.iter().enumerate() {
            if s.id != k {
                return Err(MeshError::SparseIds(n));
            }
            if submeshes.get(k).map(|m| m.dim) != Some(s.dim) {
                return Err(MeshError::BadSubMesh {
                    id: k,
                    msg: "missing submesh or dimension mismatch".into(),
                });
            }
        }
        if submeshes.len() != n {
            return Err(MeshError::BadSubMesh {
                id: n,
                msg: "more submeshes than subdomains".into(),
            });
        }
        for (k, c) in geom.connections.iter().enumerate() {
            if c.id != k {
                return Err(MeshError::SparseIds(geom.connections.len()));
            }
        }
        pairings.sort_by_key(|p| p.connection);
        let ok = pairings.len() == geom.connections.len()
            && pairings.iter().enumerate().all(|(k, p)| p.connection == k);
        if !ok {
            return Err(MeshError::BadSubMesh {
                id: 0,
                msg: "every connection needs exactly one pairing".into(),
            });
        }
        let h = submeshes
            .iter()
            .flat_map(|m| (0..m.num_cells()).map(move |c| m.cell_diameter(c)))
            .fold(0.0, f64::max);
        Ok(Self {
            geom,
            submeshes,
            pairings,
            h,
        })
    }

    pub fn num_subdomains(&self) -> usize {
        self.submeshes.len()
    }

    pub fn dim(&self, i: usize) -> usize {
        self.submeshes[i].dim
    }

    pub fn ids_of_dim(&self, d: usize) -> Vec<usize> {
        (0..self.num_subdomains()).filter(|&i| self.dim(i) == d).collect()
    }

    /// Bounding box of all rock vertices: `[xmin, ymin, xmax, ymax]`.
    pub fn bbox(&self) -> [f64; 4] {
        let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        for m in self.submeshes.iter().filter(|m| m.dim == 2) {
            for p in &m.vertices {
                b[0] = b[0].min(p[0]);
                b[1] = b[1].min(p[1]);
                b[2] = b[2].max(p[0]);
                b[3] = b[3].max(p[1]);
            }
        }
        b
    }

    pub fn on_outer_boundary(&self, p: Point) -> bool {
        let b = self.bbox();
        (p[0] - b[0]).abs() <= MATCH_TOL
            || (p[0] - b[2]).abs() <= MATCH_TOL
            || (p[1] - b[1]).abs() <= MATCH_TOL
            || (p[1] - b[3]).abs() <= MATCH_TOL
    }

    /// Unit normal of fracture `i`: the tangent rotated counter-clockwise.
    pub fn fracture_normal(&self, i: usize) -> Option<Point> {
        self.submeshes[i].tangent().map(rot_ccw)
    }

    /// For each rock facet, the connection it is paired through (if any).
    pub fn paired_rock_facets(&self, i: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; self.submeshes[i].num_facets()];
        for c in &self.geom.connections {
            if c.host == i && self.dim(c.target) + 1 == self.dim(i) && self.dim(i) == 2 {
                for &(f, _, _) in &self.pairings[c.id].pairs {
                    out[f] = Some(c.id);
                }
            }
        }
        out
    }

    /// Classification of every vertex of fracture `i` that is an end vertex.
    pub fn end_kinds(&self, i: usize) -> Vec<(usize, EndKind)> {
        let m = &self.submeshes[i];
        let mut out = Vec::new();
        for v in 0..m.num_vertices() {
            if m.facet_cells[v].len() != 1 {
                continue;
            }
            let at_point = self.geom.connections.iter().any(|c| {
                c.host == i
                    && self.dim(c.target) == 0
                    && self.pairings[c.id].pairs.iter().any(|p| p.0 == v)
            });
            let kind = if at_point {
                EndKind::Point
            } else if self.on_outer_boundary(m.vertices[v]) {
                EndKind::Boundary
            } else {
                EndKind::Tip
            };
            out.push((v, kind));
        }
        out
    }

    /// Maps each vertex of fracture `target` to the rock vertex on the side of
    /// connection `conn`, read off the paired entities.
    pub fn side_vertex_map(&self, conn: usize) -> Vec<Option<usize>> {
        let c = self.geom.connections[conn];
        let host = &self.submeshes[c.host];
        let tgt = &self.submeshes[c.target];
        let mut map = vec![None; tgt.num_vertices()];
        for &(f, cell, _) in &self.pairings[conn].pairs {
            for &u in &tgt.cells[cell] {
                for &a in &host.facets[f] {
                    if close(host.vertices[a], tgt.vertices[u], MATCH_TOL) {
                        map[u] = Some(a);
                    }
                }
            }
        }
        map
    }

    pub fn check_matching(&self) -> ValidationReport {
        let mut rep = ValidationReport::default();
        for c in &self.geom.connections {
            let p = &self.pairings[c.id];
            let host = &self.submeshes[c.host];
            let tgt = &self.submeshes[c.target];
            let mut seen = vec![0usize; tgt.num_cells()];
            for &(hf, tc, sign) in &p.pairs {
                let bad_index = match (host.dim, tgt.dim) {
                    (2, 1) => hf >= host.num_facets(),
                    (1, 0) | (2, 0) => hf >= host.num_vertices(),
                    _ => true,
                };
                if bad_index || tc >= tgt.num_cells() {
                    rep.push(format!("connection {}: pair ({hf}, {tc}) out of range", c.id));
                    continue;
                }
                seen[tc] += 1;
                let hv: Vec<Point> = match (host.dim, tgt.dim) {
                    (2, 1) => host.facets[hf].iter().map(|&v| host.vertices[v]).collect(),
                    _ => vec![host.vertices[hf]],
                };
                let tv: Vec<Point> = tgt.cells[tc].iter().map(|&v| tgt.vertices[v]).collect();
                let matched = hv.len() == tv.len()
                    && tv.iter().all(|t| hv.iter().any(|h| close(*h, *t, MATCH_TOL)))
                    && hv.iter().all(|h| tv.iter().any(|t| close(*h, *t, MATCH_TOL)));
                if !matched {
                    rep.push(format!(
                        "connection {}: host entity {hf} does not coincide with target cell {tc}",
                        c.id
                    ));
                    continue;
                }
                match (host.dim, tgt.dim) {
                    (2, 1) => {
                        if host.facet_cells[hf].len() != 1 {
                            rep.push(format!(
                                "connection {}: facet {hf} is not a boundary facet of the host",
                                c.id
                            ));
                        }
                        let nf = self.fracture_normal(c.target).unwrap_or([0.0, 0.0]);
                        let s = dot2(host.facet_normals[hf], nf);
                        if s.abs() < 0.5 || (s > 0.0) != (sign > 0) {
                            rep.push(format!(
                                "connection {}: orientation sign of facet {hf} inconsistent",
                                c.id
                            ));
                        }
                    }
                    (1, 0) => {
                        let cell = &host.cells[host.facet_cells[hf][0]];
                        let expect = if cell[1] == hf { 1 } else { -1 };
                        if host.facet_cells[hf].len() != 1 || sign != expect {
                            rep.push(format!(
                                "connection {}: fracture end sign inconsistent at vertex {hf}",
                                c.id
                            ));
                        }
                    }
                    _ => {}
                }
            }
            if host.dim == 2 && tgt.dim == 1 {
                if seen.iter().any(|&s| s != 1) {
                    rep.push(format!(
                        "connection {}: pairing is not a bijection onto the target cells",
                        c.id
                    ));
                }
            } else if p.pairs.len() != 1 {
                rep.push(format!("connection {}: expected exactly one pair", c.id));
            }
        }
        rep
    }

    /// Structural checks: geometry, measures, facet sharing, shape regularity.
    pub fn validate(&self, shape_floor: f64) -> ValidationReport {
        let mut rep = self.geom.validate();
        for (i, m) in self.submeshes.iter().enumerate() {
            if m.cell_measures.iter().any(|&v| v <= 0.0) {
                rep.push(format!("subdomain {i}: non-positive cell measure"));
            }
            if m.dim == 0 && (m.num_vertices() != 1 || m.num_cells() != 1) {
                rep.push(format!("subdomain {i}: point mesh must have one vertex-cell"));
            }
            if m.facet_cells.iter().any(|c| c.is_empty() || c.len() > 2) {
                rep.push(format!("subdomain {i}: facet shared by more than two cells"));
            }
            let ratio = m.min_shape_ratio();
            if ratio < shape_floor {
                rep.push(format!(
                    "subdomain {i}: shape ratio {ratio:.3e} below floor {shape_floor:.3e}"
                ));
            }
        }
        rep.extend(self.check_matching());
        rep
    }

    /// Uniform refinement: triangles into 4, segments into 2, points kept.
    ///
    /// Existing vertices keep their indices; edge midpoints are appended.
    pub fn refine(&self) -> MdMesh {
        let mut subs = Vec::with_capacity(self.submeshes.len());
        for m in &self.submeshes {
            subs.push(refine_submesh(m));
        }
        let mut pairings = Vec::with_capacity(self.pairings.len());
        for c in &self.geom.connections {
            let old = &self.pairings[c.id];
            let (oh, ot) = (&self.submeshes[c.host], &self.submeshes[c.target]);
            let (nh, nt) = (&subs[c.host], &subs[c.target]);
            let mut pairs = Vec::new();
            if oh.dim == 2 && ot.dim == 1 {
                for &(f, cell, s) in &old.pairs {
                    let mid_h = oh.num_vertices() + f;
                    let u = ot.cells[cell][0];
                    for &hv in &oh.facets[f] {
                        let child = if close(nh.vertices[hv], nt.vertices[u], MATCH_TOL) {
                            2 * cell
                        } else {
                            2 * cell + 1
                        };
                        let e = nh.edge_id(hv, mid_h).expect("child edge exists");
                        pairs.push((e, child, s));
                    }
                }
                pairs.sort_unstable();
            } else {
                pairs = old.pairs.clone();
            }
            pairings.push(InterfacePairing {
                connection: c.id,
                pairs,
            });
        }
        MdMesh::new(self.geom.clone(), subs, pairings).expect("refinement preserves structure")
    }

    /// Total count of cells per dimension `[0D, 1D, 2D]`.
    pub fn cell_counts(&self) -> [usize; 3] {
        let mut out = [0; 3];
        for m in &self.submeshes {
            out[m.dim] += m.num_cells();
        }
        out
    }
}

/// Children of triangle `[a,b,c]` and segment `[a,b]` follow a fixed layout:
/// triangle children are the three corner triangles then the middle one;
/// segment `c` becomes cells `2c` (start half) and `2c + 1` (end half).
fn refine_submesh(m: &SubMesh) -> SubMesh {
    match m.dim {
        0 => m.clone(),
        1 => {
            let nv = m.num_vertices();
            let mut verts = m.vertices.clone();
            let mut cells = Vec::with_capacity(2 * m.num_cells());
            for (c, cell) in m.cells.iter().enumerate() {
                let (a, b) = (m.vertices[cell[0]], m.vertices[cell[1]]);
                verts.push([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
                cells.push(vec![cell[0], nv + c]);
                cells.push(vec![nv + c, cell[1]]);
            }
            SubMesh::new(1, verts, cells).expect("refined segments are valid")
        }
        _ => {
            let nv = m.num_vertices();
            let mut verts = m.vertices.clone();
            for f in &m.facets {
                let (a, b) = (m.vertices[f[0]], m.vertices[f[1]]);
                verts.push([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
            }
            let mut cells = Vec::with_capacity(4 * m.num_cells());
            for (c, cell) in m.cells.iter().enumerate() {
                // local facet k is opposite vertex k
                let mid = |k: usize| nv + m.cell_facets[c][k].0;
                let (a, b, cc) = (cell[0], cell[1], cell[2]);
                let (m_bc, m_ca, m_ab) = (mid(0), mid(1), mid(2));
                cells.push(vec![a, m_ab, m_ca]);
                cells.push(vec![m_ab, b, m_bc]);
                cells.push(vec![m_ca, m_bc, cc]);
                cells.push(vec![m_ab, m_bc, m_ca]);
            }
            SubMesh::new(2, verts, cells).expect("refined triangles are valid")
        }
    }
}
