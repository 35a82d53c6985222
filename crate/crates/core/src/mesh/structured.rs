//! Structured mesher for axis-aligned fracture networks in the unit square.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{InterfacePairing, MdMesh, MeshError, Point, SubMesh};
use crate::geom::{BoundaryConnection, MixedDimGeometry, Subdomain};

/// Straight fracture segment between two points of the unit square.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Self {
        Self { a, b }
    }

    pub fn horizontal(y: f64, x0: f64, x1: f64) -> Self {
        Self::new([x0, y], [x1, y])
    }

    pub fn vertical(x: f64, y0: f64, y1: f64) -> Self {
        Self::new([x, y0], [x, y1])
    }
}

pub const BUILTIN_GEOMETRIES: [&str; 4] = ["empty", "single", "cross", "regular"];

/// Segments and coarsest admissible lattice size of a builtin geometry.
pub fn builtin_segments(name: &str) -> Result<(Vec<Segment>, usize), MeshError> {
    let segs = match name {
        "empty" => (Vec::new(), 2),
        "single" => (vec![Segment::horizontal(0.5, 0.0, 1.0)], 2),
        "cross" => (
            vec![Segment::vertical(0.5, 0.0, 1.0), Segment::horizontal(0.5, 0.0, 1.0)],
            2,
        ),
        "regular" => (
            vec![
                Segment::vertical(0.5, 0.0, 1.0),
                Segment::horizontal(0.5, 0.0, 1.0),
                Segment::vertical(0.75, 0.5, 1.0),
                Segment::horizontal(0.75, 0.5, 1.0),
                Segment::vertical(0.625, 0.5, 0.75),
                Segment::horizontal(0.625, 0.5, 0.75),
            ],
            8,
        ),
        other => return Err(MeshError::UnknownBuiltin(other.to_string())),
    };
    Ok(segs)
}

/// Builds a builtin geometry on an `m × m` lattice (`m` defaults to the
/// coarsest admissible size).
pub fn build_builtin(name: &str, m: Option<usize>) -> Result<MdMesh, MeshError> {
    let (segs, base) = builtin_segments(name)?;
    build_structured(&segs, m.unwrap_or(base))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Lat(usize, usize);

struct Lattice {
    m: usize,
}

impl Lattice {
    fn vid(&self, p: Lat) -> usize {
        p.1 * (self.m + 1) + p.0
    }

    fn coord(&self, p: Lat) -> Point {
        [p.0 as f64 / self.m as f64, p.1 as f64 / self.m as f64]
    }

    fn snap(&self, x: f64) -> Option<usize> {
        let s = x * self.m as f64;
        let r = s.round();
        if (s - r).abs() <= 1e-9 && r >= 0.0 && r <= self.m as f64 {
            Some(r as usize)
        } else {
            None
        }
    }

    fn triangle(&self, t: usize) -> [Lat; 3] {
        let cell = t / 2;
        let (i, j) = (cell % self.m, cell / self.m);
        if t % 2 == 0 {
            [Lat(i, j), Lat(i + 1, j), Lat(i + 1, j + 1)]
        } else {
            [Lat(i, j), Lat(i + 1, j + 1), Lat(i, j + 1)]
        }
    }
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// A validated segment as an ordered run of lattice vertices (low to high).
fn lattice_run(lat: &Lattice, seg: &Segment, index: usize) -> Result<Vec<Lat>, MeshError> {
    let bad = |msg: &str| MeshError::BadSegment {
        index,
        msg: msg.to_string(),
    };
    let snap = |x: f64| lat.snap(x).ok_or_else(|| bad("endpoint is not on the lattice"));
    let (ai, aj) = (snap(seg.a[0])?, snap(seg.a[1])?);
    let (bi, bj) = (snap(seg.b[0])?, snap(seg.b[1])?);
    let m = lat.m;
    if ai == bi && aj == bj {
        return Err(bad("segment has zero length"));
    }
    if ai == bi {
        if ai == 0 || ai == m {
            return Err(bad("segment lies on the outer boundary"));
        }
        let (lo, hi) = (aj.min(bj), aj.max(bj));
        Ok((lo..=hi).map(|j| Lat(ai, j)).collect())
    } else if aj == bj {
        if aj == 0 || aj == m {
            return Err(bad("segment lies on the outer boundary"));
        }
        let (lo, hi) = (ai.min(bi), ai.max(bi));
        Ok((lo..=hi).map(|i| Lat(i, aj)).collect())
    } else {
        Err(bad("segment is not axis-aligned"))
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        // keep the smaller index as representative
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        parent[hi] = lo;
    }
}

/// Matched mesh of the unit square cut by lattice-conforming fractures.
///
/// Each lattice cell `(i, j)` holds the triangles
/// `[(i,j), (i+1,j), (i+1,j+1)]` and `[(i,j), (i+1,j+1), (i,j+1)]`. Rock
/// regions are the triangle components separated by fracture edges, ordered
/// by their smallest triangle. Intersection points are lattice vertices where
/// two or more segments meet; segments are split there into fractures.
/// Subdomain ids list rocks, then fractures, then points.
pub fn build_structured(segments: &[Segment], m: usize) -> Result<MdMesh, MeshError> {
    if m == 0 {
        return Err(MeshError::EmptyLattice);
    }
    let lat = Lattice { m };
    let runs: Vec<Vec<Lat>> = segments
        .iter()
        .enumerate()
        .map(|(k, s)| lattice_run(&lat, s, k))
        .collect::<Result<_, _>>()?;

    let mut frac_edge: HashMap<(usize, usize), usize> = HashMap::new();
    let nverts = (m + 1) * (m + 1);
    let mut vertex_segs: Vec<Vec<usize>> = vec![Vec::new(); nverts];
    for (s, run) in runs.iter().enumerate() {
        for w in run.windows(2) {
            let key = edge_key(lat.vid(w[0]), lat.vid(w[1]));
            if let Some(&other) = frac_edge.get(&key) {
                return Err(MeshError::Overlap {
                    first: other,
                    second: s,
                });
            }
            frac_edge.insert(key, s);
        }
        for p in run {
            let v = lat.vid(*p);
            if !vertex_segs[v].contains(&s) {
                vertex_segs[v].push(s);
            }
        }
    }
    let is_point: Vec<bool> = vertex_segs.iter().map(|s| s.len() >= 2).collect();

    let ntri = 2 * m * m;
    let tris: Vec<[Lat; 3]> = (0..ntri).map(|t| lat.triangle(t)).collect();
    let mut edge_tris: HashMap<(usize, usize), Vec<usize>> = HashMap::with_capacity(3 * ntri);
    let mut vert_tris: Vec<Vec<usize>> = vec![Vec::new(); nverts];
    for (t, tri) in tris.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (lat.vid(tri[k]), lat.vid(tri[(k + 1) % 3]));
            edge_tris.entry(edge_key(a, b)).or_default().push(t);
            vert_tris[a].push(t);
        }
    }

    // rock regions
    let mut parent: Vec<usize> = (0..ntri).collect();
    for (key, ts) in &edge_tris {
        if ts.len() == 2 && !frac_edge.contains_key(key) {
            union(&mut parent, ts[0], ts[1]);
        }
    }
    let mut region_of_root: HashMap<usize, usize> = HashMap::new();
    let mut region = vec![0usize; ntri];
    for t in 0..ntri {
        let r = find(&mut parent, t);
        let next = region_of_root.len();
        region[t] = *region_of_root.entry(r).or_insert(next);
    }
    let nrock = region_of_root.len();

    // vertex copies: fans of triangles around each lattice vertex
    let mut rock_vertices: Vec<Vec<Point>> = vec![Vec::new(); nrock];
    let mut copy_of: HashMap<(usize, usize), usize> = HashMap::new();
    let mut copies_at: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nverts];
    for v in 0..nverts {
        let ts = &vert_tris[v];
        let mut fan: Vec<usize> = (0..ts.len()).collect();
        for (a_idx, &ta) in ts.iter().enumerate() {
            for (b_idx, &tb) in ts.iter().enumerate().skip(a_idx + 1) {
                let shared: Vec<usize> = tris[ta]
                    .iter()
                    .map(|p| lat.vid(*p))
                    .filter(|&u| u != v && tris[tb].iter().any(|q| lat.vid(*q) == u))
                    .collect();
                if let Some(&u) = shared.first() {
                    if !frac_edge.contains_key(&edge_key(v, u)) {
                        union(&mut fan, a_idx, b_idx);
                    }
                }
            }
        }
        let mut group_copy: HashMap<usize, (usize, usize)> = HashMap::new();
        let mut order: Vec<usize> = (0..ts.len()).collect();
        order.sort_by_key(|&k| ts[k]);
        for k in order {
            let g = find(&mut fan, k);
            let entry = *group_copy.entry(g).or_insert_with(|| {
                let r = region[ts[k]];
                rock_vertices[r].push(lat.coord(Lat(v % (m + 1), v / (m + 1))));
                let c = (r, rock_vertices[r].len() - 1);
                copies_at[v].push(c);
                c
            });
            copy_of.insert((ts[k], v), entry.1);
        }
    }

    let mut rock_cells: Vec<Vec<Vec<usize>>> = vec![Vec::new(); nrock];
    let mut tri_local = vec![0usize; ntri];
    for (t, tri) in tris.iter().enumerate() {
        let r = region[t];
        tri_local[t] = rock_cells[r].len();
        rock_cells[r].push(tri.iter().map(|p| copy_of[&(t, lat.vid(*p))]).collect());
    }

    // fractures: segments split at interior intersection points
    let mut pieces: Vec<Vec<Lat>> = Vec::new();
    for run in &runs {
        let mut cur = vec![run[0]];
        for (k, p) in run.iter().enumerate().skip(1) {
            cur.push(*p);
            if k + 1 < run.len() && is_point[lat.vid(*p)] {
                pieces.push(std::mem::replace(&mut cur, vec![*p]));
            }
        }
        pieces.push(cur);
    }
    for (s, run) in runs.iter().enumerate() {
        let free = |p: &Lat| {
            !is_point[lat.vid(*p)] && p.0 != 0 && p.0 != m && p.1 != 0 && p.1 != m
        };
        if run.len() == 2 && free(&run[0]) && free(&run[1]) {
            return Err(MeshError::BadSegment {
                index: s,
                msg: "a single lattice edge with two free tips cannot be resolved; refine the lattice"
                    .into(),
            });
        }
    }
    let nfrac = pieces.len();
    let points: Vec<usize> = (0..nverts).filter(|&v| is_point[v]).collect();

    let mut subdomains = Vec::new();
    for r in 0..nrock {
        subdomains.push(Subdomain {
            id: r,
            dim: 2,
            label: Some(format!("rock {r}")),
        });
    }
    for f in 0..nfrac {
        subdomains.push(Subdomain {
            id: nrock + f,
            dim: 1,
            label: Some(format!("fracture {f}")),
        });
    }
    for (k, _) in points.iter().enumerate() {
        subdomains.push(Subdomain {
            id: nrock + nfrac + k,
            dim: 0,
            label: Some(format!("point {k}")),
        });
    }

    let mut submeshes = Vec::with_capacity(subdomains.len());
    for r in 0..nrock {
        let sm = SubMesh::new(2, rock_vertices[r].clone(), rock_cells[r].clone())
            .map_err(|msg| MeshError::BadSubMesh { id: r, msg })?;
        submeshes.push(sm);
    }
    for (f, piece) in pieces.iter().enumerate() {
        let verts = piece.iter().map(|p| lat.coord(*p)).collect();
        let cells = (0..piece.len() - 1).map(|k| vec![k, k + 1]).collect();
        let sm = SubMesh::new(1, verts, cells).map_err(|msg| MeshError::BadSubMesh {
            id: nrock + f,
            msg,
        })?;
        submeshes.push(sm);
    }
    for &v in &points {
        let p = lat.coord(Lat(v % (m + 1), v / (m + 1)));
        submeshes.push(SubMesh::new(0, vec![p], vec![vec![0]]).expect("point mesh"));
    }

    let mut connections: Vec<BoundaryConnection> = Vec::new();
    let mut pairings: Vec<InterfacePairing> = Vec::new();
    let mut push = |host: usize, target: usize, side_tag: i32, pairs: Vec<(usize, usize, i8)>| {
        let id = connections.len();
        connections.push(BoundaryConnection {
            id,
            host,
            target,
            side_tag,
        });
        pairings.push(InterfacePairing {
            connection: id,
            pairs,
        });
    };

    // rock → fracture, grouped by (region, side)
    for (f, piece) in pieces.iter().enumerate() {
        let fid = nrock + f;
        let normal = submeshes[fid].tangent().map(super::rot_ccw).unwrap();
        let mut groups: Vec<((usize, i8), Vec<(usize, usize, i8)>)> = Vec::new();
        for (k, w) in piece.windows(2).enumerate() {
            let (va, vb) = (lat.vid(w[0]), lat.vid(w[1]));
            let (pa, pb) = (lat.coord(w[0]), lat.coord(w[1]));
            let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            let mut sides: Vec<(i8, usize)> = edge_tris[&edge_key(va, vb)]
                .iter()
                .map(|&t| {
                    let c = super::centroid(tris[t].iter().map(|p| lat.coord(*p)));
                    let s = if super::dot2(super::sub(c, mid), normal) < 0.0 { 1 } else { -1 };
                    (s, t)
                })
                .collect();
            sides.sort_by_key(|&(s, _)| -s);
            for (s, t) in sides {
                let r = region[t];
                let facet = submeshes[r]
                    .edge_id(copy_of[&(t, va)], copy_of[&(t, vb)])
                    .expect("fracture edge is a rock facet");
                match groups.iter_mut().find(|g| g.0 == (r, s)) {
                    Some(g) => g.1.push((facet, k, s)),
                    None => groups.push(((r, s), vec![(facet, k, s)])),
                }
            }
        }
        groups.sort_by_key(|g| (-g.0 .1, g.0 .0));
        for ((r, s), pairs) in groups {
            push(r, fid, s as i32, pairs);
        }
    }
    // rock → point, one connection per vertex copy
    for (k, &v) in points.iter().enumerate() {
        for (ordinal, &(r, local)) in copies_at[v].iter().enumerate() {
            push(r, nrock + nfrac + k, ordinal as i32, vec![(local, 0, 1)]);
        }
    }
    // fracture → point at fracture ends
    for (f, piece) in pieces.iter().enumerate() {
        let ends = [(0usize, piece[0], -1i8), (piece.len() - 1, piece[piece.len() - 1], 1)];
        for (local, p, eps) in ends {
            let v = lat.vid(p);
            if is_point[v] {
                let k = points.binary_search(&v).unwrap();
                push(nrock + f, nrock + nfrac + k, eps as i32, vec![(local, 0, eps)]);
            }
        }
    }

    let geom = MixedDimGeometry {
        ambient_dim: 2,
        subdomains,
        connections,
    };
    MdMesh::new(geom, submeshes, pairings)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomNetworkConfig {
    pub seed: u64,
    pub count: usize,
    pub m: usize,
    /// Segment length range in lattice units (at least 2).
    pub min_len: usize,
    pub max_len: usize,
    /// Rejected draws allowed per placed segment.
    pub max_attempts: usize,
}

impl RandomNetworkConfig {
    pub fn new(seed: u64, count: usize, m: usize) -> Self {
        let min_len = (m / 8).max(2);
        Self {
            seed,
            count,
            m,
            min_len,
            max_len: (m / 2).max(min_len),
            max_attempts: 1000,
        }
    }

    /// Sequentially sampled segments; a prefix of a longer draw with the same seed.
    pub fn segments(&self) -> Result<Vec<Segment>, MeshError> {
        let m = self.m;
        if m < 2 {
            return Err(MeshError::EmptyLattice);
        }
        let max_len = self.max_len.min(m);
        let min_len = self.min_len.clamp(2.min(max_len), max_len);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut used: std::collections::HashSet<(bool, usize, usize)> = Default::default();
        let mut segs = Vec::with_capacity(self.count);
        let mut attempts = 0usize;
        while segs.len() < self.count {
            if attempts >= self.max_attempts * (segs.len() + 1) {
                return Err(MeshError::Capacity {
                    requested: self.count,
                    placed: segs.len(),
                    attempts,
                });
            }
            attempts += 1;
            let vertical: bool = rng.gen();
            let line = rng.gen_range(1..m);
            let len = rng.gen_range(min_len..=max_len);
            let start = rng.gen_range(0..=m - len);
            if (start..start + len).any(|k| used.contains(&(vertical, line, k))) {
                continue;
            }
            for k in start..start + len {
                used.insert((vertical, line, k));
            }
            let (c, s0, s1) = (
                line as f64 / m as f64,
                start as f64 / m as f64,
                (start + len) as f64 / m as f64,
            );
            segs.push(if vertical {
                Segment::vertical(c, s0, s1)
            } else {
                Segment::horizontal(c, s0, s1)
            });
        }
        Ok(segs)
    }
}

/// Random lattice network: `count` non-overlapping axis-aligned segments.
pub fn build_random_network(cfg: &RandomNetworkConfig) -> Result<MdMesh, MeshError> {
    build_structured(&cfg.segments()?, cfg.m)
}
