//! Mixed-dimensional geometry: subdomains of dimension 0..=n and the boundary
//! connections that attach each subdomain to its lower-dimensional neighbours.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ValidationReport;

pub const GEOM_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("dimension {d} out of range 0..={max}")]
    DimOutOfRange { d: usize, max: usize },
    #[error("unknown subdomain {0}")]
    UnknownSubdomain(usize),
    #[error("codimension query d = {d} requires d < dim = {dim} of subdomain {id}")]
    NotLowerDimensional { id: usize, d: usize, dim: usize },
    #[error("unsupported geometry version {0}")]
    Version(u32),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subdomain {
    pub id: usize,
    pub dim: usize,
    #[serde(default)]
    pub label: Option<String>,
}

/// Attaches `host` to a lower-dimensional `target` lying on its boundary.
///
/// `side_tag` distinguishes several connections between the same pair, e.g. a
/// fracture bordered by the same rock region from both sides.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryConnection {
    pub id: usize,
    pub host: usize,
    pub target: usize,
    pub side_tag: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedDimGeometry {
    pub ambient_dim: usize,
    pub subdomains: Vec<Subdomain>,
    pub connections: Vec<BoundaryConnection>,
}

#[derive(Serialize, Deserialize)]
struct GeomDoc {
    mdgeom_version: u32,
    #[serde(flatten)]
    geom: MixedDimGeometry,
}

impl MixedDimGeometry {
    pub fn subdomain(&self, id: usize) -> Option<&Subdomain> {
        self.subdomains.iter().find(|s| s.id == id)
    }

    pub fn connection(&self, id: usize) -> Option<&BoundaryConnection> {
        self.connections.iter().find(|c| c.id == id)
    }

    pub fn dim_of(&self, id: usize) -> Result<usize, GeomError> {
        self.subdomain(id)
            .map(|s| s.dim)
            .ok_or(GeomError::UnknownSubdomain(id))
    }

    /// `{i : d_i = d}`, ascending.
    pub fn index_set(&self, d: usize) -> Result<Vec<usize>, GeomError> {
        if d > self.ambient_dim {
            return Err(GeomError::DimOutOfRange {
                d,
                max: self.ambient_dim,
            });
        }
        let mut ids: Vec<usize> = self
            .subdomains
            .iter()
            .filter(|s| s.dim == d)
            .map(|s| s.id)
            .collect();
        ids.sort_unstable();
        Ok(ids)
    }

    /// Connections hosted by `i` whose target has dimension `d`, ascending.
    pub fn connections_of(&self, i: usize, d: usize) -> Result<Vec<usize>, GeomError> {
        let dim = self.dim_of(i)?;
        if d >= dim {
            return Err(GeomError::NotLowerDimensional { id: i, d, dim });
        }
        let mut ids: Vec<usize> = self
            .connections
            .iter()
            .filter(|c| c.host == i && self.dim_of(c.target).ok() == Some(d))
            .map(|c| c.id)
            .collect();
        ids.sort_unstable();
        Ok(ids)
    }

    /// All connections hosted by `i`, ascending.
    pub fn all_connections_of(&self, i: usize) -> Vec<usize> {
        let mut ids: Vec<usize> = self
            .connections
            .iter()
            .filter(|c| c.host == i)
            .map(|c| c.id)
            .collect();
        ids.sort_unstable();
        ids
    }

    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::default();
        for s in &self.subdomains {
            if s.dim > self.ambient_dim {
                rep.push(format!(
                    "subdomain {} has dim {} > ambient {}",
                    s.id, s.dim, self.ambient_dim
                ));
            }
        }
        let mut ids: Vec<usize> = self.subdomains.iter().map(|s| s.id).collect();
        ids.sort_unstable();
        for w in ids.windows(2) {
            if w[0] == w[1] {
                rep.push(format!("duplicate subdomain id {}", w[0]));
            }
        }
        let mut uniq = ids.clone();
        uniq.dedup();
        if let (Some(&lo), Some(&hi)) = (uniq.first(), uniq.last()) {
            if hi - lo + 1 != uniq.len() {
                rep.push(format!("subdomain ids {lo}..={hi} are not contiguous"));
            }
        }
        let mut cids: Vec<usize> = self.connections.iter().map(|c| c.id).collect();
        cids.sort_unstable();
        for w in cids.windows(2) {
            if w[0] == w[1] {
                rep.push(format!("duplicate connection id {}", w[0]));
            }
        }
        for c in &self.connections {
            match (self.subdomain(c.host), self.subdomain(c.target)) {
                (Some(h), Some(t)) => {
                    if t.dim >= h.dim {
                        rep.push(format!(
                            "connection {}: target dim {} not below host dim {}",
                            c.id, t.dim, h.dim
                        ));
                    }
                }
                _ => rep.push(format!(
                    "connection {} references an unknown subdomain",
                    c.id
                )),
            }
        }
        if self.ambient_dim == 2 {
            for s in self.subdomains.iter().filter(|s| s.dim == 0) {
                let on_fracture = self.connections.iter().any(|c| {
                    c.target == s.id && self.subdomain(c.host).map(|h| h.dim) == Some(1)
                });
                if !on_fracture {
                    rep.push(format!("point {} is not attached to any fracture", s.id));
                }
            }
        }
        rep
    }

    pub fn to_json(&self) -> Result<String, GeomError> {
        Ok(serde_json::to_string_pretty(&GeomDoc {
            mdgeom_version: GEOM_VERSION,
            geom: self.clone(),
        })?)
    }

    pub fn from_json(s: &str) -> Result<Self, GeomError> {
        let doc: GeomDoc = serde_json::from_str(s)?;
        if doc.mdgeom_version != GEOM_VERSION {
            return Err(GeomError::Version(doc.mdgeom_version));
        }
        Ok(doc.geom)
    }

    /// Two rock regions, three fractures and two intersection points with
    /// 1-based ids; connections are numbered 8..=21 after the subdomains.
    pub fn sample_network() -> Self {
        let dims = [2, 2, 1, 1, 1, 0, 0];
        let subdomains = dims
            .iter()
            .enumerate()
            .map(|(k, &dim)| Subdomain {
                id: k + 1,
                dim,
                label: None,
            })
            .collect();
        let pairs: [(usize, usize, i32); 14] = [
            (1, 3, 1),
            (1, 4, 1),
            (1, 4, -1),
            (1, 5, 1),
            (2, 5, -1),
            (2, 3, -1),
            (3, 6, 1),
            (5, 6, -1),
            (2, 6, 0),
            (4, 6, 1),
            (1, 6, 0),
            (1, 6, 1),
            (4, 7, 1),
            (1, 7, 0),
        ];
        let connections = pairs
            .iter()
            .enumerate()
            .map(|(k, &(host, target, side_tag))| BoundaryConnection {
                id: k + 8,
                host,
                target,
                side_tag,
            })
            .collect();
        Self {
            ambient_dim: 2,
            subdomains,
            connections,
        }
    }
}
