//! JSON exchange format for matched meshes.
//!
//! Coordinates are written with the shortest representation that parses back
//! to the same `f64`, so a write/read cycle is bit-exact.

use serde::{Deserialize, Serialize};

use super::{InterfacePairing, MdMesh, MeshError, Point, SubMesh};
use crate::geom::{MixedDimGeometry, GEOM_VERSION};

pub const MESH_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeomBlock {
    pub mdgeom_version: u32,
    #[serde(flatten)]
    pub geom: MixedDimGeometry,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubMeshDoc {
    pub id: usize,
    pub vertices: Vec<Point>,
    pub cells: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairingDoc {
    pub connection: usize,
    pub pairs: Vec<(usize, usize, i8)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeshDoc {
    pub mdmesh_version: u32,
    pub geom: GeomBlock,
    pub submeshes: Vec<SubMeshDoc>,
    pub pairings: Vec<PairingDoc>,
}

impl MdMesh {
    pub fn to_doc(&self) -> MeshDoc {
        MeshDoc {
            mdmesh_version: MESH_VERSION,
            geom: GeomBlock {
                mdgeom_version: GEOM_VERSION,
                geom: self.geom.clone(),
            },
            submeshes: self
                .submeshes
                .iter()
                .enumerate()
                .map(|(id, m)| SubMeshDoc {
                    id,
                    vertices: m.vertices.clone(),
                    cells: m.cells.clone(),
                })
                .collect(),
            pairings: self
                .pairings
                .iter()
                .map(|p| PairingDoc {
                    connection: p.connection,
                    pairs: p.pairs.clone(),
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: MeshDoc) -> Result<Self, MeshError> {
        if doc.mdmesh_version != MESH_VERSION {
            return Err(MeshError::Version(doc.mdmesh_version));
        }
        if doc.geom.mdgeom_version != GEOM_VERSION {
            return Err(MeshError::Geom(crate::geom::GeomError::Version(
                doc.geom.mdgeom_version,
            )));
        }
        let geom = doc.geom.geom;
        let mut subs = doc.submeshes;
        subs.sort_by_key(|s| s.id);
        let mut submeshes = Vec::with_capacity(subs.len());
        for (k, s) in subs.into_iter().enumerate() {
            if s.id != k {
                return Err(MeshError::SparseIds(k));
            }
            let dim = geom.dim_of(k)?;
            let m = SubMesh::new(dim, s.vertices, s.cells)
                .map_err(|msg| MeshError::BadSubMesh { id: k, msg })?;
            submeshes.push(m);
        }
        let pairings = doc
            .pairings
            .into_iter()
            .map(|p| InterfacePairing {
                connection: p.connection,
                pairs: p.pairs,
            })
            .collect();
        MdMesh::new(geom, submeshes, pairings)
    }

    pub fn to_json(&self) -> Result<String, MeshError> {
        Ok(serde_json::to_string(&self.to_doc())?)
    }

    pub fn from_json(s: &str) -> Result<Self, MeshError> {
        Self::from_doc(serde_json::from_str(s)?)
    }
}
