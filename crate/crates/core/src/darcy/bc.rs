use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::DarcyError;
use crate::mesh::{EndKind, MdMesh, Point};

/// Condition on one side of the bounding box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum SideBc {
    /// Affine pressure `a + bx·x + by·y`.
    Pressure { a: f64, bx: f64, by: f64 },
    NoFlux,
}

impl SideBc {
    pub fn constant(p: f64) -> Self {
        SideBc::Pressure { a: p, bx: 0.0, by: 0.0 }
    }

    fn value(&self, x: Point) -> Option<f64> {
        match *self {
            SideBc::Pressure { a, bx, by } => Some(a + bx * x[0] + by * x[1]),
            SideBc::NoFlux => None,
        }
    }
}

/// Conditions per side of the bounding box of the rock domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SideBcs {
    pub left: SideBc,
    pub right: SideBc,
    pub bottom: SideBc,
    pub top: SideBc,
}

impl SideBcs {
    pub fn constant_pressure(p: f64) -> Self {
        let s = SideBc::constant(p);
        Self {
            left: s,
            right: s,
            bottom: s,
            top: s,
        }
    }

    /// Pressure `pl` on the left, `pr` on the right, no flux elsewhere.
    pub fn left_right(pl: f64, pr: f64) -> Self {
        Self {
            left: SideBc::constant(pl),
            right: SideBc::constant(pr),
            bottom: SideBc::NoFlux,
            top: SideBc::NoFlux,
        }
    }

    /// The side containing `x`; corners resolve left, right, bottom, top.
    fn side(&self, bbox: [f64; 4], x: Point) -> &SideBc {
        let tol = 1e-9 * (bbox[2] - bbox[0]).max(bbox[3] - bbox[1]);
        if (x[0] - bbox[0]).abs() <= tol {
            &self.left
        } else if (x[0] - bbox[2]).abs() <= tol {
            &self.right
        } else if (x[1] - bbox[1]).abs() <= tol {
            &self.bottom
        } else {
            &self.top
        }
    }
}

/// A mesh entity on the outer boundary that carries a flux DOF.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BoundaryEntity {
    RockFacet { sub: usize, facet: usize },
    FractureEnd { sub: usize, vertex: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryValue {
    Pressure(f64),
    NoFlux,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryConditions {
    Sides(SideBcs),
    /// Every boundary entity must be listed exactly once.
    Explicit(BTreeMap<BoundaryEntity, BoundaryValue>),
}

/// All boundary entities with their evaluation point: unpaired rock facets on
/// the outer boundary and fracture ends touching it.
pub fn boundary_entities(mesh: &MdMesh) -> Vec<(BoundaryEntity, Point)> {
    let mut out = Vec::new();
    for i in mesh.ids_of_dim(2) {
        let m = &mesh.submeshes[i];
        let paired = mesh.paired_rock_facets(i);
        for f in 0..m.num_facets() {
            let x = m.facet_midpoint(f);
            if m.is_boundary_facet(f) && paired[f].is_none() && mesh.on_outer_boundary(x) {
                out.push((BoundaryEntity::RockFacet { sub: i, facet: f }, x));
            }
        }
    }
    for i in mesh.ids_of_dim(1) {
        for (v, kind) in mesh.end_kinds(i) {
            if kind == EndKind::Boundary {
                out.push((BoundaryEntity::FractureEnd { sub: i, vertex: v }, mesh.submeshes[i].vertices[v]));
            }
        }
    }
    out
}

impl BoundaryConditions {
    /// Value assigned to every boundary entity, in [`boundary_entities`] order.
    pub fn resolve(&self, mesh: &MdMesh) -> Result<Vec<(BoundaryEntity, BoundaryValue)>, DarcyError> {
        let ents = boundary_entities(mesh);
        match self {
            BoundaryConditions::Sides(s) => {
                let bbox = mesh.bbox();
                Ok(ents
                    .into_iter()
                    .map(|(e, x)| {
                        let v = match s.side(bbox, x).value(x) {
                            Some(p) => BoundaryValue::Pressure(p),
                            None => BoundaryValue::NoFlux,
                        };
                        (e, v)
                    })
                    .collect())
            }
            BoundaryConditions::Explicit(map) => {
                let mut out = Vec::with_capacity(ents.len());
                for (e, _) in &ents {
                    match map.get(e) {
                        Some(v) => out.push((*e, *v)),
                        None => return Err(DarcyError::Uncovered(*e)),
                    }
                }
                if map.len() != out.len() {
                    let extra = map.keys().find(|k| !ents.iter().any(|(e, _)| e == *k)).unwrap();
                    return Err(DarcyError::Input(format!("{extra:?} is not a boundary entity")));
                }
                Ok(out)
            }
        }
    }
}
