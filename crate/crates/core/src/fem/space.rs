use serde::Serialize;

use crate::mesh::{EndKind, MdMesh};

/// Which mesh entity carries a DOF.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Entity {
    Vertex,
    Facet,
    Cell,
}

/// DOF layout of a discrete mixed-dimensional k-form space (n = 2).
///
/// * k = 0: P1 on rock vertices.
/// * k = 1: RT0 on rock facets and P1 on fracture vertices; immersed fracture
///   tips carry no DOF.
/// * k = 2: P0 on every cell of every subdomain.
#[derive(Clone, Debug, PartialEq)]
pub struct MdSpace {
    pub k: usize,
    offsets: Vec<usize>,
    entities: Vec<Vec<usize>>,
    dof_of: Vec<Vec<Option<usize>>>,
    kinds: Vec<Option<Entity>>,
}

impl MdSpace {
    pub fn new(mesh: &MdMesh, k: usize) -> Self {
        assert!(k <= 2, "form degree {k} out of range for n = 2");
        let mut offsets = vec![0];
        let mut entities = Vec::new();
        let mut dof_of = Vec::new();
        let mut kinds = Vec::new();
        for i in 0..mesh.num_subdomains() {
            let m = &mesh.submeshes[i];
            let (kind, ents): (Option<Entity>, Vec<usize>) = match (k, m.dim) {
                (0, 2) => (Some(Entity::Vertex), (0..m.num_vertices()).collect()),
                (1, 2) => (Some(Entity::Facet), (0..m.num_facets()).collect()),
                (1, 1) => {
                    let tips: Vec<usize> = mesh
                        .end_kinds(i)
                        .into_iter()
                        .filter(|e| e.1 == EndKind::Tip)
                        .map(|e| e.0)
                        .collect();
                    (
                        Some(Entity::Vertex),
                        (0..m.num_vertices()).filter(|v| !tips.contains(v)).collect(),
                    )
                }
                (2, _) => (Some(Entity::Cell), (0..m.num_cells()).collect()),
                _ => (None, Vec::new()),
            };
            let count = match kind {
                Some(Entity::Vertex) => m.num_vertices(),
                Some(Entity::Facet) => m.num_facets(),
                Some(Entity::Cell) => m.num_cells(),
                None => 0,
            };
            let base = *offsets.last().unwrap();
            let mut map = vec![None; count];
            for (l, &e) in ents.iter().enumerate() {
                map[e] = Some(base + l);
            }
            offsets.push(base + ents.len());
            entities.push(ents);
            dof_of.push(map);
            kinds.push(kind);
        }
        Self {
            k,
            offsets,
            entities,
            dof_of,
            kinds,
        }
    }

    pub fn total_dofs(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn offset(&self, sub: usize) -> usize {
        self.offsets[sub]
    }

    pub fn range(&self, sub: usize) -> std::ops::Range<usize> {
        self.offsets[sub]..self.offsets[sub + 1]
    }

    pub fn dof(&self, sub: usize, entity: usize) -> Option<usize> {
        self.dof_of[sub].get(entity).copied().flatten()
    }

    pub fn entities(&self, sub: usize) -> &[usize] {
        &self.entities[sub]
    }

    pub fn entity_kind(&self, sub: usize) -> Option<Entity> {
        self.kinds[sub]
    }

    /// Finite element family name on subdomain `sub`.
    pub fn family(&self, sub: usize) -> &'static str {
        match (self.k, self.kinds[sub]) {
            (0, Some(_)) => "P1",
            (1, Some(Entity::Facet)) => "RT0",
            (1, Some(_)) => "P1",
            (2, Some(_)) => "P0",
            _ => "none",
        }
    }

    /// `(subdomain, entity)` of every global DOF, in order.
    pub fn owners(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.total_dofs());
        for (s, ents) in self.entities.iter().enumerate() {
            out.extend(ents.iter().map(|&e| (s, e)));
        }
        out
    }

    pub fn dof_records(&self, name: &str) -> Vec<DofRecord> {
        self.owners()
            .into_iter()
            .enumerate()
            .map(|(g, (s, e))| DofRecord {
                space: name.to_string(),
                k: self.k,
                subdomain: s,
                entity: format!("{:?}:{e}", self.kinds[s].unwrap()).to_lowercase(),
                component: None,
                global_index: g,
            })
            .collect()
    }
}

/// One line of an exported DOF map.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DofRecord {
    pub space: String,
    pub k: usize,
    pub subdomain: usize,
    pub entity: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub component: Option<usize>,
    pub global_index: usize,
}

/// Nodal (vector) P1 layout of a regular k-form space.
///
/// For k = 1: two components on rock vertices and one on every fracture
/// vertex. For k = 0: one component on rock vertices. DOFs of a subdomain are
/// stored component-major.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularSpace {
    pub k: usize,
    offsets: Vec<usize>,
    components: Vec<usize>,
    nverts: Vec<usize>,
}

impl RegularSpace {
    pub fn new(mesh: &MdMesh, k: usize) -> Self {
        assert!(k <= 1, "regular spaces are used for k = 0, 1");
        let mut offsets = vec![0];
        let mut components = Vec::new();
        let mut nverts = Vec::new();
        for m in &mesh.submeshes {
            let c = match (k, m.dim) {
                (0, 2) => 1,
                (1, 2) => 2,
                (1, 1) => 1,
                _ => 0,
            };
            components.push(c);
            nverts.push(m.num_vertices());
            offsets.push(offsets.last().unwrap() + c * m.num_vertices());
        }
        Self {
            k,
            offsets,
            components,
            nverts,
        }
    }

    pub fn total_dofs(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn components(&self, sub: usize) -> usize {
        self.components[sub]
    }

    pub fn dof(&self, sub: usize, comp: usize, vertex: usize) -> usize {
        debug_assert!(comp < self.components[sub] && vertex < self.nverts[sub]);
        self.offsets[sub] + comp * self.nverts[sub] + vertex
    }

    pub fn range(&self, sub: usize) -> std::ops::Range<usize> {
        self.offsets[sub]..self.offsets[sub + 1]
    }

    pub fn dof_records(&self, name: &str) -> Vec<DofRecord> {
        let mut out = Vec::with_capacity(self.total_dofs());
        for s in 0..self.components.len() {
            for c in 0..self.components[s] {
                for v in 0..self.nverts[s] {
                    out.push(DofRecord {
                        space: name.to_string(),
                        k: self.k,
                        subdomain: s,
                        entity: format!("vertex:{v}"),
                        component: Some(c),
                        global_index: self.dof(s, c, v),
                    });
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_builtin;

    #[test]
    fn single_fracture_counts() {
        let mesh = build_builtin("single", None).unwrap();
        let q = MdSpace::new(&mesh, 1);
        let p = MdSpace::new(&mesh, 2);
        let a = MdSpace::new(&mesh, 0);
        let r = &mesh.submeshes[0];
        // each rock half: 4 triangles, 6 vertices, 9 edges
        assert_eq!((r.num_cells(), r.num_vertices(), r.num_facets()), (4, 6, 9));
        assert_eq!(q.total_dofs(), 9 + 9 + 3);
        assert_eq!(p.total_dofs(), 4 + 4 + 2);
        assert_eq!(a.total_dofs(), 12);
        assert_eq!(q.family(0), "RT0");
        assert_eq!(q.family(2), "P1");
        let reg = RegularSpace::new(&mesh, 1);
        assert_eq!(reg.total_dofs(), 2 * 12 + 3);
        assert_eq!(RegularSpace::new(&mesh, 0).total_dofs(), a.total_dofs());
    }

    #[test]
    fn records_cover_all_dofs() {
        let mesh = build_builtin("cross", None).unwrap();
        let q = MdSpace::new(&mesh, 1);
        let recs = q.dof_records("flux");
        assert_eq!(recs.len(), q.total_dofs());
        assert!(recs.iter().enumerate().all(|(g, r)| r.global_index == g));
        for (g, (s, e)) in q.owners().into_iter().enumerate() {
            assert_eq!(q.dof(s, e), Some(g));
        }
    }
}
