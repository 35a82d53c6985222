use mdaux::geom::{BoundaryConnection, MixedDimGeometry, Subdomain};
use mdaux::mesh::{
    build_builtin, build_random_network, build_structured, EndKind, MdMesh, RandomNetworkConfig,
    Segment, BUILTIN_GEOMETRIES,
};
use proptest::prelude::*;

fn rock_area(mesh: &MdMesh) -> f64 {
    mesh.submeshes
        .iter()
        .filter(|m| m.dim == 2)
        .map(|m| m.total_measure())
        .sum()
}

#[test]
fn sample_network_index_sets() {
    let g = MixedDimGeometry::sample_network();
    assert_eq!(g.index_set(1).unwrap(), vec![3, 4, 5]);
    assert_eq!(g.index_set(2).unwrap(), vec![1, 2]);
    assert_eq!(g.index_set(0).unwrap(), vec![6, 7]);
    assert_eq!(g.connections_of(2, 1).unwrap(), vec![12, 13]);
    assert_eq!(g.connections_of(2, 0).unwrap(), vec![16]);
    // the fracture touched from both sides by the same rock region
    let c9 = g.connection(9).unwrap();
    let c10 = g.connection(10).unwrap();
    assert_eq!((c9.host, c9.target), (c10.host, c10.target));
    assert_ne!(c9.side_tag, c10.side_tag);
}

#[test]
fn single_rock_has_no_points() {
    let g = MixedDimGeometry {
        ambient_dim: 2,
        subdomains: vec![Subdomain {
            id: 0,
            dim: 2,
            label: None,
        }],
        connections: vec![],
    };
    assert!(g.index_set(0).unwrap().is_empty());
    assert!(g.validate().is_ok());
}

#[test]
fn bad_descent_is_one_violation() {
    let g = MixedDimGeometry {
        ambient_dim: 2,
        subdomains: vec![
            Subdomain {
                id: 0,
                dim: 1,
                label: None,
            },
            Subdomain {
                id: 1,
                dim: 2,
                label: None,
            },
        ],
        connections: vec![BoundaryConnection {
            id: 0,
            host: 0,
            target: 1,
            side_tag: 1,
        }],
    };
    assert_eq!(g.validate().violations.len(), 1);
}

#[test]
fn empty_lattice_mesh() {
    let mesh = build_builtin("empty", None).unwrap();
    assert_eq!(mesh.num_subdomains(), 1);
    assert_eq!(mesh.submeshes[0].num_cells(), 8);
    assert!(mesh.geom.connections.is_empty());
    assert!((mesh.h - 2f64.sqrt() / 2.0).abs() < 1e-15);
    let twice = mesh.refine().refine();
    assert_eq!(twice.submeshes[0].num_cells(), 128);
}

#[test]
fn single_fracture_enumeration() {
    let mesh = build_builtin("single", None).unwrap();
    let g = &mesh.geom;
    assert_eq!(g.index_set(2).unwrap(), vec![0, 1]);
    assert_eq!(g.index_set(1).unwrap(), vec![2]);
    assert!(g.index_set(0).unwrap().is_empty());
    assert_eq!(mesh.submeshes[0].num_cells(), 4);
    assert_eq!(mesh.submeshes[1].num_cells(), 4);
    assert_eq!(mesh.submeshes[2].num_cells(), 2);
    assert_eq!(mesh.pairings.len(), 2);
    assert!(mesh.pairings.iter().all(|p| p.pairs.len() == 2));
    let c = g.connections_of(0, 1).unwrap();
    assert_eq!(c.len(), 1);
    assert_eq!(g.connections[c[0]].target, 2);
    // rock below the fracture looks along the fracture normal (0, 1)
    assert_eq!(g.connections[c[0]].side_tag, 1);
    assert!(mesh.submeshes[0].vertices.iter().all(|p| p[1] <= 0.5));
    let ends = mesh.end_kinds(2);
    assert!(ends.iter().all(|e| e.1 == EndKind::Boundary));
}

#[test]
fn cross_enumeration() {
    let mesh = build_builtin("cross", None).unwrap();
    let g = &mesh.geom;
    assert_eq!(g.index_set(2).unwrap().len(), 4);
    assert_eq!(g.index_set(1).unwrap().len(), 4);
    assert_eq!(g.index_set(0).unwrap().len(), 1);
    let p = g.index_set(0).unwrap()[0];
    assert_eq!(mesh.submeshes[p].vertices[0], [0.5, 0.5]);
    assert!(g.validate().is_ok());
    for f in g.index_set(1).unwrap() {
        assert_eq!(g.connections_of(f, 0).unwrap().len(), 1);
        assert_eq!(mesh.submeshes[f].num_cells(), 1);
    }
}

#[test]
fn refinement_doubles_counts() {
    for name in BUILTIN_GEOMETRIES {
        let mesh = build_builtin(name, None).unwrap();
        let fine = mesh.refine();
        for (a, b) in mesh.submeshes.iter().zip(&fine.submeshes) {
            let factor = [1, 2, 4][a.dim];
            assert_eq!(b.num_cells(), factor * a.num_cells());
            assert!((a.total_measure() - b.total_measure()).abs() < 1e-14);
        }
        for (a, b) in mesh.pairings.iter().zip(&fine.pairings) {
            let c = mesh.geom.connections[a.connection];
            let factor = if mesh.dim(c.target) == 1 { 2 } else { 1 };
            assert_eq!(b.pairs.len(), factor * a.pairs.len());
        }
        assert!((fine.h - mesh.h / 2.0).abs() < 1e-15);
        assert!(fine.check_matching().is_ok(), "{:?}", fine.check_matching());
    }
}

#[test]
fn refined_mesh_matches_direct_build() {
    let coarse = build_builtin("regular", None).unwrap().refine();
    let direct = build_builtin("regular", Some(16)).unwrap();
    assert_eq!(coarse.cell_counts(), direct.cell_counts());
    assert_eq!(coarse.geom.connections.len(), direct.geom.connections.len());
}

#[test]
fn perturbed_vertex_breaks_matching() {
    let mut mesh = build_builtin("single", Some(4)).unwrap();
    assert!(mesh.check_matching().is_ok());
    mesh.submeshes[2].vertices[1][1] += 1e-3;
    assert!(!mesh.check_matching().is_ok());
}

#[test]
fn normals_are_unit_and_outward() {
    for name in BUILTIN_GEOMETRIES {
        let mesh = build_builtin(name, None).unwrap().refine();
        for m in mesh.submeshes.iter().filter(|m| m.dim == 2) {
            for c in 0..m.num_cells() {
                for k in 0..3 {
                    let n = m.outward_normal(c, k);
                    assert!(((n[0] * n[0] + n[1] * n[1]).sqrt() - 1.0).abs() < 1e-14);
                    let f = m.cell_facets[c][k].0;
                    let (mp, cc) = (m.facet_midpoint(f), m.cell_centroid(c));
                    assert!(n[0] * (mp[0] - cc[0]) + n[1] * (mp[1] - cc[1]) > 0.0);
                }
            }
        }
    }
}

#[test]
fn random_network_is_deterministic_with_prefix_property() {
    let c5 = RandomNetworkConfig::new(17, 5, 16);
    let c10 = RandomNetworkConfig::new(17, 10, 16);
    let s5 = c5.segments().unwrap();
    let s10 = c10.segments().unwrap();
    assert_eq!(s5[..], s10[..5]);
    let a = build_random_network(&c10).unwrap();
    let b = build_random_network(&c10).unwrap();
    for (x, y) in a.submeshes.iter().zip(&b.submeshes) {
        let bits = |m: &mdaux::mesh::SubMesh| {
            m.vertices.iter().flat_map(|p| [p[0].to_bits(), p[1].to_bits()]).collect::<Vec<_>>()
        };
        assert_eq!(bits(x), bits(y));
    }
    let empty = build_random_network(&RandomNetworkConfig::new(17, 0, 16)).unwrap();
    assert_eq!(empty, build_structured(&[], 16).unwrap());
    assert!(a.validate(0.01).is_ok());
}

#[test]
fn capacity_error_when_lattice_is_full() {
    let mut cfg = RandomNetworkConfig::new(3, 50, 2);
    cfg.max_attempts = 20;
    assert!(matches!(
        build_random_network(&cfg),
        Err(mdaux::mesh::MeshError::Capacity { .. })
    ));
}

#[test]
fn tip_classification() {
    let mesh = build_structured(
        &[Segment::horizontal(0.5, 0.0, 0.75), Segment::vertical(0.25, 0.25, 0.75)],
        4,
    )
    .unwrap();
    let kinds: Vec<EndKind> = mesh
        .ids_of_dim(1)
        .iter()
        .flat_map(|&f| mesh.end_kinds(f).into_iter().map(|e| e.1))
        .collect();
    assert!(kinds.contains(&EndKind::Tip));
    assert!(kinds.contains(&EndKind::Boundary));
    assert!(kinds.contains(&EndKind::Point));
    assert!(mesh.validate(0.01).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn random_networks_are_matched_and_cover_the_square(seed in 0u64..1000, count in 0usize..8) {
        let mesh = build_random_network(&RandomNetworkConfig::new(seed, count, 8)).unwrap();
        prop_assert!((rock_area(&mesh) - 1.0).abs() < 1e-14);
        prop_assert!(mesh.validate(0.01).is_ok());
        let fine = mesh.refine();
        prop_assert!(fine.check_matching().is_ok());
        prop_assert!((rock_area(&fine) - 1.0).abs() < 1e-14);
    }
}
