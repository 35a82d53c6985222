use mdaux::fem::*;
use mdaux::la::{dense_eigs_sym, DenseMatrix, SparseMatrix};
use mdaux::mesh::{build_builtin, build_random_network, MdMesh, Point, RandomNetworkConfig, BUILTIN_GEOMETRIES};
use proptest::prelude::*;

fn quad(a: &SparseMatrix, x: &[f64]) -> f64 {
    let ax = a.spmv(x).unwrap();
    ax.iter().zip(x).map(|(p, q)| p * q).sum()
}

fn spaces(mesh: &MdMesh) -> (MdSpace, MdSpace, MdSpace) {
    (MdSpace::new(mesh, 0), MdSpace::new(mesh, 1), MdSpace::new(mesh, 2))
}

fn unit_perm(mesh: &MdMesh) -> PermeabilityField {
    PermeabilityField::uniform(mesh, 1.0, 1.0, 1.0).unwrap()
}

/// RT0 mass matrix built from scratch: each basis function `a + b x` is found
/// by solving for unit flux through one edge, then integrated with the
/// interior three-point rule.
fn rt0_mass_oracle(mesh: &MdMesh, q: &MdSpace) -> DenseMatrix {
    let n = q.total_dofs();
    let mut out = DenseMatrix::zeros(n, n);
    let m = &mesh.submeshes[0];
    for (c, cell) in m.cells.iter().enumerate() {
        let p: Vec<Point> = cell.iter().map(|&v| m.vertices[v]).collect();
        let edges: Vec<usize> = m.cell_facets[c].iter().map(|e| e.0).collect();
        // rows: flux of (a1, a2, b) through each edge along its global normal
        let mut sys = DenseMatrix::zeros(3, 3);
        for (j, &f) in edges.iter().enumerate() {
            let nn = m.facet_normals[f];
            let len = m.facet_measures[f];
            let mid = m.facet_midpoint(f);
            sys[(j, 0)] = len * nn[0];
            sys[(j, 1)] = len * nn[1];
            sys[(j, 2)] = len * (mid[0] * nn[0] + mid[1] * nn[1]);
        }
        let lu = mdaux::la::DenseLu::new(&sys).unwrap();
        let coef: Vec<Vec<f64>> = (0..3)
            .map(|k| {
                let mut e = vec![0.0; 3];
                e[k] = 1.0;
                lu.solve(&e)
            })
            .collect();
        let area = m.cell_measures[c];
        let gauss = [[1.0 / 6.0, 1.0 / 6.0], [2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0]];
        for g in gauss {
            let x = [
                p[0][0] + g[0] * (p[1][0] - p[0][0]) + g[1] * (p[2][0] - p[0][0]),
                p[0][1] + g[0] * (p[1][1] - p[0][1]) + g[1] * (p[2][1] - p[0][1]),
            ];
            let phi: Vec<Point> = coef.iter().map(|a| [a[0] + a[2] * x[0], a[1] + a[2] * x[1]]).collect();
            for k in 0..3 {
                for l in 0..3 {
                    let dk = q.dof(0, edges[k]).unwrap();
                    let dl = q.dof(0, edges[l]).unwrap();
                    out[(dk, dl)] += area / 3.0 * (phi[k][0] * phi[l][0] + phi[k][1] * phi[l][1]);
                }
            }
        }
    }
    out
}

#[test]
fn mass_reduces_to_rt0_on_fracture_free_mesh() {
    let mesh = build_builtin("empty", Some(2)).unwrap();
    let (_, q, _) = spaces(&mesh);
    let a = assemble_mass(&mesh, &q, &unit_perm(&mesh)).unwrap();
    let oracle = rt0_mass_oracle(&mesh, &q);
    assert!(a.to_dense().max_abs_diff(&oracle) <= 1e-13);
    for r in 0..a.nrows() {
        let (_, v) = a.row(r);
        assert!(v.iter().sum::<f64>() > 0.0);
    }
}

#[test]
fn trace_terms_vanish_for_large_normal_permeability() {
    let mesh = build_builtin("single", Some(4)).unwrap();
    let (_, q, _) = spaces(&mesh);
    let a1 = assemble_mass(&mesh, &q, &unit_perm(&mesh)).unwrap();
    let big = PermeabilityField::uniform(&mesh, 1.0, 1.0, 1e12).unwrap();
    let ab = assemble_mass(&mesh, &q, &big).unwrap();
    // A(K_ν) = A_0 + K_ν⁻¹ T, so the trace part at 1e12 is (A(1) − A(1e12)) / (1e12 − 1)
    let trace = a1.add_scaled(-1.0, &ab).unwrap().scaled(1.0 / (1e12 - 1.0));
    assert!(trace.frobenius_norm() <= 1e-11 * ab.frobenius_norm());
}

#[test]
fn mass_energy_of_constant_fields_matches_hand_values() {
    let mesh = build_builtin("single", Some(4)).unwrap();
    let (_, q, _) = spaces(&mesh);
    let a = assemble_mass(&mesh, &q, &unit_perm(&mesh)).unwrap();
    // (1,0): tangential to the fracture, no normal trace; fracture flux 1 on length 1
    let x = interpolate_flux(&mesh, &q, |_| [1.0, 0.0], |_, _| 1.0);
    assert!((quad(&a, &x) - 2.0).abs() <= 1e-12);
    // (0,1): ∫|q|² = 1 plus ∫(ν·q)² = 1 on each of the two fracture sides
    let y = interpolate_flux(&mesh, &q, |_| [0.0, 1.0], |_, _| 0.0);
    assert!((quad(&a, &y) - 3.0).abs() <= 1e-12);
}

#[test]
fn divergence_of_constant_field_is_zero() {
    let mesh = build_builtin("empty", Some(4)).unwrap();
    let (_, q, p) = spaces(&mesh);
    let d = assemble_divergence(&mesh, &q, &p).unwrap().d;
    let x = interpolate_flux(&mesh, &q, |_| [1.0, 0.0], |_, _| 0.0);
    assert!(d.spmv(&x).unwrap().iter().all(|v| v.abs() <= 1e-13));
}

#[test]
fn fracture_rows_balance_rock_outflux() {
    let mesh = build_builtin("single", Some(4)).unwrap();
    let (_, q, p) = spaces(&mesh);
    let d = assemble_divergence(&mesh, &q, &p).unwrap().d;
    // flow towards the fracture from both sides: (0,1) below, (0,−1) above
    let mut x = vec![0.0; q.total_dofs()];
    for i in mesh.ids_of_dim(2) {
        let m = &mesh.submeshes[i];
        for f in 0..m.num_facets() {
            let v = if m.cell_centroid(m.facet_cells[f][0])[1] < 0.5 { 1.0 } else { -1.0 };
            x[q.dof(i, f).unwrap()] = m.facet_measures[f] * v * m.facet_normals[f][1];
        }
    }
    let dq = d.spmv(&x).unwrap();
    // brute force: per fracture cell, sum the outflux of every rock facet
    // geometrically covering it, with outward normals taken from the triangles
    let frac = mesh.ids_of_dim(1)[0];
    let fm = &mesh.submeshes[frac];
    for (c, cell) in fm.cells.iter().enumerate() {
        let a = fm.vertices[cell[0]];
        let b = fm.vertices[cell[1]];
        let mut outflux = 0.0;
        for i in mesh.ids_of_dim(2) {
            let m = &mesh.submeshes[i];
            for (t, tri) in m.cells.iter().enumerate() {
                for k in 0..3 {
                    let u = m.vertices[tri[(k + 1) % 3]];
                    let w = m.vertices[tri[(k + 2) % 3]];
                    let same = |p: Point, r: Point| (p[0] - r[0]).abs() + (p[1] - r[1]).abs() < 1e-12;
                    if (same(u, a) && same(w, b)) || (same(u, b) && same(w, a)) {
                        let n = m.outward_normal(t, k);
                        let v = if m.cell_centroid(t)[1] < 0.5 { [0.0, 1.0] } else { [0.0, -1.0] };
                        outflux += (n[0] * v[0] + n[1] * v[1]) * fm.cell_measures[c];
                    }
                }
            }
        }
        let row = p.dof(frac, c).unwrap();
        assert!((dq[row] + outflux / fm.cell_measures[c]).abs() <= 1e-13);
        assert!((dq[row] + 2.0).abs() <= 1e-13);
    }
}

#[test]
fn divergence_theorem_on_fracture_free_mesh() {
    let mesh = build_builtin("empty", Some(4)).unwrap();
    let (_, q, p) = spaces(&mesh);
    let parts = assemble_divergence(&mesh, &q, &p).unwrap();
    let m = &mesh.submeshes[0];
    for seed in 0..5u64 {
        let x: Vec<f64> = (0..q.total_dofs())
            .map(|k| ((k as u64 * 2654435761 + seed * 97) % 1000) as f64 / 500.0 - 1.0)
            .collect();
        let dq = parts.d.spmv(&x).unwrap();
        let total: f64 = dq.iter().zip(&parts.mp).map(|(a, b)| a * b).sum();
        let boundary: f64 = (0..m.num_facets()).filter(|&f| m.is_boundary_facet(f)).map(|f| x[f]).sum();
        assert!((total - boundary).abs() <= 1e-12);
    }
    // affine field: ∮ q·ν = div q · area
    let x = interpolate_flux(&mesh, &q, |p| [2.0 * p[0] + p[1], 3.0 * p[1]], |_, _| 0.0);
    let total: f64 = parts.d.spmv(&x).unwrap().iter().zip(&parts.mp).map(|(a, b)| a * b).sum();
    assert!((total - 5.0).abs() <= 1e-12);
}

#[test]
fn curl_of_constants_and_of_x() {
    for g in BUILTIN_GEOMETRIES {
        let mesh = build_builtin(g, None).unwrap();
        let (a0, q, _) = spaces(&mesh);
        let c = assemble_curl(&mesh, &a0, &q).unwrap();
        let ca = c.spmv(&vec![1.0; a0.total_dofs()]).unwrap();
        assert!(ca.iter().all(|v| v.abs() <= 1e-14), "{g}");
    }
    let mesh = build_builtin("empty", Some(4)).unwrap();
    let (a0, q, _) = spaces(&mesh);
    let c = assemble_curl(&mesh, &a0, &q).unwrap();
    let x: Vec<f64> = mesh.submeshes[0].vertices.iter().map(|p| p[0]).collect();
    let got = c.spmv(&x).unwrap();
    let want = interpolate_flux(&mesh, &q, |_| [0.0, 1.0], |_, _| 0.0);
    for (a, b) in got.iter().zip(&want) {
        assert!((a - b).abs() <= 1e-14);
    }
}

#[test]
fn composite_complex_on_cross() {
    let mesh = build_builtin("cross", None).unwrap();
    let (a0, q, p) = spaces(&mesh);
    let c = assemble_curl(&mesh, &a0, &q).unwrap();
    let d = assemble_divergence(&mesh, &q, &p).unwrap().d;
    assert!(d.matmul(&c).unwrap().max_abs() <= 1e-13);
}

#[test]
fn complex_report_on_all_geometries_and_levels() {
    for g in BUILTIN_GEOMETRIES {
        let mut mesh = build_builtin(g, None).unwrap();
        for _ in 0..3 {
            let r = complex_report(&mesh).unwrap();
            assert!(r.max_dd <= 1e-13, "{g}");
            assert!(r.commuting_residual <= 1e-12, "{g}");
            if let Some(h) = r.harmonic_dim() {
                assert_eq!(h, 0, "{g}");
            } else {
                assert!(r.notice.is_some());
            }
            mesh = mesh.refine();
        }
    }
}

#[test]
fn regular_laplacian_examples_without_fractures() {
    let mesh = build_builtin("empty", Some(4)).unwrap();
    let w = RegularWeights::unit(&mesh);
    let r0 = RegularSpace::new(&mesh, 0);
    let a0 = assemble_regular_laplacian(&mesh, &r0, &w).unwrap();
    assert!((quad(&a0, &vec![1.0; r0.total_dofs()]) - 1.0).abs() <= 1e-12);
    // a = x: ∫x² + ∫|∇x|² = 1/3 + 1
    let x: Vec<f64> = mesh.submeshes[0].vertices.iter().map(|p| p[0]).collect();
    assert!((quad(&a0, &x) - 4.0 / 3.0).abs() <= 1e-12);
    let r1 = RegularSpace::new(&mesh, 1);
    let a1 = assemble_regular_laplacian(&mesh, &r1, &w).unwrap();
    let v = nodal_regular(&mesh, &r1, |_| [1.0, 0.0], |_, _| 0.0);
    assert!((quad(&a1, &v) - 1.0).abs() <= 1e-12);
}

/// Energy of the trace terms alone: full operator minus the one with zero
/// trace weights.
fn trace_energy(mesh: &MdMesh, w: &RegularWeights, v: &[f64]) -> f64 {
    let r1 = RegularSpace::new(mesh, 1);
    let full = assemble_regular_laplacian(mesh, &r1, w).unwrap();
    let mut bare = w.clone();
    bare.trace_mass.iter_mut().for_each(|x| *x = 0.0);
    bare.trace_stiffness = 0.0;
    let base = assemble_regular_laplacian(mesh, &r1, &bare).unwrap();
    quad(&full, v) - quad(&base, v)
}

#[test]
fn regular_trace_terms_on_single_fracture() {
    let mesh = build_builtin("single", Some(4)).unwrap();
    let r1 = RegularSpace::new(&mesh, 1);
    let frac = mesh.ids_of_dim(1)[0];
    let len = mesh.submeshes[frac].total_measure();
    for comp in [TraceComponent::Normal, TraceComponent::Tangential] {
        let mut w = RegularWeights::unit(&mesh);
        w.trace_component = comp;
        // a field vanishing on the fracture line y = 1/2
        let vanish = nodal_regular(&mesh, &r1, |p| [p[1] - 0.5, 2.0 * (p[1] - 0.5)], |_, _| 0.0);
        assert!(trace_energy(&mesh, &w, &vanish).abs() <= 1e-12);
        // (1,0): per side, length × |component|²
        let e = nodal_regular(&mesh, &r1, |_| [1.0, 0.0], |_, _| 0.0);
        let tangential: f64 = 1.0;
        let expected = match comp {
            TraceComponent::Tangential => 2.0 * len * tangential.powi(2),
            TraceComponent::Normal => 0.0,
        };
        assert!((trace_energy(&mesh, &w, &e) - expected).abs() <= 1e-12, "{comp:?}");
    }
}

#[test]
fn interpolation_examples() {
    let mesh = build_builtin("single", Some(4)).unwrap();
    let r1 = RegularSpace::new(&mesh, 1);
    let q = MdSpace::new(&mesh, 1);
    let pi = canonical_interpolation(&mesh, &r1, &q).unwrap();
    let c = nodal_regular(&mesh, &r1, |_| [0.3, -0.7], |_, _| 0.25);
    let want = interpolate_flux(&mesh, &q, |_| [0.3, -0.7], |_, _| 0.25);
    for (a, b) in pi.spmv(&c).unwrap().iter().zip(&want) {
        assert!((a - b).abs() <= 1e-14);
    }
    // field (x, y) against exact facet integrals of x n_x + y n_y
    let xy = nodal_regular(&mesh, &r1, |p| p, |_, _| 0.0);
    let got = pi.spmv(&xy).unwrap();
    for i in mesh.ids_of_dim(2) {
        let m = &mesh.submeshes[i];
        for (f, e) in m.facets.iter().enumerate() {
            let (a, b) = (m.vertices[e[0]], m.vertices[e[1]]);
            let n = m.facet_normals[f];
            let exact = m.facet_measures[f] * (n[0] * (a[0] + b[0]) + n[1] * (a[1] + b[1])) / 2.0;
            assert!((got[q.dof(i, f).unwrap()] - exact).abs() <= 1e-14);
        }
    }
    let a0 = MdSpace::new(&mesh, 0);
    let id = canonical_interpolation(&mesh, &RegularSpace::new(&mesh, 0), &a0).unwrap();
    assert_eq!(id, SparseMatrix::identity(a0.total_dofs()));
}

#[test]
fn assembled_operators_are_spd_on_tiny_meshes() {
    for g in ["empty", "single", "cross"] {
        let mesh = build_builtin(g, None).unwrap();
        let (_, q, _) = spaces(&mesh);
        let perm = PermeabilityField::uniform(&mesh, 1.0, 10.0, 0.1).unwrap();
        let a = assemble_mass(&mesh, &q, &perm).unwrap();
        assert!(a.asymmetry() <= 1e-13);
        let eye = DenseMatrix::identity(a.nrows());
        assert!(dense_eigs_sym(&a.to_dense(), &eye).unwrap()[0] > 0.0, "{g}");
        for k in [0, 1] {
            let r = RegularSpace::new(&mesh, k);
            let l = assemble_regular_laplacian(&mesh, &r, &RegularWeights::policy(&mesh, &perm, 3.0)).unwrap();
            assert!(l.asymmetry() <= 1e-13);
            let eye = DenseMatrix::identity(l.nrows());
            assert!(dense_eigs_sym(&l.to_dense(), &eye).unwrap()[0] > 0.0, "{g} k={k}");
        }
    }
}

/// With flux-integral DOFs the RT0 basis scales like 1/h, so the Rayleigh
/// quotients of `A_q` stay in a fixed band under refinement.
#[test]
fn mass_rayleigh_quotients_are_bounded_under_refinement() {
    let mut mesh = build_builtin("empty", Some(2)).unwrap();
    let (mut prev_lo, mut prev_hi) = (f64::INFINITY, 0.0);
    for _ in 0..3 {
        let (_, q, _) = spaces(&mesh);
        let a = assemble_mass(&mesh, &q, &unit_perm(&mesh)).unwrap();
        let ev = dense_eigs_sym(&a.to_dense(), &DenseMatrix::identity(a.nrows())).unwrap();
        let (lo, hi) = (ev[0], *ev.last().unwrap());
        assert!(lo <= prev_lo + 1e-12 && hi >= prev_hi - 1e-12);
        assert!(lo >= 1.0 / 6.0 - 1e-12 && hi <= 1.0, "{lo} {hi}");
        assert!(lo >= 0.1 * mesh.h.powi(2));
        (prev_lo, prev_hi) = (lo, hi);
        mesh = mesh.refine();
    }
}

#[test]
fn dof_maps_serialize() {
    let mesh = build_builtin("single", None).unwrap();
    let q = MdSpace::new(&mesh, 1);
    let json = serde_json::to_value(q.dof_records("flux")).unwrap();
    let first = &json[0];
    for key in ["space", "k", "subdomain", "entity", "global_index"] {
        assert!(first.get(key).is_some(), "{key}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn random_networks_form_a_complex(seed in 0u64..1000, count in 1usize..6) {
        let cfg = RandomNetworkConfig::new(seed, count, 8);
        let mesh = build_random_network(&cfg).unwrap();
        let r = complex_report(&mesh).unwrap();
        prop_assert!(r.max_dd <= 1e-13);
        prop_assert!(r.commuting_residual <= 1e-12);
        prop_assert_eq!(r.harmonic_dim(), Some(0));
    }
}
