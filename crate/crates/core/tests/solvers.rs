use std::sync::Arc;

use mdaux::la::{dense_solve, norm2, DenseMatrix, LinearOperator, SparseMatrix, TripletBuilder};
use mdaux::solvers::{
    fgmres, gmres, lanczos_extreme_eigs, AmgConfig, AmgHierarchy, Cycle, JacobiSmoother, KrylovConfig,
    SgsSmoother,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn poisson_2d(n: usize) -> SparseMatrix {
    let idx = |i: usize, j: usize| i * n + j;
    let mut t = TripletBuilder::new(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            t.add(idx(i, j), idx(i, j), 4.0);
            if i > 0 {
                t.add(idx(i, j), idx(i - 1, j), -1.0);
            }
            if i + 1 < n {
                t.add(idx(i, j), idx(i + 1, j), -1.0);
            }
            if j > 0 {
                t.add(idx(i, j), idx(i, j - 1), -1.0);
            }
            if j + 1 < n {
                t.add(idx(i, j), idx(i, j + 1), -1.0);
            }
        }
    }
    t.build()
}

fn random_nonsymmetric(seed: u64, n: usize) -> SparseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = TripletBuilder::new(n, n);
    for i in 0..n {
        t.add(i, i, 4.0 + rng.gen_range(0.0..1.0));
        for _ in 0..4 {
            t.add(i, rng.gen_range(0..n), rng.gen_range(-1.0..1.0));
        }
    }
    t.build()
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn rel_err(x: &[f64], y: &[f64]) -> f64 {
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    norm2(&d) / norm2(y)
}

/// Spectral radius of `I − S A` by power iteration.
fn error_propagation_radius(a: &SparseMatrix, s: &dyn LinearOperator) -> f64 {
    let n = a.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut x = random_vec(&mut rng, n);
    let mut rho = 0.0;
    for _ in 0..300 {
        let ax = a.spmv(&x).unwrap();
        let sax = s.apply_vec(&ax);
        let y: Vec<f64> = x.iter().zip(&sax).map(|(u, v)| u - v).collect();
        rho = norm2(&y) / norm2(&x);
        let ny = norm2(&y);
        x = y.into_iter().map(|v| v / ny).collect();
    }
    rho
}

#[test]
fn gmres_matches_dense_solve() {
    let a = random_nonsymmetric(11, 30);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let b = random_vec(&mut rng, 30);
    let (x, rep) = gmres(&a, &b, None, &KrylovConfig::new(1e-10, 100)).unwrap();
    assert!(rep.converged && rep.is_monotone());
    let xd = dense_solve(&a.to_dense(), &b).unwrap();
    assert!(rel_err(&x, &xd) <= 1e-8);
}

#[test]
fn gmres_finite_termination() {
    let mut t = TripletBuilder::new(2, 2);
    t.add(0, 0, 1.0);
    t.add(1, 1, 1e4);
    let a = t.build();
    let (_, rep) = gmres(&a, &[1.0, 1.0], None, &KrylovConfig::new(1e-12, 10)).unwrap();
    assert!(rep.converged && rep.iterations <= 2);
}

#[test]
fn fgmres_with_fixed_preconditioner_reproduces_gmres() {
    for seed in 0..10 {
        let a = random_nonsymmetric(100 + seed, 60);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = random_vec(&mut rng, 60);
        let m = JacobiSmoother::new(&a).unwrap();
        let cfg = KrylovConfig::new(1e-10, 200);
        let (x1, r1) = gmres(&a, &b, Some(&m), &cfg).unwrap();
        let (x2, r2) = fgmres(&a, &b, &m, &cfg).unwrap();
        assert_eq!(r1.iterations, r2.iterations, "seed {seed}");
        assert!(rel_err(&x2, &x1) <= 1e-8);
        assert!(r1.is_monotone() && r2.is_monotone());
    }
}

#[test]
fn fgmres_with_exact_inverse_takes_one_step() {
    let a = random_nonsymmetric(5, 40);
    let lu = mdaux::la::DenseLu::new(&a.to_dense()).unwrap();
    let b = vec![1.0; 40];
    let (x, rep) = fgmres(&a, &b, &lu, &KrylovConfig::new(1e-10, 10)).unwrap();
    assert_eq!(rep.iterations, 1);
    assert!(rel_err(&x, &lu.solve(&b)) <= 1e-12);
}

#[test]
fn smoothers_contract_on_poisson() {
    let a = poisson_2d(20);
    let sgs = SgsSmoother::new(Arc::new(a.clone())).unwrap();
    let rho = error_propagation_radius(&a, &sgs);
    assert!(rho < 1.0, "sgs {rho}");
    // undamped Jacobi on the five-point stencil has radius cos(π h) < 1
    let jac = JacobiSmoother::new(&a).unwrap();
    let rho = error_propagation_radius(&a, &jac);
    let want = (std::f64::consts::PI / 21.0).cos();
    assert!(rho < 1.0 && (rho - want).abs() < 1e-3, "jacobi {rho} vs {want}");
}

#[test]
fn sgs_is_symmetric() {
    let a = poisson_2d(10);
    let s = SgsSmoother::new(Arc::new(a)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10 {
        let x = random_vec(&mut rng, 100);
        let y = random_vec(&mut rng, 100);
        let l = mdaux::la::dot(&s.apply_vec(&x), &y);
        let r = mdaux::la::dot(&x, &s.apply_vec(&y));
        assert!((l - r).abs() <= 1e-12 * norm2(&x) * norm2(&y));
    }
}

#[test]
fn amg_w_cycle_halves_the_residual() {
    let a = poisson_2d(32);
    let h = AmgHierarchy::new(&a, AmgConfig::default()).unwrap();
    assert!(h.galerkin_defects().iter().all(|d| *d <= 1e-12));
    assert!(*h.level_sizes().last().unwrap() <= 64);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let b = random_vec(&mut rng, a.nrows());
    let mut x = vec![0.0; a.nrows()];
    let mut r = b.clone();
    let mut factors = Vec::new();
    for _ in 0..10 {
        let r0 = norm2(&r);
        let dx = h.apply_vec(&r);
        mdaux::la::axpy(1.0, &dx, &mut x);
        let ax = a.spmv(&x).unwrap();
        r = b.iter().zip(&ax).map(|(u, v)| u - v).collect();
        factors.push(r0 / norm2(&r));
    }
    assert!(factors.iter().all(|f| *f >= 2.0), "per-application factors {factors:?}");
}

#[test]
fn amg_cycles_are_symmetric_and_v_cycle_also_converges() {
    let a = poisson_2d(16);
    for cycle in [Cycle::V, Cycle::W] {
        let h = AmgHierarchy::new(
            &a,
            AmgConfig {
                cycle,
                ..AmgConfig::default()
            },
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random_vec(&mut rng, 256);
        let y = random_vec(&mut rng, 256);
        let l = mdaux::la::dot(&h.apply_vec(&x), &y);
        let r = mdaux::la::dot(&x, &h.apply_vec(&y));
        assert!((l - r).abs() <= 1e-10 * norm2(&x) * norm2(&y));
        let b = vec![1.0; 256];
        let (_, rep) = gmres(&a, &b, Some(&h), &KrylovConfig::new(1e-8, 100)).unwrap();
        assert!(rep.converged && rep.iterations <= 30, "{cycle:?} {}", rep.iterations);
    }
}

#[test]
fn lanczos_on_known_spectra() {
    let d: Vec<f64> = (1..=100).map(|v| v as f64).collect();
    let a = SparseMatrix::diagonal_from(&d);
    let i = SparseMatrix::identity(100);
    let r = lanczos_extreme_eigs(&a, &i, 40).unwrap();
    assert!((r.lambda_max - 100.0).abs() <= 1.0);
    let r = lanczos_extreme_eigs(&i, &i, 20).unwrap();
    assert!((r.lambda_min - 1.0).abs() <= 1e-12 && (r.lambda_max - 1.0).abs() <= 1e-12);
}

#[test]
fn spgemm_matches_dense() {
    let a = random_nonsymmetric(21, 40);
    let b = random_nonsymmetric(22, 40);
    let c = a.matmul(&b).unwrap().to_dense();
    let cd = a.to_dense().matmul(&b.to_dense()).unwrap();
    let scale = cd.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(c.max_abs_diff(&cd) <= 1e-13 * scale);
    let _ = DenseMatrix::identity(1);
}
