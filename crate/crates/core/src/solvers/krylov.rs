use std::time::Instant;

use super::{KrylovConfig, SolveReport, SolverError};
use crate::la::{axpy, check_dim, dot, norm2, LinearOperator};

/// Right-preconditioned GMRES with a fixed preconditioner.
///
/// Starts from `x = 0`. The Krylov basis is built with modified Gram-Schmidt
/// and a second pass whenever orthogonality degrades beyond 1e-8.
pub fn gmres(
    a: &dyn LinearOperator,
    b: &[f64],
    m: Option<&dyn LinearOperator>,
    cfg: &KrylovConfig,
) -> Result<(Vec<f64>, SolveReport), SolverError> {
    arnoldi_solve(a, b, m, cfg, false)
}

/// Flexible GMRES: stores the preconditioned vectors, so `m` may differ
/// between iterations (e.g. an inner Krylov solve).
pub fn fgmres(
    a: &dyn LinearOperator,
    b: &[f64],
    m: &dyn LinearOperator,
    cfg: &KrylovConfig,
) -> Result<(Vec<f64>, SolveReport), SolverError> {
    arnoldi_solve(a, b, Some(m), cfg, true)
}

/// Left-preconditioned GMRES on `M A x = M b`; the history records the
/// preconditioned residual `‖M(b − A x)‖`.
pub fn gmres_left(
    a: &dyn LinearOperator,
    b: &[f64],
    m: &dyn LinearOperator,
    cfg: &KrylovConfig,
) -> Result<(Vec<f64>, SolveReport), SolverError> {
    struct Composed<'a> {
        m: &'a dyn LinearOperator,
        a: &'a dyn LinearOperator,
    }
    impl LinearOperator for Composed<'_> {
        fn nrows(&self) -> usize {
            self.m.nrows()
        }
        fn ncols(&self) -> usize {
            self.a.ncols()
        }
        fn apply(&self, x: &[f64], y: &mut [f64]) {
            let t = self.a.apply_vec(x);
            self.m.apply(&t, y);
        }
    }
    check_dim("gmres_left", a.nrows(), b.len())?;
    let mb = m.apply_vec(b);
    arnoldi_solve(&Composed { m, a }, &mb, None, cfg, false)
}

fn arnoldi_solve(
    a: &dyn LinearOperator,
    b: &[f64],
    m: Option<&dyn LinearOperator>,
    cfg: &KrylovConfig,
    flexible: bool,
) -> Result<(Vec<f64>, SolveReport), SolverError> {
    cfg.validate()?;
    let n = b.len();
    check_dim("gmres rows", a.nrows(), n)?;
    check_dim("gmres cols", a.ncols(), n)?;
    if let Some(m) = m {
        check_dim("gmres preconditioner", m.nrows(), n)?;
    }
    let start = Instant::now();
    let mut x = vec![0.0; n];
    let bnorm = norm2(b);
    let mut report = SolveReport {
        residual_history: vec![bnorm],
        ..Default::default()
    };
    if bnorm == 0.0 {
        report.converged = true;
        return Ok((x, report));
    }
    let target = cfg.tol_rel * bnorm;
    let cycle_len = if cfg.restart == 0 {
        cfg.max_iter
    } else {
        cfg.restart.min(cfg.max_iter)
    };
    let mut r = b.to_vec();
    let mut beta = bnorm;

    'outer: loop {
        let mut v: Vec<Vec<f64>> = Vec::with_capacity(cycle_len + 1);
        let mut z: Vec<Vec<f64>> = Vec::new();
        let mut h: Vec<Vec<f64>> = Vec::with_capacity(cycle_len);
        let mut cs: Vec<f64> = Vec::with_capacity(cycle_len);
        let mut sn: Vec<f64> = Vec::with_capacity(cycle_len);
        let mut g = vec![beta];
        v.push(r.iter().map(|ri| ri / beta).collect());
        let mut w = vec![0.0; n];
        let mut zj = vec![0.0; n];
        let mut done = false;

        for j in 0..cycle_len {
            match m {
                Some(m) => m.apply(&v[j], &mut zj),
                None => zj.copy_from_slice(&v[j]),
            }
            a.apply(&zj, &mut w);
            if flexible {
                z.push(zj.clone());
            }
            let wnorm0 = norm2(&w);
            let mut col = vec![0.0; j + 2];
            for (i, vi) in v.iter().enumerate() {
                let hij = dot(&w, vi);
                col[i] = hij;
                axpy(-hij, vi, &mut w);
            }
            let mut wnorm = norm2(&w);
            if wnorm > 0.0 {
                let loss = v
                    .iter()
                    .map(|vi| dot(&w, vi).abs())
                    .fold(0.0f64, f64::max)
                    / wnorm;
                if loss > 1e-8 || wnorm < 1e-3 * wnorm0 {
                    for (i, vi) in v.iter().enumerate() {
                        let c = dot(&w, vi);
                        col[i] += c;
                        axpy(-c, vi, &mut w);
                    }
                    wnorm = norm2(&w);
                }
            }
            col[j + 1] = wnorm;
            for i in 0..j {
                let t = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            let (c, s) = givens(col[j], col[j + 1]);
            col[j] = c * col[j] + s * col[j + 1];
            col[j + 1] = 0.0;
            cs.push(c);
            sn.push(s);
            g.push(-s * g[j]);
            g[j] *= c;
            h.push(col);
            report.iterations += 1;
            let res = g[j + 1].abs();
            report.residual_history.push(res);
            let breakdown = wnorm < 1e-14 * bnorm;
            if res <= target || breakdown || report.iterations >= cfg.max_iter {
                report.breakdown = breakdown && res > target;
                done = true;
                break;
            }
            v.push(w.iter().map(|wi| wi / wnorm).collect());
        }

        let k = h.len();
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for l in i + 1..k {
                s -= h[l][i] * y[l];
            }
            y[i] = if h[i][i] != 0.0 { s / h[i][i] } else { 0.0 };
        }
        if flexible {
            for (yi, zi) in y.iter().zip(&z) {
                axpy(*yi, zi, &mut x);
            }
        } else {
            let mut u = vec![0.0; n];
            for (yi, vi) in y.iter().zip(&v) {
                axpy(*yi, vi, &mut u);
            }
            match m {
                Some(m) => {
                    m.apply(&u, &mut zj);
                    axpy(1.0, &zj, &mut x);
                }
                None => axpy(1.0, &u, &mut x),
            }
        }
        let last = report.final_residual();
        if done && (last <= target || report.breakdown || report.iterations >= cfg.max_iter) {
            report.converged = last <= target || report.breakdown;
            break 'outer;
        }
        // restart from the true residual
        a.apply(&x, &mut r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        beta = norm2(&r);
        if beta <= target {
            *report.residual_history.last_mut().unwrap() = beta;
            report.converged = true;
            break 'outer;
        }
    }
    report.wall_time = start.elapsed().as_secs_f64();
    Ok((x, report))
}

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else {
        let r = a.hypot(b);
        (a / r, b / r)
    }
}
