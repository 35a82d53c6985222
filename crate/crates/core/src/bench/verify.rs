use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{BenchError, GeometrySpec, RunConfig};
use crate::darcy::{inf_sup_constant, BoundaryConditions, DarcyProblem, SaddleSystem, SideBcs};
use crate::fem::{complex_report_with, PermeabilityField};
use crate::la::{dot, norm2, LinearOperator};
use crate::mesh::{build_builtin, MdMesh, BUILTIN_GEOMETRIES};
use crate::precond::{precond_quality, AuxSpacePreconditioner};

/// Tolerances of the verification suite.
pub const DD_TOL: f64 = 1e-13;
pub const COMMUTING_TOL: f64 = 1e-12;
pub const SYMMETRY_TOL: f64 = 1e-12;
pub const KAPPA_LIMIT: f64 = 500.0;
/// Smallest admissible triangle shape ratio.
pub const SHAPE_FLOOR: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub geometry: String,
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
    /// Hard checks decide the exit status; soft ones are informational.
    pub hard: bool,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    /// All hard checks passed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || !c.hard)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::from("| geometry | check | value | limit | status |\n|---|---|---|---|---|\n");
        for c in &self.checks {
            let status = match (c.passed, c.hard) {
                (true, _) => "pass",
                (false, true) => "FAIL",
                (false, false) => "warn",
            };
            let _ = write!(s, "| {} | {} | {:.3e} | {:.1e} | {status}", c.geometry, c.name, c.value, c.limit);
            if let Some(d) = &c.detail {
                let _ = write!(s, " ({d})");
            }
            s.push_str(" |\n");
        }
        s
    }
}

/// Options of the verification suite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyOptions {
    /// Scales the inter-dimensional jump terms; anything but 1 is a mutation
    /// that the closedness check must catch.
    pub jump_sign: f64,
    /// Inf-sup estimates use dense factorizations; skip them above this size.
    pub inf_sup_max_dofs: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            jump_sign: 1.0,
            inf_sup_max_dofs: 1500,
            seed: 1,
        }
    }
}

struct Checks<'a> {
    geometry: &'a str,
    out: Vec<Check>,
}

impl Checks<'_> {
    fn le(&mut self, name: &str, value: f64, limit: f64, hard: bool) {
        self.out.push(Check {
            geometry: self.geometry.into(),
            name: name.into(),
            value,
            limit,
            passed: value <= limit,
            hard,
            detail: None,
        });
    }

    fn flag(&mut self, name: &str, passed: bool, value: f64, detail: Option<String>) {
        self.out.push(Check {
            geometry: self.geometry.into(),
            name: name.into(),
            value,
            limit: 0.0,
            passed,
            hard: true,
            detail,
        });
    }

    fn error(&mut self, name: &str, e: impl std::fmt::Display, hard: bool) {
        self.out.push(Check {
            geometry: self.geometry.into(),
            name: name.into(),
            value: f64::NAN,
            limit: 0.0,
            passed: false,
            hard,
            detail: Some(e.to_string()),
        });
    }
}

/// All structural checks on one mesh.
pub fn verify_mesh(label: &str, mesh: &MdMesh, opts: &VerifyOptions) -> Vec<Check> {
    let mut c = Checks {
        geometry: label,
        out: Vec::new(),
    };
    let matching = mesh.check_matching();
    c.flag(
        "check_matching",
        matching.is_ok(),
        matching.violations.len() as f64,
        (!matching.is_ok()).then(|| matching.violations.join("; ")),
    );
    let valid = mesh.validate(SHAPE_FLOOR);
    c.flag(
        "mesh validation",
        valid.is_ok(),
        valid.violations.len() as f64,
        (!valid.is_ok()).then(|| valid.violations.join("; ")),
    );

    match complex_report_with(mesh, opts.jump_sign) {
        Ok(r) => {
            c.le("max entry of D1 D0", r.max_dd, DD_TOL, true);
            c.le("commuting residual", r.commuting_residual, COMMUTING_TOL, true);
            if let (Some(k), Some(rc)) = (r.kernel_dim, r.curl_rank) {
                let h = k as f64 - rc as f64;
                let ok = r.harmonic_dim() == Some(r.harmonic_dim_predicted);
                let detail = (!ok).then(|| format!("predicted {}", r.harmonic_dim_predicted));
                c.flag("harmonic dimension", ok, h, detail);
            }
        }
        Err(e) => c.error("complex report", e, true),
    }

    let perm = match PermeabilityField::uniform(mesh, 1.0, 1.0, 1.0) {
        Ok(p) => p,
        Err(e) => {
            c.error("permeability", e, true);
            return c.out;
        }
    };
    match AuxSpacePreconditioner::build(mesh, &perm, 1.0, Default::default()) {
        Ok((ops, aug, p)) => {
            c.le("A_q asymmetry", ops.a_q.asymmetry(), SYMMETRY_TOL, true);
            c.le("augmented block asymmetry", aug.matrix.asymmetry(), SYMMETRY_TOL, true);
            let n = ops.num_flux();
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let (mut asym, mut min_rq) = (0.0f64, f64::INFINITY);
            for _ in 0..10 {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let (px, py) = (p.apply_vec(&x), p.apply_vec(&y));
                asym = asym.max((dot(&px, &y) - dot(&x, &py)).abs() / (norm2(&x) * norm2(&y)));
                min_rq = min_rq.min(dot(&px, &x) / dot(&x, &x));
            }
            c.le("preconditioner asymmetry", asym, 1e-10, true);
            c.flag("preconditioner positivity", min_rq > 0.0, min_rq, None);
            match precond_quality(&aug, &p, 60) {
                Ok(q) => c.le("kappa (alpha = 1)", q.kappa, KAPPA_LIMIT, false),
                Err(e) => c.error("kappa (alpha = 1)", e, false),
            }
        }
        Err(e) => c.error("auxiliary preconditioner", e, true),
    }

    let problem = DarcyProblem::new(
        Arc::new(mesh.clone()),
        perm,
        BoundaryConditions::Sides(SideBcs::constant_pressure(0.0)),
    );
    match SaddleSystem::assemble(&problem) {
        Ok(sys) if sys.num_dofs() <= opts.inf_sup_max_dofs => match inf_sup_constant(&sys, 1.0) {
            Ok(g) => c.out.push(Check {
                geometry: label.into(),
                name: "inf-sup constant".into(),
                value: g,
                limit: 0.0,
                passed: g > 0.0,
                hard: false,
                detail: Some("must be positive".into()),
            }),
            Err(e) => c.error("inf-sup constant", e, false),
        },
        Ok(_) => {}
        Err(e) => c.error("saddle system", e, true),
    }
    c.out
}

/// Meshes checked by `verify`: the configured file, or every builtin geometry
/// on its two coarsest lattices.
pub fn verify_meshes(cfg: &RunConfig) -> Result<Vec<(String, MdMesh)>, BenchError> {
    if let GeometrySpec::File { path } = &cfg.geometry {
        return Ok(vec![(path.display().to_string(), cfg.geometry.mesh(cfg.seed, 0)?)]);
    }
    let mut out = Vec::new();
    for name in BUILTIN_GEOMETRIES {
        let m0 = if name == "regular" { 8 } else { 2 };
        for m in [m0, 2 * m0] {
            out.push((format!("{name} m={m}"), build_builtin(name, Some(m))?));
        }
    }
    Ok(out)
}

pub fn verify(cfg: &RunConfig, opts: &VerifyOptions) -> Result<VerifyReport, BenchError> {
    let mut report = VerifyReport::default();
    for (label, mesh) in verify_meshes(cfg)? {
        report.checks.extend(verify_mesh(&label, &mesh, opts));
    }
    Ok(report)
}
