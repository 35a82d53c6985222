//! `mdaux` command-line driver.
//!
//! Exit codes: 0 success, 1 input or I/O error, 2 invariant failure,
//! 3 non-convergence.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use mdaux::bench::{self, GeometrySpec, RunConfig, SweepResult, VerifyOptions};
use mdaux::darcy::{mass_balance_report, solve, write_vtk, SaddleSystem};
use mdaux::la::mtx::write_mtx_file;

const EXIT_ERROR: u8 = 1;
const EXIT_INVARIANT: u8 = 2;
const EXIT_NONCONVERGED: u8 = 3;

#[derive(Parser)]
#[command(name = "mdaux", version, about = "Mixed-dimensional Darcy solvers and benchmark sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration; defaults apply to omitted keys.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override a configuration entry, e.g. `--set permeability.k_f=1e-4`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Use this mesh JSON file as the geometry.
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<RunConfig, String> {
        let base = match &self.config {
            Some(p) => RunConfig::from_file(p).map_err(|e| e.to_string())?,
            None => RunConfig::default(),
        };
        let mut cfg = base.with_overrides(&self.sets).map_err(|e| e.to_string())?;
        if let Some(m) = &self.mesh {
            cfg.geometry = GeometrySpec::File { path: m.clone() };
        }
        if let Some(o) = &self.out {
            cfg.output.dir = Some(o.clone());
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build the configured geometry and write it as mesh JSON.
    MeshGen {
        #[command(flatten)]
        common: Common,
        /// Refinement level relative to the base mesh.
        #[arg(long, default_value_t = 0)]
        level: usize,
        /// Output file; stdout if omitted.
        #[arg(long, short = 'f')]
        file: Option<PathBuf>,
    },
    /// Structural checks of the discretization and the preconditioner.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Mutation hook: flip the sign of the jump terms.
        #[arg(long, hide = true)]
        flip_jump_sign: bool,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Solve one problem and report iterations and mass balance.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        level: usize,
        /// Also write legacy VTK files into the output directory.
        #[arg(long)]
        vtk: bool,
    },
    /// Refinement sweep over `levels`.
    SweepH {
        #[command(flatten)]
        common: Common,
    },
    /// α sweep over `alphas`.
    SweepAlpha {
        #[command(flatten)]
        common: Common,
    },
    /// Heterogeneity grid over `k_values` and `k_alphas`.
    SweepK {
        #[command(flatten)]
        common: Common,
    },
    /// Random networks over `fracture_counts`.
    SweepFractures {
        #[command(flatten)]
        common: Common,
    },
    /// Write the saddle-point matrix and its blocks in Matrix Market format.
    ExportMtx {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        level: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn out_dir(cfg: &RunConfig) -> Result<&Path, String> {
    cfg.output
        .dir
        .as_deref()
        .ok_or_else(|| "an output directory is required (--out or output.dir)".to_string())
}

fn prefix<'a>(cfg: &'a RunConfig, default: &'a str) -> &'a str {
    cfg.output.prefix.as_deref().unwrap_or(default)
}

fn run(cmd: Command) -> Result<u8, String> {
    let err = |e: &dyn std::fmt::Display| e.to_string();
    match cmd {
        Command::MeshGen { common, level, file } => {
            let cfg = common.load()?;
            let mesh = cfg.geometry.mesh(cfg.seed, level).map_err(|e| err(&e))?;
            let json = mesh.to_json().map_err(|e| err(&e))?;
            match file {
                Some(p) => {
                    std::fs::write(&p, json).map_err(|e| format!("{}: {e}", p.display()))?;
                    let [n0, n1, n2] = mesh.cell_counts();
                    eprintln!("wrote {} ({n2} triangles, {n1} segments, {n0} points)", p.display());
                }
                None => println!("{json}"),
            }
            Ok(0)
        }
        Command::Verify {
            common,
            flip_jump_sign,
            json,
        } => {
            let cfg = common.load()?;
            let opts = VerifyOptions {
                jump_sign: if flip_jump_sign { -1.0 } else { 1.0 },
                seed: cfg.seed,
                ..VerifyOptions::default()
            };
            let report = bench::verify(&cfg, &opts).map_err(|e| err(&e))?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report).map_err(|e| err(&e))?);
            } else {
                print!("{}", report.to_markdown());
            }
            if let Some(dir) = &cfg.output.dir {
                std::fs::create_dir_all(dir).map_err(|e| err(&e))?;
                let p = dir.join(format!("{}.json", prefix(&cfg, "verify")));
                let text = serde_json::to_string_pretty(&report).map_err(|e| err(&e))?;
                std::fs::write(&p, text).map_err(|e| format!("{}: {e}", p.display()))?;
            }
            Ok(if report.passed() { 0 } else { EXIT_INVARIANT })
        }
        Command::Solve { common, level, vtk } => {
            let cfg = common.load()?;
            let mesh = Arc::new(cfg.geometry.mesh(cfg.seed, level).map_err(|e| err(&e))?);
            let problem = cfg.problem(mesh).map_err(|e| err(&e))?;
            let system = SaddleSystem::assemble(&problem).map_err(|e| err(&e))?;
            let sol = solve(&system, &cfg.solve_options()).map_err(|e| err(&e))?;
            let balance = mass_balance_report(&sol, &system);
            let i = &sol.info;
            println!(
                "N_dof = {}, alpha = {}, outer = {}, inner avg = {:.2}, converged = {}, relative residual = {:.3e}",
                i.num_dofs, i.alpha, i.outer_iterations, i.inner_average, i.converged, i.true_relative_residual
            );
            println!("mass balance: max |Bq - f| = {:.3e}", balance.global);
            println!("time: setup {:.3} s, solve {:.3} s (wall)", i.setup_time, i.solve_time);
            if let Some(dir) = &cfg.output.dir {
                std::fs::create_dir_all(dir).map_err(|e| err(&e))?;
                let pre = prefix(&cfg, "solve");
                let report = serde_json::json!({
                    "config_hash": cfg.hash(),
                    "config": cfg,
                    "info": sol.info,
                    "mass_balance": balance,
                });
                let p = dir.join(format!("{pre}.json"));
                std::fs::write(&p, serde_json::to_string_pretty(&report).map_err(|e| err(&e))?)
                    .map_err(|e| format!("{}: {e}", p.display()))?;
                let p = dir.join(format!("{pre}_solution.json"));
                std::fs::write(&p, sol.to_json()).map_err(|e| format!("{}: {e}", p.display()))?;
                if vtk {
                    write_vtk(&system, &sol, dir, pre).map_err(|e| err(&e))?;
                }
            } else if vtk {
                return Err("--vtk needs an output directory".into());
            }
            Ok(if sol.info.converged { 0 } else { EXIT_NONCONVERGED })
        }
        Command::SweepH { common } => sweep(common, "sweep_h", bench::sweep_h),
        Command::SweepAlpha { common } => sweep(common, "sweep_alpha", bench::sweep_alpha),
        Command::SweepK { common } => sweep(common, "sweep_k", bench::sweep_k),
        Command::SweepFractures { common } => sweep(common, "sweep_fractures", bench::sweep_fractures),
        Command::ExportMtx { common, level } => {
            let cfg = common.load()?;
            let dir = out_dir(&cfg)?;
            std::fs::create_dir_all(dir).map_err(|e| err(&e))?;
            let mesh = Arc::new(cfg.geometry.mesh(cfg.seed, level).map_err(|e| err(&e))?);
            let problem = cfg.problem(mesh).map_err(|e| err(&e))?;
            let system = SaddleSystem::assemble(&problem).map_err(|e| err(&e))?;
            let pre = prefix(&cfg, "system");
            let mats = [
                ("saddle", system.matrix()),
                ("a_q", (*system.a_q).clone()),
                ("b", (*system.b).clone()),
            ];
            for (name, m) in &mats {
                let p = dir.join(format!("{pre}_{name}.mtx"));
                write_mtx_file(m, &p).map_err(|e| err(&e))?;
                println!("{} ({} x {}, {} nonzeros)", p.display(), m.nrows(), m.ncols(), m.nnz());
            }
            Ok(0)
        }
    }
}

fn sweep(
    common: Common,
    default_prefix: &str,
    f: fn(&RunConfig) -> Result<SweepResult, bench::BenchError>,
) -> Result<u8, String> {
    let cfg = common.load()?;
    let result = f(&cfg).map_err(|e| e.to_string())?;
    print!("{}", result.to_markdown());
    if let Some(dir) = &cfg.output.dir {
        for p in result.write(&cfg, dir, prefix(&cfg, default_prefix)).map_err(|e| e.to_string())? {
            eprintln!("wrote {}", p.display());
        }
    }
    Ok(if result.all_converged() { 0 } else { EXIT_NONCONVERGED })
}
