use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use serde::Serialize;

use super::{BenchError, PermSpec, RunConfig};
use crate::darcy::{solve, SaddleSystem, SolveInfo};
use crate::mesh::MdMesh;
use crate::precond::{precond_quality, AlphaPolicy, AuxSpacePreconditioner};

/// Environment variable capping the number of rows run concurrently.
pub const THREADS_ENV: &str = "MDAUX_THREADS";

/// Worker threads for sweep rows: `MDAUX_THREADS` if set to a positive
/// integer, otherwise one.
pub fn worker_threads() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(1)
}

/// One table row; solver columns are `None` for skipped rows.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    /// Swept parameter: level, α, fracture count or `K_f = K_ν`.
    pub value: f64,
    pub alpha: Option<f64>,
    pub n_dof: Option<usize>,
    pub outer: Option<usize>,
    pub inner_avg: Option<f64>,
    pub converged: Option<bool>,
    /// Setup plus solve wall time in seconds.
    pub time: Option<f64>,
    /// `log(T_i / T_{i-1}) / log(N_i / N_{i-1})` along refinement sweeps.
    pub rate: Option<f64>,
    pub kappa: Option<f64>,
    pub notice: Option<String>,
    pub config_hash: String,
}

impl SweepRow {
    fn skipped(value: f64, alpha: Option<f64>, notice: String, hash: &str) -> Self {
        Self {
            value,
            alpha,
            n_dof: None,
            outer: None,
            inner_avg: None,
            converged: None,
            time: None,
            rate: None,
            kappa: None,
            notice: Some(notice),
            config_hash: hash.to_string(),
        }
    }

    pub fn is_skipped(&self) -> bool {
        self.converged.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepMeta {
    pub command: String,
    pub parameter: String,
    pub config_hash: String,
    pub version: String,
    pub threads: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub meta: SweepMeta,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Every row that ran converged; skipped rows do not count.
    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.converged != Some(false))
    }

    /// Outer iteration counts of rows that ran, in row order.
    pub fn outer_counts(&self) -> Vec<usize> {
        self.rows.iter().filter_map(|r| r.outer).collect()
    }

    /// `max − min` of the outer counts over rows with `value > 0` that ran.
    pub fn outer_spread(&self) -> Option<usize> {
        let v: Vec<usize> = self.rows.iter().filter(|r| r.value > 0.0).filter_map(|r| r.outer).collect();
        Some(v.iter().max()? - v.iter().min()?)
    }

    fn has_alpha_column(&self) -> bool {
        self.meta.parameter != "alpha"
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "`{}` (config {}, version {})\n",
            self.meta.command,
            &self.meta.config_hash[..12.min(self.meta.config_hash.len())],
            self.meta.version
        );
        let alpha = self.has_alpha_column();
        let _ = write!(s, "| {} |", self.meta.parameter);
        if alpha {
            s.push_str(" α |");
        }
        s.push_str(" N_dof | N_it (inner) | converged | time [s] | rate | κ | notice |\n|---|");
        if alpha {
            s.push_str("---|");
        }
        s.push_str("---|---|---|---|---|---|---|\n");
        let opt = |v: Option<String>| v.unwrap_or_else(|| "--".into());
        for r in &self.rows {
            let _ = write!(s, "| {} |", r.value);
            if alpha {
                let _ = write!(s, " {} |", opt(r.alpha.map(|a| format!("{a}"))));
            }
            let it = match (r.outer, r.inner_avg) {
                (Some(o), Some(i)) => format!("{o} ({i:.1})"),
                _ => "--".into(),
            };
            let _ = writeln!(
                s,
                " {} | {} | {} | {} | {} | {} | {} |",
                opt(r.n_dof.map(|n| n.to_string())),
                it,
                opt(r.converged.map(|c| if c { "yes".into() } else { "no".into() })),
                opt(r.time.map(|t| format!("{t:.3}"))),
                opt(r.rate.map(|t| format!("{t:.2}"))),
                opt(r.kappa.map(|k| format!("{k:.2}"))),
                r.notice.clone().unwrap_or_default(),
            );
        }
        s.push_str("\nTimes are wall-clock seconds.\n");
        s
    }

    /// Machine-readable table without timing columns; identical configs give
    /// identical bytes.
    pub fn to_csv(&self) -> String {
        let mut s = format!("{},alpha,n_dof,outer,inner_avg,converged,kappa,notice,config_hash\n", self.meta.parameter);
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                r.value,
                csv_opt(r.alpha),
                csv_opt(r.n_dof),
                csv_opt(r.outer),
                csv_opt(r.inner_avg),
                csv_opt(r.converged),
                csv_opt(r.kappa),
                csv_quote(r.notice.as_deref().unwrap_or("")),
                r.config_hash
            );
        }
        s
    }

    /// Wall times and the rate column, kept apart from the deterministic table.
    pub fn timing_csv(&self) -> String {
        let mut s = format!("{},n_dof,time,rate,config_hash\n", self.meta.parameter);
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                r.value,
                csv_opt(r.n_dof),
                csv_opt(r.time),
                csv_opt(r.rate),
                r.config_hash
            );
        }
        s
    }

    /// Writes `<prefix>.md`, `<prefix>.csv`, `<prefix>_timing.csv`,
    /// `<prefix>.json` and the run config `<prefix>_config.json`.
    pub fn write(&self, cfg: &RunConfig, dir: &Path, prefix: &str) -> Result<Vec<PathBuf>, BenchError> {
        std::fs::create_dir_all(dir).map_err(|e| BenchError::Io(dir.to_path_buf(), e))?;
        let files = [
            (format!("{prefix}.md"), self.to_markdown()),
            (format!("{prefix}.csv"), self.to_csv()),
            (format!("{prefix}_timing.csv"), self.timing_csv()),
            (format!("{prefix}.json"), serde_json::to_string_pretty(self).expect("result serializes")),
            (format!("{prefix}_config.json"), cfg.to_json()),
        ];
        let mut out = Vec::new();
        for (name, text) in files {
            let p = dir.join(name);
            std::fs::write(&p, text).map_err(|e| BenchError::Io(p.clone(), e))?;
            out.push(p);
        }
        Ok(out)
    }
}

fn csv_opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Runs `n` jobs on up to `threads` workers and returns results in job order.
fn run_jobs<T: Send>(n: usize, threads: usize, job: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let slots: Vec<Mutex<Option<T>>> = (0..n).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..threads.clamp(1, n.max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let r = job(i);
                *slots[i].lock().expect("slot lock") = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().expect("slot lock").expect("every job ran"))
        .collect()
}

/// Solves one configuration; errors become a skipped row.
fn run_row(cfg: &RunConfig, mesh: Arc<MdMesh>, perm: PermSpec, alpha: AlphaPolicy, value: f64, hash: &str) -> SweepRow {
    let attempt = || -> Result<(SolveInfo, Option<f64>), BenchError> {
        let row_cfg = RunConfig {
            permeability: perm,
            alpha,
            ..cfg.clone()
        };
        let problem = row_cfg.problem(mesh.clone())?;
        let system = SaddleSystem::assemble(&problem)?;
        let sol = solve(&system, &row_cfg.solve_options())?;
        let kappa = if cfg.kappa {
            let (_, aug, p) = AuxSpacePreconditioner::build(&mesh, &problem.perm, sol.info.alpha, cfg.aux)?;
            Some(precond_quality(&aug, &p, cfg.kappa_steps)?.kappa)
        } else {
            None
        };
        Ok((sol.info, kappa))
    };
    match attempt() {
        Ok((info, kappa)) => SweepRow {
            value,
            alpha: Some(info.alpha),
            n_dof: Some(info.num_dofs),
            outer: Some(info.outer_iterations),
            inner_avg: Some(info.inner_average),
            converged: Some(info.converged),
            time: Some(info.setup_time + info.solve_time),
            rate: None,
            kappa,
            notice: (!info.converged).then(|| "not converged".to_string()),
            config_hash: hash.to_string(),
        },
        Err(e) => SweepRow::skipped(value, None, format!("skipped: {e}"), hash),
    }
}

fn meta(cfg: &RunConfig, command: &str, parameter: &str, threads: usize) -> SweepMeta {
    SweepMeta {
        command: command.into(),
        parameter: parameter.into(),
        config_hash: cfg.hash(),
        version: env!("CARGO_PKG_VERSION").into(),
        threads,
    }
}

fn strictly_increasing<T: PartialOrd>(v: &[T]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

/// Refinement sweep over `cfg.levels`.
pub fn sweep_h(cfg: &RunConfig) -> Result<SweepResult, BenchError> {
    if cfg.levels.len() < 2 {
        return Err(BenchError::Config("a refinement sweep needs at least 2 levels".into()));
    }
    if !strictly_increasing(&cfg.levels) {
        return Err(BenchError::Config("refinement levels must be strictly increasing".into()));
    }
    let meshes = cfg
        .levels
        .iter()
        .map(|&l| cfg.geometry.mesh(cfg.seed, l).map(Arc::new))
        .collect::<Result<Vec<_>, _>>()?;
    let threads = worker_threads();
    let hash = cfg.hash();
    let mut rows = run_jobs(meshes.len(), threads, |i| {
        run_row(cfg, meshes[i].clone(), cfg.permeability, cfg.alpha, cfg.levels[i] as f64, &hash)
    });
    for i in 1..rows.len() {
        let (a, b) = (&rows[i - 1], &rows[i]);
        if let (Some(t0), Some(t1), Some(n0), Some(n1)) = (a.time, b.time, a.n_dof, b.n_dof) {
            if t0 > 0.0 && t1 > 0.0 && n1 > n0 {
                rows[i].rate = Some((t1 / t0).ln() / (n1 as f64 / n0 as f64).ln());
            }
        }
    }
    let dofs: Vec<usize> = rows.iter().filter_map(|r| r.n_dof).collect();
    if !strictly_increasing(&dofs) {
        return Err(BenchError::Config(format!("refinement did not increase N_dof: {dofs:?}")));
    }
    Ok(SweepResult {
        meta: meta(cfg, "sweep-h", "level", threads),
        rows,
    })
}

/// α sweep on the base mesh.
pub fn sweep_alpha(cfg: &RunConfig) -> Result<SweepResult, BenchError> {
    if cfg.alphas.len() < 2 {
        return Err(BenchError::Config("an α sweep needs at least 2 values".into()));
    }
    if let Some(a) = cfg.alphas.iter().find(|a| !(**a > 0.0)) {
        return Err(BenchError::Config(format!("α must be positive, got {a}")));
    }
    let mesh = Arc::new(cfg.geometry.mesh(cfg.seed, 0)?);
    let threads = worker_threads();
    let hash = cfg.hash();
    let rows = run_jobs(cfg.alphas.len(), threads, |i| {
        let a = cfg.alphas[i];
        run_row(cfg, mesh.clone(), cfg.permeability, AlphaPolicy::Fixed(a), a, &hash)
    });
    Ok(SweepResult {
        meta: meta(cfg, "sweep-alpha", "alpha", threads),
        rows,
    })
}

/// Random networks with increasing fracture counts and a fixed seed.
///
/// A count the generator cannot place becomes a skipped row.
pub fn sweep_fractures(cfg: &RunConfig) -> Result<SweepResult, BenchError> {
    if cfg.fracture_counts.is_empty() || !strictly_increasing(&cfg.fracture_counts) {
        return Err(BenchError::Config("fracture counts must be non-empty and strictly increasing".into()));
    }
    cfg.geometry.with_count(0)?;
    let threads = worker_threads();
    let hash = cfg.hash();
    let rows = run_jobs(cfg.fracture_counts.len(), threads, |i| {
        let count = cfg.fracture_counts[i];
        let mesh = cfg.geometry.with_count(count).and_then(|g| g.mesh(cfg.seed, 0));
        match mesh {
            Ok(m) => run_row(cfg, Arc::new(m), cfg.permeability, cfg.alpha, count as f64, &hash),
            Err(e) => SweepRow::skipped(count as f64, None, format!("skipped: {e}"), &hash),
        }
    });
    Ok(SweepResult {
        meta: meta(cfg, "sweep-fractures", "fractures", threads),
        rows,
    })
}

/// Heterogeneity grid over `K_f = K_ν` and α; cells with α below
/// `max{1, K_min⁻¹}` are skipped.
pub fn sweep_k(cfg: &RunConfig) -> Result<SweepResult, BenchError> {
    if cfg.k_values.is_empty() {
        return Err(BenchError::Config("a permeability sweep needs at least one value".into()));
    }
    if let Some(k) = cfg.k_values.iter().chain(&cfg.k_alphas).find(|k| !(**k > 0.0)) {
        return Err(BenchError::Config(format!("permeabilities and α must be positive, got {k}")));
    }
    let mesh = Arc::new(cfg.geometry.mesh(cfg.seed, 0)?);
    let mut cells = Vec::new();
    for &k in &cfg.k_values {
        let perm = PermSpec {
            k_f: k,
            k_n: k,
            ..cfg.permeability
        };
        if cfg.k_alphas.is_empty() {
            cells.push((k, perm, cfg.alpha));
        } else {
            for &a in &cfg.k_alphas {
                cells.push((k, perm, AlphaPolicy::Fixed(a)));
            }
        }
    }
    let threads = worker_threads();
    let hash = cfg.hash();
    let rows = run_jobs(cells.len(), threads, |i| {
        let (k, perm, policy) = cells[i];
        let k_min = match perm.field(&mesh) {
            Ok(f) => f.k_min(),
            Err(e) => return SweepRow::skipped(k, None, format!("skipped: {e}"), &hash),
        };
        let alpha = policy.alpha(k_min);
        if !AlphaPolicy::admissible(alpha, k_min) {
            return SweepRow::skipped(k, Some(alpha), "skipped: α below max{1, 1/K_min}".into(), &hash);
        }
        run_row(cfg, mesh.clone(), perm, AlphaPolicy::Fixed(alpha), k, &hash)
    });
    Ok(SweepResult {
        meta: meta(cfg, "sweep-k", "k", threads),
        rows,
    })
}
