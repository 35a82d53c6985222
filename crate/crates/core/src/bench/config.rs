use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::BenchError;
use crate::darcy::{BoundaryConditions, DarcyProblem, SideBcs, SolveOptions};
use crate::fem::PermeabilityField;
use crate::mesh::{build_builtin, build_random_network, MdMesh, RandomNetworkConfig};
use crate::precond::{AlphaPolicy, AuxConfig, BlockKind};
use crate::solvers::KrylovConfig;

/// Where the base mesh comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeometrySpec {
    /// A builtin lattice geometry; `m = None` uses its default lattice size.
    Builtin { name: String, m: Option<usize> },
    /// A random lattice network drawn with the run seed.
    Random { count: usize, m: usize },
    /// A mesh JSON file.
    File { path: PathBuf },
}

impl GeometrySpec {
    /// Base mesh refined `level` times.
    ///
    /// Builtin geometries are rebuilt on the finer lattice; other meshes are
    /// refined uniformly.
    pub fn mesh(&self, seed: u64, level: usize) -> Result<MdMesh, BenchError> {
        let mut mesh = match self {
            GeometrySpec::Builtin { name, m } => {
                let base = match m {
                    Some(m) => *m,
                    None => crate::mesh::builtin_segments(name)?.1,
                };
                return Ok(build_builtin(name, Some(base << level))?);
            }
            GeometrySpec::Random { count, m } => build_random_network(&RandomNetworkConfig::new(seed, *count, *m))?,
            GeometrySpec::File { path } => {
                let text = std::fs::read_to_string(path).map_err(|e| BenchError::Io(path.clone(), e))?;
                MdMesh::from_json(&text)?
            }
        };
        for _ in 0..level {
            mesh = mesh.refine();
        }
        Ok(mesh)
    }

    pub fn with_count(&self, count: usize) -> Result<GeometrySpec, BenchError> {
        match self {
            GeometrySpec::Random { m, .. } => Ok(GeometrySpec::Random { count, m: *m }),
            _ => Err(BenchError::Config("a fracture-count sweep needs a random geometry".into())),
        }
    }
}

/// Isotropic rock, tangential fracture and normal interface permeabilities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PermSpec {
    pub k_m: f64,
    pub k_f: f64,
    pub k_n: f64,
}

impl PermSpec {
    pub fn field(&self, mesh: &MdMesh) -> Result<PermeabilityField, BenchError> {
        Ok(PermeabilityField::uniform(mesh, self.k_m, self.k_f, self.k_n)?)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    /// Directory for tables, configs and fields; nothing is written if unset.
    pub dir: Option<PathBuf>,
    pub prefix: Option<String>,
}

/// One reproducible run description shared by all subcommands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometrySpec,
    pub permeability: PermSpec,
    pub alpha: AlphaPolicy,
    pub precond: BlockKind,
    /// Refinement levels of `sweep-h`, counted from the base mesh.
    pub levels: Vec<usize>,
    /// α values of `sweep-alpha`.
    pub alphas: Vec<f64>,
    /// Fracture counts of `sweep-fractures`.
    pub fracture_counts: Vec<usize>,
    /// `K_f = K_ν` values of `sweep-k`.
    pub k_values: Vec<f64>,
    /// α columns of `sweep-k`; empty means one column from the α policy.
    pub k_alphas: Vec<f64>,
    pub outer: KrylovConfig,
    pub inner: KrylovConfig,
    pub aux: AuxConfig,
    pub bc: SideBcs,
    pub output: OutputSpec,
    pub seed: u64,
    /// Adds a Lanczos condition estimate of the preconditioned flux block to each row.
    pub kappa: bool,
    pub kappa_steps: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            geometry: GeometrySpec::Builtin {
                name: "regular".into(),
                m: None,
            },
            permeability: PermSpec {
                k_m: 1.0,
                k_f: 1.0,
                k_n: 1.0,
            },
            alpha: AlphaPolicy::KMin100,
            precond: BlockKind::D,
            levels: vec![0, 1, 2, 3],
            alphas: vec![1.0, 10.0, 100.0, 1e3, 1e4],
            fracture_counts: vec![1, 5, 10, 20],
            k_values: vec![1e-4, 1.0, 1e4],
            k_alphas: Vec::new(),
            outer: KrylovConfig::outer(),
            inner: KrylovConfig::inner(),
            aux: AuxConfig::default(),
            bc: SideBcs::left_right(1.0, 0.0),
            output: OutputSpec::default(),
            seed: 1,
            kappa: false,
            kappa_steps: 60,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        serde_json::from_str(text).map_err(|e| BenchError::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::Io(path.to_path_buf(), e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Applies `key=value` overrides; keys are dotted paths and values are
    /// parsed as JSON, falling back to a plain string.
    pub fn with_overrides<S: AsRef<str>>(&self, sets: &[S]) -> Result<Self, BenchError> {
        let mut v = serde_json::to_value(self).expect("config serializes");
        for s in sets {
            let s = s.as_ref();
            let (key, raw) = s
                .split_once('=')
                .ok_or_else(|| BenchError::Config(format!("override '{s}' is not of the form key=value")))?;
            let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
            set_path(&mut v, key, value)?;
        }
        serde_json::from_value(v).map_err(|e| BenchError::Config(e.to_string()))
    }

    /// SHA-256 of the compact JSON form, ignoring output locations.
    pub fn hash(&self) -> String {
        let solver_relevant = RunConfig {
            output: OutputSpec::default(),
            ..self.clone()
        };
        let text = serde_json::to_string(&solver_relevant).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            kind: self.precond,
            alpha: self.alpha,
            outer: self.outer,
            inner: self.inner,
            aux: self.aux,
            ..SolveOptions::default()
        }
    }

    pub fn problem(&self, mesh: Arc<MdMesh>) -> Result<DarcyProblem, BenchError> {
        let perm = self.permeability.field(&mesh)?;
        Ok(DarcyProblem::new(mesh, perm, BoundaryConditions::Sides(self.bc)))
    }
}

fn set_path(root: &mut Value, key: &str, value: Value) -> Result<(), BenchError> {
    let mut cur = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| BenchError::Config(format!("'{key}': '{part}' is not inside an object")))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        let next = obj.entry(part.to_string()).or_insert(Value::Null);
        // optional blocks such as `output.dir` may start out null
        if next.is_null() {
            *next = Value::Object(Default::default());
        }
        cur = next;
    }
    Err(BenchError::Config(format!("empty override key '{key}'")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_and_hash_is_stable() {
        let c = RunConfig::default();
        let back = RunConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        assert_eq!(c.hash().len(), 64);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_json(r#"{"levles": [0, 1]}"#).is_err());
        assert!(RunConfig::from_json(r#"{"permeability": {"k_m": 1, "k_f": 1, "k_n": 1, "k_x": 2}}"#).is_err());
        let c = RunConfig::from_json(r#"{"seed": 9}"#).unwrap();
        assert_eq!(c.seed, 9);
    }

    #[test]
    fn overrides_follow_dotted_paths() {
        let c = RunConfig::default()
            .with_overrides(&["permeability.k_f=1e-4", "precond=L", "output.dir=out", "levels=[0,2]"])
            .unwrap();
        assert_eq!(c.permeability.k_f, 1e-4);
        assert_eq!(c.precond, BlockKind::L);
        assert_eq!(c.output.dir, Some(PathBuf::from("out")));
        assert_eq!(c.levels, vec![0, 2]);
        assert_ne!(c.hash(), RunConfig::default().hash());
        let moved = RunConfig::default().with_overrides(&["output.dir=elsewhere"]).unwrap();
        assert_eq!(moved.hash(), RunConfig::default().hash());
        assert!(RunConfig::default().with_overrides(&["nonsense=1"]).is_err());
        assert!(RunConfig::default().with_overrides(&["seed"]).is_err());
    }

    #[test]
    fn builtin_levels_double_the_lattice() {
        let g = GeometrySpec::Builtin {
            name: "single".into(),
            m: Some(2),
        };
        let a = g.mesh(0, 2).unwrap();
        assert_eq!(a, build_builtin("single", Some(8)).unwrap());
    }
}
