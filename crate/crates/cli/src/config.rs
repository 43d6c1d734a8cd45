use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use skewalk_core::lattice::{
    parse_probability, validate_step_spec_with, Aperiodicity, LatticePmf, StepRole, WalkModel,
};
use skewalk_core::oracle::{BoundaryConvention, OracleParams};

use crate::CliError;

/// A step law given inline as `value -> probability` or by file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PmfSource {
    File { file: PathBuf },
    Inline(BTreeMap<String, serde_json::Value>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainKind {
    X,
    Y,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ChainKind,
    pub xi: PmfSource,
    #[serde(default)]
    pub xi_prime: Option<PmfSource>,
    pub restart: PmfSource,
    /// Accept step laws whose support has a span above 1 as long as the
    /// values themselves have gcd 1.
    #[serde(default)]
    pub allow_periodic_steps: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Constants,
    Dp,
    Simulate,
    Verify,
    All,
}

impl std::str::FromStr for Task {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| format!("unknown task {s:?}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConventionChoice {
    Auto,
    Fixed(BoundaryConvention),
}

impl std::str::FromStr for ConventionChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(ConventionChoice::Auto);
        }
        let rest = s.strip_prefix("fixed:").ok_or_else(|| format!("expected auto or fixed:RULE:SHIFT, got {s:?}"))?;
        Ok(ConventionChoice::Fixed(rest.parse()?))
    }
}

fn default_x_grid() -> Vec<i64> {
    vec![0, 1, 2, 5]
}
fn default_n_grid() -> Vec<usize> {
    vec![512, 1024, 2048, 4096]
}
fn default_y_grid() -> Vec<i64> {
    vec![0, 1, 2]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    #[serde(default = "default_x_grid")]
    pub x: Vec<i64>,
    #[serde(default = "default_n_grid")]
    pub n: Vec<usize>,
    #[serde(default = "default_y_grid")]
    pub y: Vec<i64>,
}

impl Default for Grids {
    fn default() -> Self {
        Self { x: default_x_grid(), n: default_n_grid(), y: default_y_grid() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub n: usize,
    pub paths: usize,
    /// Number of sample paths written as CSV.
    pub save_paths: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self { n: 2048, paths: 10_000, save_paths: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub n: usize,
    pub paths: usize,
    pub marginal_t: f64,
    pub joint_s: f64,
    pub joint_t: f64,
    pub bins: usize,
    pub p_threshold: f64,
    pub local_x: i64,
    pub harmonicity_x_max: i64,
    pub tightness_n: Vec<usize>,
    pub tightness_delta: Vec<f64>,
    pub tightness_paths: usize,
    pub tail_tolerance: f64,
    pub local_tolerance: f64,
    pub ks_tolerance: f64,
    pub sign_tolerance: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            n: 2048,
            paths: 100_000,
            marginal_t: 0.5,
            joint_s: 0.25,
            joint_t: 0.75,
            bins: 8,
            p_threshold: 1e-3,
            local_x: 1,
            harmonicity_x_max: 24,
            tightness_n: vec![256, 1024, 4096],
            tightness_delta: vec![0.0, 0.05, 0.1],
            tightness_paths: 1000,
            tail_tolerance: 0.02,
            local_tolerance: 0.05,
            ks_tolerance: 0.02,
            sign_tolerance: 0.02,
        }
    }
}

fn default_chunk() -> usize {
    1000
}
fn default_out() -> PathBuf {
    PathBuf::from("skewalk-out")
}
fn default_tasks() -> Vec<Task> {
    vec![Task::All]
}
fn default_convention() -> String {
    "auto".into()
}

/// The configuration file as written.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub model: ModelConfig,
    #[serde(default = "default_tasks")]
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default = "default_chunk")]
    pub chunk_size: usize,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default = "default_convention")]
    pub convention: String,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub oracle: Option<OracleParams>,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

/// Resolved step laws, as hashed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolvedModel {
    pub kind: ChainKind,
    pub xi: Vec<(i64, f64)>,
    pub xi_prime: Option<Vec<(i64, f64)>>,
    pub restart: Vec<(i64, f64)>,
    pub allow_periodic_steps: bool,
}

/// A validated configuration ready to run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub model: WalkModel,
    pub resolved: ResolvedModel,
    /// Tasks in execution order, `All` expanded.
    pub tasks: Vec<Task>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub chunk_size: usize,
    pub out: PathBuf,
    pub convention: ConventionChoice,
    pub grids: Grids,
    pub oracle: OracleParams,
    pub simulate: SimulateConfig,
    pub verify: VerifyConfig,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub tasks: Vec<Task>,
    pub convention: Option<String>,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::ConfigInvalid(msg.into())
}

fn load_pmf(src: &PmfSource, base: &Path, what: &str) -> Result<LatticePmf, CliError> {
    match src {
        PmfSource::File { file } => {
            let path = base.join(file);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| invalid(format!("{what}: cannot read {}: {e}", path.display())))?;
            LatticePmf::parse_text(&text).map_err(|e| invalid(format!("{what}: {e}")))
        }
        PmfSource::Inline(map) => {
            let mut atoms = Vec::with_capacity(map.len());
            for (k, v) in map {
                let value: i64 = k.trim().parse().map_err(|_| invalid(format!("{what}: bad value {k:?}")))?;
                let p = match v {
                    serde_json::Value::Number(x) => x.as_f64(),
                    serde_json::Value::String(s) => parse_probability(s),
                    _ => None,
                }
                .ok_or_else(|| invalid(format!("{what}: bad probability for {k}")))?;
                atoms.push((value, p));
            }
            atoms.sort_by_key(|a| a.0);
            LatticePmf::from_atoms(&atoms).map_err(|e| invalid(format!("{what}: {e}")))
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        let raw: RawConfig = serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_raw(raw, base, overrides)
    }

    pub fn from_raw(raw: RawConfig, base: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let policy = if raw.model.allow_periodic_steps { Aperiodicity::TailOnly } else { Aperiodicity::Strict };
        let xi = load_pmf(&raw.model.xi, base, "xi")?;
        let restart = load_pmf(&raw.model.restart, base, "restart")?;
        let xi_prime = raw.model.xi_prime.as_ref().map(|s| load_pmf(s, base, "xi_prime")).transpose()?;
        let step = |p: &LatticePmf, what: &str| {
            validate_step_spec_with(p, StepRole::Step, policy).map_err(|e| invalid(format!("{what}: {e}")))
        };
        let model = match raw.model.kind {
            ChainKind::Y => {
                if xi_prime.is_some() {
                    return Err(invalid("xi_prime is only meaningful for kind x"));
                }
                let gamma = validate_step_spec_with(&restart, StepRole::RestartY, policy)
                    .map_err(|e| invalid(format!("restart: {e}")))?;
                WalkModel::new_y(step(&xi, "xi")?, gamma)
            }
            ChainKind::X => {
                let xp = xi_prime.as_ref().unwrap_or(&xi);
                let eta = validate_step_spec_with(&restart, StepRole::RestartX, policy)
                    .map_err(|e| invalid(format!("restart: {e}")))?;
                WalkModel::new_x(step(&xi, "xi")?, step(xp, "xi_prime")?, eta)
            }
        }
        .map_err(|e| invalid(e.to_string()))?;

        let mut tasks = if overrides.tasks.is_empty() { raw.tasks.clone() } else { overrides.tasks.clone() };
        if tasks.is_empty() {
            return Err(invalid("task list is empty"));
        }
        if tasks.contains(&Task::All) {
            tasks = vec![Task::Constants, Task::Dp, Task::Simulate, Task::Verify];
        }
        tasks.sort();
        tasks.dedup();

        let seed = overrides.seed.or(raw.seed);
        if seed.is_none() && tasks.iter().any(|t| matches!(t, Task::Simulate | Task::Verify)) {
            return Err(invalid("a seed is required for simulate and verify"));
        }
        let convention: ConventionChoice =
            overrides.convention.as_deref().unwrap_or(&raw.convention).parse().map_err(invalid)?;
        let g = &raw.grids;
        if g.x.is_empty() || g.n.len() < 2 || g.y.is_empty() {
            return Err(invalid("grids must be nonempty (n needs at least two points)"));
        }
        if g.x.iter().any(|&x| x < 0) || g.n.contains(&0) {
            return Err(invalid("x grid must be nonnegative and n grid positive"));
        }
        if raw.chunk_size == 0 {
            return Err(invalid("chunk_size must be positive"));
        }
        let v = &raw.verify;
        if v.tightness_n.is_empty() || v.bins < 4 || !(0.0 < v.joint_s && v.joint_s < v.joint_t && v.joint_t <= 1.0)
        {
            return Err(invalid("verify section: need bins >= 4, 0 < joint_s < joint_t <= 1, tightness grid"));
        }
        let resolved = ResolvedModel {
            kind: raw.model.kind,
            xi: xi.atoms().collect(),
            xi_prime: xi_prime.map(|p| p.atoms().collect()),
            restart: restart.atoms().collect(),
            allow_periodic_steps: raw.model.allow_periodic_steps,
        };
        Ok(Self {
            model,
            resolved,
            tasks,
            seed,
            threads: overrides.threads.or(raw.threads),
            chunk_size: raw.chunk_size,
            out: overrides.out.clone().unwrap_or(raw.out),
            convention,
            grids: raw.grids,
            oracle: raw.oracle.unwrap_or_default(),
            simulate: raw.simulate,
            verify: raw.verify,
        })
    }

    /// SHA-256 over every field that affects results; the worker count and
    /// output directory are excluded.
    pub fn hash(&self) -> String {
        #[derive(Serialize)]
        struct Hashed<'a> {
            model: &'a ResolvedModel,
            tasks: &'a [Task],
            seed: Option<u64>,
            chunk_size: usize,
            convention: &'a ConventionChoice,
            grids: &'a Grids,
            oracle: &'a OracleParams,
            simulate: &'a SimulateConfig,
            verify: &'a VerifyConfig,
        }
        let h = Hashed {
            model: &self.resolved,
            tasks: &self.tasks,
            seed: self.seed,
            chunk_size: self.chunk_size,
            convention: &self.convention,
            grids: &self.grids,
            oracle: &self.oracle,
            simulate: &self.simulate,
            verify: &self.verify,
        };
        let bytes = serde_json::to_vec(&h).expect("serializable");
        hex(&Sha256::digest(&bytes))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
