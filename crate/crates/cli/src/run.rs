use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use skewalk_core::lattice::{ModelKind, WalkModel};
use skewalk_core::oracle::{
    calibrate_convention, green_potential, model_tables, return_time_pmf, survival_dp_with, BoundaryConvention,
    Calibration, ConstantsReport, LocalRecording, OracleError, SideTables,
};
use skewalk_core::verify::{
    check_harmonicity, check_joint, check_local, check_marginal, check_return_times, check_tail,
    tightness_diagnostics, CheckRecord, LocalTolerances, MarginalTolerances, ReturnTolerances, Verdict,
    VerificationReport, VerifyError, WalkSide,
};
use skewalk_core::walks::{map_paths, simulate_into, zero_visit_stats, BatchConfig, PathBundle};
use skewalk_core::RandomStream;

use crate::config::{hex, ConventionChoice, RunConfig, Task};
use crate::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub version: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub started: String,
    pub finished: String,
    pub tasks: BTreeMap<Task, Vec<FileEntry>>,
    pub verdict: Option<Verdict>,
}

#[derive(Clone, Debug, Serialize)]
struct ConstantsFile<'a> {
    calibration: Option<&'a Calibration>,
    walk_convention: BoundaryConvention,
    chain_convention: BoundaryConvention,
    alpha: f64,
    report: &'a ConstantsReport,
    sigma: f64,
    sigma_prime: f64,
}

#[derive(Clone, Debug, Serialize)]
struct SimulationSummary {
    seed: u64,
    paths: usize,
    n: usize,
    /// Mean number of zero visits up to `n`, divided by `√n`.
    visits_per_root_n: f64,
    /// Fraction of paths that are positive at the final step.
    positive_at_end: f64,
    /// Fraction of paths that never return to zero.
    never_returned: f64,
}

/// Seed of one check, derived from the run seed and the check label.
pub fn sub_seed(seed: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

struct Writer {
    root: PathBuf,
    files: Vec<FileEntry>,
}

impl Writer {
    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.files.push(FileEntry { path: name.into(), sha256: hex(&Sha256::digest(bytes)), bytes: bytes.len() });
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Failed(e.to_string()))?;
        s.push('\n');
        self.put(name, s.as_bytes())
    }

    fn take(&mut self) -> Vec<FileEntry> {
        std::mem::take(&mut self.files)
    }
}

/// Lazily built oracle state shared by the tasks.
struct Oracle<'a> {
    cfg: &'a RunConfig,
    tables: Option<(SideTables, Option<SideTables>)>,
    calibration: Option<Calibration>,
    walk_convention: Option<BoundaryConvention>,
}

impl<'a> Oracle<'a> {
    fn new(cfg: &'a RunConfig) -> Self {
        Self { cfg, tables: None, calibration: None, walk_convention: None }
    }

    fn tables(&mut self) -> Result<&(SideTables, Option<SideTables>), CliError> {
        if self.tables.is_none() {
            self.tables = Some(model_tables(&self.cfg.model, &self.cfg.oracle)?);
        }
        Ok(self.tables.as_ref().expect("set"))
    }

    /// Convention of the plain walk killed at the boundary.
    fn walk_convention(&mut self) -> Result<BoundaryConvention, CliError> {
        if let Some(c) = self.walk_convention {
            return Ok(c);
        }
        let conv = match self.cfg.convention {
            ConventionChoice::Fixed(c) => c,
            ConventionChoice::Auto => {
                let (x, n, dp) = (self.cfg.grids.x.clone(), self.cfg.grids.n.clone(), self.cfg.oracle.dp);
                let xi = self.cfg.model.xi.clone();
                let pos = &self.tables()?.0;
                let cal = calibrate_convention(&xi, pos, &x, &n, dp)?;
                let c = cal.convention;
                self.calibration = Some(cal);
                c
            }
        };
        self.walk_convention = Some(conv);
        Ok(conv)
    }

    fn chain_convention(&mut self) -> Result<BoundaryConvention, CliError> {
        let w = self.walk_convention()?;
        w.for_chain()
            .ok_or_else(|| CliError::Failed(format!("convention {w} has no counterpart for the restarted chain")))
    }

    fn report(&mut self) -> Result<ConstantsReport, CliError> {
        let conv = self.chain_convention()?;
        let cfg = self.cfg;
        let (pos, neg) = self.tables()?;
        Ok(ConstantsReport::from_tables(&cfg.model, pos, neg.as_ref(), conv)?)
    }
}

fn ensure_dir(p: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(p).map_err(|e| CliError::io(p, e))
}

/// Runs every configured task inside a pool of the configured size.
pub fn run(cfg: &RunConfig) -> Result<Manifest, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        if t == 0 {
            return Err(CliError::ConfigInvalid("threads must be positive".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| CliError::ResourceLimit(e.to_string()))?;
    pool.install(|| run_tasks(cfg))
}

fn run_tasks(cfg: &RunConfig) -> Result<Manifest, CliError> {
    let started = chrono::Utc::now().to_rfc3339();
    ensure_dir(&cfg.out)?;
    let mut w = Writer { root: cfg.out.clone(), files: vec![] };
    let mut oracle = Oracle::new(cfg);
    let mut tasks = BTreeMap::new();
    let mut verdict = None;
    for &task in &cfg.tasks {
        match task {
            Task::Constants => constants_task(&mut oracle, &mut w)?,
            Task::Dp => dp_task(&mut oracle, &mut w)?,
            Task::Simulate => simulate_task(cfg, &mut w)?,
            Task::Verify => {
                let report = verify_task(&mut oracle, &mut w)?;
                verdict = Some(report.overall());
            }
            Task::All => unreachable!("expanded during validation"),
        }
        tasks.insert(task, w.take());
    }
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").into(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        started,
        finished: chrono::Utc::now().to_rfc3339(),
        tasks,
        verdict,
    };
    w.json("manifest.json", &manifest)?;
    Ok(manifest)
}

fn constants_task(oracle: &mut Oracle<'_>, w: &mut Writer) -> Result<(), CliError> {
    let report = oracle.report()?;
    let walk = oracle.walk_convention()?;
    let model = &oracle.cfg.model;
    let file = ConstantsFile {
        calibration: oracle.calibration.as_ref(),
        walk_convention: walk,
        chain_convention: report.convention,
        alpha: report.alpha,
        report: &report,
        sigma: model.sigma(),
        sigma_prime: model.sigma_prime(),
    };
    w.json("constants.json", &file)?;
    let (pos, neg) = oracle.tables()?;
    let (h, h_tilde, h_prime) = (pos.h.to_csv(), pos.h_tilde.as_ref().map(|t| t.to_csv()), neg.as_ref().map(|t| t.h.to_csv()));
    w.put("h.csv", h.as_bytes())?;
    if let Some(t) = h_tilde {
        w.put("h_tilde.csv", t.as_bytes())?;
    }
    if let Some(t) = h_prime {
        w.put("h_prime.csv", t.as_bytes())?;
    }
    Ok(())
}

fn dp_task(oracle: &mut Oracle<'_>, w: &mut Writer) -> Result<(), CliError> {
    let cfg = oracle.cfg;
    let conv = oracle.walk_convention()?;
    let horizon = *cfg.grids.n.iter().max().expect("validated");
    for &x in &cfg.grids.x {
        let t = survival_dp_with(&cfg.model.xi.pmf, x, horizon, conv, cfg.oracle.dp, &LocalRecording::None)?;
        w.put(&format!("survival_x{x}.csv"), t.to_csv().as_bytes())?;
    }
    let table = return_time_pmf(&cfg.model, horizon, cfg.oracle.dp)?;
    let green = green_potential(&table.tau1_pmf, horizon);
    let mut out = String::from("n,tau1_pmf,tail,positive_tail,green\n");
    for n in 0..=horizon {
        let _ = writeln!(
            out,
            "{n},{},{},{},{}",
            table.tau1_pmf[n],
            table.tail(n),
            table.positive_survival[n],
            green.sigma[n]
        );
    }
    w.put("return_times.csv", out.as_bytes())
}

fn simulate_task(cfg: &RunConfig, w: &mut Writer) -> Result<(), CliError> {
    let seed = cfg.seed.ok_or_else(|| CliError::ConfigInvalid("simulate needs a seed".into()))?;
    let sim = &cfg.simulate;
    if sim.paths == 0 || sim.n == 0 {
        return Err(CliError::ConfigInvalid("simulate needs positive paths and n".into()));
    }
    let batch = BatchConfig { paths: sim.paths, n: sim.n, seed, chunk_size: cfg.chunk_size };
    let stats = map_paths(&cfg.model, &batch, |p| {
        let z = zero_visit_stats(p, sim.n, 0.0).expect("full-length path");
        (z.n_n, p.values[sim.n] > 0)
    });
    let paths = sim.paths as f64;
    let summary = SimulationSummary {
        seed,
        paths: sim.paths,
        n: sim.n,
        visits_per_root_n: stats.iter().map(|s| s.0 as f64).sum::<f64>() / paths / (sim.n as f64).sqrt(),
        positive_at_end: stats.iter().filter(|s| s.1).count() as f64 / paths,
        never_returned: stats.iter().filter(|s| s.0 == 0).count() as f64 / paths,
    };
    w.json("simulation.json", &summary)?;
    let mut buf = PathBundle::default();
    for i in 0..sim.save_paths.min(sim.paths) {
        simulate_into(&cfg.model, sim.n, &mut RandomStream::new(seed, i as u64), &mut buf);
        w.put(&format!("path_{i}.csv"), buf.to_csv().as_bytes())?;
    }
    Ok(())
}

/// Turns a precondition failure of one check into a `NotApplicable` record;
/// resource and oracle failures abort the run.
fn precondition(name: &str, what: &str, e: VerifyError, report: &mut VerificationReport) -> Result<(), CliError> {
    match e {
        VerifyError::Oracle(OracleError::Periodic(_))
        | VerifyError::InsufficientCounts { .. }
        | VerifyError::InvalidInput(_) => {
            report.push(CheckRecord::new(
                name,
                what,
                &serde_json::Value::Null,
                &serde_json::json!({ "skipped": e.to_string() }),
                Verdict::NotApplicable,
            ));
            Ok(())
        }
        other => Err(other.into()),
    }
}

fn verify_task(oracle: &mut Oracle<'_>, w: &mut Writer) -> Result<VerificationReport, CliError> {
    let cfg = oracle.cfg;
    let seed = cfg.seed.ok_or_else(|| CliError::ConfigInvalid("verify needs a seed".into()))?;
    let v = &cfg.verify;
    let model: &WalkModel = &cfg.model;
    let walk_conv = oracle.walk_convention()?;
    let constants = oracle.report()?;
    let (pos, _) = oracle.tables()?;
    let side = WalkSide { xi: &model.xi, tables: pos, convention: walk_conv };
    let ns = &cfg.grids.n;
    let dp = cfg.oracle.dp;
    let mut report = VerificationReport::default();

    const TAIL: &str = "sqrt(n) P[tau(x) > n] tends to c1 h(x)";
    let x_grid: Vec<i64> = cfg.grids.x.iter().copied().filter(|&x| walk_conv.h(&pos.h, x) > 0.0).collect();
    for t in check_tail(side, &x_grid, ns, v.tail_tolerance, dp)? {
        let name = format!("tail x={}", t.x);
        w.put(&format!("ratio_tail_x{}.csv", t.x), t.ratio.to_csv().as_bytes())?;
        report.push(CheckRecord::new(name, TAIL, &serde_json::json!({ "x": t.x, "n_grid": ns }), &t, t.ratio.verdict));
    }

    const LOCAL: &str = "n^{3/2} P[tau(x) > n, x + S(n) = y] tends to c2 h(x) h~(y)";
    let local_name = format!("local x={}", v.local_x);
    let local_tol = LocalTolerances { ratio: v.local_tolerance, ..LocalTolerances::default() };
    match check_local(side, v.local_x, &cfg.grids.y, ns, &local_tol, dp) {
        Ok(l) => {
            let verdict = Verdict::combine(
                l.local
                    .iter()
                    .map(|(_, r)| r.verdict)
                    .chain([l.first_passage.verdict, l.c2_verdict, l.reaggregation_verdict]),
            );
            for (y, r) in &l.local {
                w.put(&format!("ratio_local_x{}_y{y}.csv", v.local_x), r.to_csv().as_bytes())?;
            }
            let inputs = serde_json::json!({ "x": v.local_x, "y_grid": cfg.grids.y, "n_grid": ns });
            report.push(CheckRecord::new(local_name, LOCAL, &inputs, &l, verdict));
        }
        Err(e) => precondition(&local_name, LOCAL, e, &mut report)?,
    }

    const RETURNS: &str = "first return time of the restarted chain: sqrt(n) tail, n^{3/2} local, Green potential";
    let r = check_return_times(model, &constants, ns, &ReturnTolerances::default(), dp)?;
    for rc in [&r.tail, &r.local, &r.green, &r.alpha] {
        w.put(&format!("ratio_{}.csv", rc.name.replace(' ', "_")), rc.to_csv().as_bytes())?;
    }
    let verdict = Verdict::combine([r.tail.verdict, r.local.verdict, r.green.verdict, r.alpha.verdict]);
    let numbers = serde_json::json!({
        "tail": r.tail, "local": r.local, "green": r.green, "alpha": r.alpha, "tau1_at_one": r.tau1_at_one,
    });
    report.push(CheckRecord::new("return times", RETURNS, &serde_json::json!({ "n_grid": ns }), &numbers, verdict));

    const HARMONIC: &str = "h is harmonic for the killed walk";
    let hc = check_harmonicity(&model.xi.pmf, &pos.h, walk_conv, v.harmonicity_x_max)?;
    report.push(CheckRecord::new(
        "harmonicity",
        HARMONIC,
        &serde_json::json!({ "x_max": v.harmonicity_x_max }),
        &hc,
        hc.verdict,
    ));

    let alpha = match model.kind {
        ModelKind::Y => 1.0,
        ModelKind::X => constants.alpha,
    };
    let batch = |label: &str, n: usize, paths: usize| BatchConfig {
        paths,
        n,
        seed: sub_seed(seed, label),
        chunk_size: cfg.chunk_size,
    };

    const MARGINAL: &str = "X_n(t) converges in law to skew Brownian motion at time t";
    let mname = format!("marginal t={}", v.marginal_t);
    let mtol = MarginalTolerances { ks: v.ks_tolerance, sign: v.sign_tolerance };
    match check_marginal(model, alpha, v.marginal_t, &batch("marginal", v.n, v.paths), &mtol) {
        Ok(m) => {
            let verdict = Verdict::combine([m.fit.verdict, m.sign.verdict]);
            let inputs = serde_json::json!({ "t": m.t, "n": m.n, "paths": v.paths, "alpha": alpha });
            report.push(CheckRecord::new(mname, MARGINAL, &inputs, &m, verdict));
        }
        Err(e) => precondition(&mname, MARGINAL, e, &mut report)?,
    }

    const JOINT: &str = "(X_n(s), X_n(t)) converges to the two-time law of skew Brownian motion";
    let jname = format!("joint s={} t={}", v.joint_s, v.joint_t);
    match check_joint(model, alpha, v.joint_s, v.joint_t, &batch("joint", v.n, v.paths), v.bins, v.p_threshold) {
        Ok(j) => {
            let verdict = Verdict::combine([j.fit.verdict, j.split.verdict, j.split.a2_fit.verdict]);
            let inputs = serde_json::json!({ "s": j.s, "t": j.t, "n": j.n, "paths": v.paths, "bins": v.bins });
            report.push(CheckRecord::new(jname, JOINT, &inputs, &j, verdict));
        }
        Err(e) => precondition(&jname, JOINT, e, &mut report)?,
    }

    const TIGHT: &str = "zero visits and restarts are o(sqrt(n)); the rescaled paths are tight";
    match tightness_diagnostics(model, &v.tightness_n, &v.tightness_delta, &batch("tightness", 0, v.tightness_paths)) {
        Ok(t) => {
            let inputs = serde_json::json!({ "n_grid": v.tightness_n, "delta_grid": v.tightness_delta });
            report.push(CheckRecord::new("tightness", TIGHT, &inputs, &t, t.verdict));
        }
        Err(e) => precondition("tightness", TIGHT, e, &mut report)?,
    }

    w.json("verify.json", &report)?;
    for name in ["marginal", "joint"] {
        if let Some(rec) = report.checks.iter().find(|c| c.name.starts_with(name) && c.verdict != Verdict::NotApplicable) {
            let data = crate::plot::emit_plotdata(&report, &rec.name)?;
            w.put(&format!("plot_{name}.csv"), data.as_bytes())?;
        }
    }
    Ok(report)
}
