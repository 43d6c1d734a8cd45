//! Acceptance run: one PASS/FAIL line per criterion.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use skewalk::{run, Overrides, RunConfig};
use skewalk_core::lattice::*;
use skewalk_core::oracle::*;
use skewalk_core::sbm::quadrature::{integrate, integrate_pieces};
use skewalk_core::sbm::*;
use skewalk_core::verify::*;
use skewalk_core::walks::BatchConfig;

const NS: [usize; 4] = [512, 1024, 2048, 4096];
const X_GRID: [i64; 4] = [0, 1, 2, 5];

type Outcome = Result<(bool, String), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn pmf(atoms: &[(i64, f64)]) -> LatticePmf {
    LatticePmf::from_atoms(atoms).unwrap()
}

fn lazy() -> StepSpec {
    validate_step_spec(&pmf(&[(-1, 0.25), (0, 0.5), (1, 0.25)]), StepRole::Step).unwrap()
}

fn restart(atoms: &[(i64, f64)], role: StepRole) -> StepSpec {
    validate_step_spec(&pmf(atoms), role).unwrap()
}

fn y_model() -> WalkModel {
    WalkModel::new_y(lazy(), restart(&[(1, 1.0)], StepRole::RestartY)).unwrap()
}

fn x_model(eta: &[(i64, f64)]) -> WalkModel {
    WalkModel::new_x(lazy(), lazy(), restart(eta, StepRole::RestartX)).unwrap()
}

fn calibrated(xi: &StepSpec) -> (SideTables, BoundaryConvention) {
    let tables = SideTables::build(xi, &OracleParams::default(), true).unwrap();
    let cal = calibrate_convention(xi, &tables, &X_GRID, &NS, DpOptions::default()).unwrap();
    (tables, cal.convention)
}

/// Checks `got` against `want`, recording a line for any miss.
struct Ledger {
    misses: Vec<String>,
    count: usize,
}

impl Ledger {
    fn new() -> Self {
        Self { misses: vec![], count: 0 }
    }

    fn close(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        self.count += 1;
        if got.is_nan() || (got - want).abs() > tol {
            self.misses.push(format!("{what}: {got} vs {want}"));
        }
    }

    fn truth(&mut self, what: &str, ok: bool) {
        self.count += 1;
        if !ok {
            self.misses.push(what.into());
        }
    }

    fn outcome(self) -> Outcome {
        let ok = self.misses.is_empty();
        let detail = if ok { format!("{} values", self.count) } else { self.misses.join("; ") };
        Ok((ok, detail))
    }
}

fn exact_fixtures() -> Outcome {
    let mut l = Ledger::new();
    let xi = lazy();
    l.close("lazy variance", xi.variance, 0.5, 1e-12);
    l.truth("lazy span", xi.span_gcd == 1);
    let sq = convolve(&xi.pmf, &xi.pmf);
    for (v, p) in [(-2, 1.0 / 16.0), (-1, 0.25), (0, 0.375), (1, 0.25), (2, 1.0 / 16.0)] {
        l.close(&format!("lazy*lazy at {v}"), sq.prob(v), p, 1e-12);
    }
    let two = nth_convolution(&xi.pmf, 2, DEFAULT_SUPPORT_CAP).unwrap();
    l.close("P[S(2) >= 0]", two.prob_ge(0), 11.0 / 16.0, 1e-12);
    l.close("P[S(2) = 0]", two.prob(0), 3.0 / 8.0, 1e-12);
    let exact = ExactPmf::from_fractions(&[(-1, 1, 4), (0, 1, 2), (1, 1, 4)]).unwrap().nth_convolution(2);
    let eleven_sixteenths = ExactPmf::from_fractions(&[(0, 11, 16), (1, 5, 16)]).unwrap().prob(0);
    l.truth("exact P[S(2) >= 0] = 11/16", exact.prob_ge(0) == eleven_sixteenths);
    let bern = pmf(&[(-1, 0.5), (1, 0.5)]);
    let bb = convolve(&bern, &bern);
    for (v, p) in [(-2, 0.25), (0, 0.5), (2, 0.25)] {
        l.close(&format!("bernoulli*bernoulli at {v}"), bb.prob(v), p, 1e-12);
    }

    let neg = survival_dp(&xi, 0, 2, BoundaryConvention::new(KillRule::OnNegative, 0)).unwrap();
    l.close("on_negative P[tau > 1]", neg.survive[1], 0.75, 1e-12);
    l.close("on_negative P[tau > 2]", neg.survive[2], 0.625, 1e-12);
    let np = survival_dp(&xi, 0, 2, BoundaryConvention::new(KillRule::OnNonpositive, 0)).unwrap();
    l.close("on_nonpositive P[tau > 1]", np.survive[1], 0.25, 1e-12);
    l.close("on_nonpositive P[tau > 2]", np.survive[2], 3.0 / 16.0, 1e-12);
    let fp = first_passage_pmf(&np);
    l.close("on_nonpositive P[tau = 1]", fp[1], 0.75, 1e-12);
    l.close("on_nonpositive P[tau = 2]", fp[2], 1.0 / 16.0, 1e-12);

    let a = spitzer_terms(&xi.pmf, SpitzerSide::GeqZero, 2);
    l.close("a_1", a[0], 0.25, 1e-12);
    l.close("a_2", a[1], 3.0 / 32.0, 1e-12);

    let ladder = ladder_height_distribution(&xi, 1 << 16, DpOptions::default()).unwrap();
    l.truth("lazy ladder heights sit at -1", ladder.atoms().iter().all(|a| a.0 == -1));
    l.close("ladder mass + remainder", ladder.assigned_mass() + ladder.remainder_mass, 1.0, 1e-12);
    let h = renewal_function(&ladder, 8, 0.1, 0.05).unwrap();
    for x in 0..=8 {
        l.truth(&format!("h({x}) = x + 1 within bound"), (h.h(x) - (x + 1) as f64).abs() <= h.error_bound(x) + 1e-12);
    }

    let y = y_model();
    let r = return_time_pmf(&y, 3, DpOptions::default()).unwrap();
    l.close("Y P[tau1 = 1]", r.tau1_pmf[1], 0.0, 1e-12);
    l.close("Y P[tau1 = 2]", r.tau1_pmf[2], 0.25, 1e-12);
    l.close("Y P[tau1 = 3]", r.tau1_pmf[3], 0.125, 1e-12);
    l.close("Y P[tau1 > 2]", r.tail(2), 0.75, 1e-12);
    let g = green_potential(&r.tau1_pmf, 3);
    l.close("Sigma_0", g.sigma[0], 1.0, 1e-12);
    l.close("Sigma_1", g.sigma[1], 0.0, 1e-12);
    l.close("Sigma_2", g.sigma[2], 0.25, 1e-12);
    let unit = green_potential(&[0.0, 1.0], 20);
    l.truth("deterministic renewals give Sigma_n = 1", unit.sigma.iter().all(|&s| (s - 1.0).abs() < 1e-12));
    let q = 0.3;
    let xq = x_model(&[(-1, 0.35), (0, q), (1, 0.35)]);
    l.close("P[tau1 = 1] = P[eta = 0]", return_time_pmf(&xq, 4, DpOptions::default()).unwrap().tau1_pmf[1], q, 1e-12);

    let literal = BoundaryConvention::new(KillRule::OnNonpositive, 0);
    let p = OracleParams::default();
    let tables = SideTables::build(&xi, &p, true).unwrap();
    let c2 = c2_from_identity(tables.c1.value, tables.h_tilde.as_ref().unwrap(), &xi, literal).unwrap();
    let sum_err = tables.h_tilde.as_ref().unwrap().error_bound(1) / 4.0;
    l.close("lazy c2 = c1 (literal pairing)", c2 / tables.c1.value, 1.0, 4.0 * sum_err + 1e-12);
    let beta = 0.3;
    let rb = alpha_parameter(&x_model(&[(-1, 1.0 - beta), (1, beta)]), literal, &p).unwrap();
    l.close("alpha = beta for +-1 restarts", rb.alpha, beta, rb.alpha_error + 1e-12);
    let r35 = alpha_parameter(&x_model(&[(-1, 0.5), (2, 0.5)]), literal, &p).unwrap();
    l.close("alpha = 3/5 (literal pairing)", r35.alpha, 0.6, r35.alpha_error + 1e-12);
    let sym = alpha_parameter(&x_model(&[(-1, 0.5), (1, 0.5)]), literal, &p).unwrap();
    l.close("symmetric alpha", sym.alpha, 0.5, 1e-12);
    l.outcome()
}

fn harmonicity() -> Outcome {
    let xi = lazy();
    let ladder = ladder_height_distribution(&xi, 1_000_000, DpOptions::default()).map_err(|e| e.to_string())?;
    let table = renewal_function(&ladder, 64, 0.1, 0.05).map_err(|e| e.to_string())?;
    let (_, conv) = calibrated(&xi);
    let c = check_harmonicity(&xi.pmf, &table, conv, 50).map_err(|e| e.to_string())?;
    let ok = c.verdict.is_pass() && c.bound <= 1e-3;
    Ok((ok, format!("max residual {:.3e} <= bound {:.3e} (remainder {:.3e}) under {conv}", c.max_abs_residual, c.bound, c.remainder_mass)))
}

fn tail_laws() -> Outcome {
    let skew = validate_step_spec_with(&pmf(&[(-2, 1.0 / 3.0), (1, 2.0 / 3.0)]), StepRole::Step, Aperiodicity::TailOnly)
        .map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut parts = vec![];
    for (name, xi) in [("lazy", lazy()), ("{-2,+1}", skew)] {
        let (tables, conv) = calibrated(&xi);
        let side = WalkSide { xi: &xi, tables: &tables, convention: conv };
        let checks = check_tail(side, &X_GRID, &NS, 0.02, DpOptions::default()).map_err(|e| e.to_string())?;
        let limits: Vec<String> = checks.iter().map(|c| format!("{:.4}", c.ratio.extrapolated_limit)).collect();
        ok &= checks.iter().all(|c| c.ratio.verdict.is_pass());
        parts.push(format!("{name} [{conv}] limits {}", limits.join(" ")));
    }
    Ok((ok, parts.join("; ")))
}

fn local_laws() -> Outcome {
    let xi = lazy();
    let (tables, conv) = calibrated(&xi);
    let side = WalkSide { xi: &xi, tables: &tables, convention: conv };
    let mut ok = true;
    let mut parts = vec![];
    for x in [1, 2] {
        let l = check_local(side, x, &[0, 1, 2, 3], &NS, &LocalTolerances::default(), DpOptions::default())
            .map_err(|e| e.to_string())?;
        ok &= l.local.iter().all(|(_, r)| r.verdict.is_pass());
        ok &= l.first_passage.verdict.is_pass() && l.c2_verdict.is_pass();
        let worst = l.local.iter().map(|(_, r)| (r.extrapolated_limit - 1.0).abs()).fold(0.0, f64::max);
        parts.push(format!(
            "x={x}: worst local |r-1| {worst:.4}, first passage {:.4}, c2 fit {:.4} vs identity {:.4} (gap {:.2}%)",
            l.first_passage.extrapolated_limit,
            l.c2_fit,
            l.c2_identity,
            100.0 * l.c2_gap
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn green_potential_law() -> Outcome {
    let xi = lazy();
    let (_, conv) = calibrated(&xi);
    let chain = conv.for_chain().ok_or("no chain convention")?;
    let y = y_model();
    let report = alpha_parameter(&y, chain, &OracleParams::default()).map_err(|e| e.to_string())?;
    let r = check_return_times(&y, &report, &NS, &ReturnTolerances::default(), DpOptions::default())
        .map_err(|e| e.to_string())?;
    Ok((
        r.green.verdict.is_pass(),
        format!("sqrt(n) Sigma_n c1 pi E[h(gamma)] -> {:.5} (tol 0.03)", r.green.extrapolated_limit),
    ))
}

fn batch(seed: u64) -> BatchConfig {
    BatchConfig { paths: 100_000, n: 2048, seed, chunk_size: 1000 }
}

fn reflected_marginal() -> Outcome {
    let m = check_marginal(&y_model(), 1.0, 0.5, &batch(61), &MarginalTolerances::default()).map_err(|e| e.to_string())?;
    Ok((
        m.fit.verdict.is_pass(),
        format!("KS {:.4} (continuity-corrected; raw {:.4}) <= 0.02", m.fit.statistic, m.raw_ks),
    ))
}

fn chain_alpha(model: &WalkModel) -> Result<f64, String> {
    let (_, conv) = calibrated(&lazy());
    let chain = conv.for_chain().ok_or("no chain convention")?;
    Ok(alpha_parameter(model, chain, &OracleParams::default()).map_err(|e| e.to_string())?.alpha)
}

fn skew_marginals() -> Outcome {
    let mut ok = true;
    let mut parts = vec![];
    for (name, eta, seed) in [("symmetric", [(-1, 0.5), (1, 0.5)], 71), ("eta {+2,-1}", [(-1, 0.5), (2, 0.5)], 72)] {
        let model = x_model(&eta);
        let alpha = chain_alpha(&model)?;
        let m = check_marginal(&model, alpha, 0.5, &batch(seed), &MarginalTolerances::default())
            .map_err(|e| e.to_string())?;
        ok &= m.fit.verdict.is_pass() && m.sign.verdict.is_pass();
        parts.push(format!(
            "{name}: alpha {alpha:.4}, KS {:.4}, sign frequency {:.4}",
            m.fit.statistic, m.sign.frequency
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn two_time_law() -> Outcome {
    let mut ok = true;
    let mut parts = vec![];
    let skew = x_model(&[(-1, 0.5), (2, 0.5)]);
    let skew_alpha = chain_alpha(&skew)?;
    for (name, model, alpha, seed) in [("reflected", y_model(), 1.0, 81), ("eta {+2,-1}", skew, skew_alpha, 82)] {
        let j = check_joint(&model, alpha, 0.25, 0.75, &batch(seed), 8, 1e-3).map_err(|e| e.to_string())?;
        ok &= j.fit.verdict.is_pass() && j.split.verdict.is_pass();
        parts.push(format!(
            "{name}: chi2 {:.1} p {:.2e}; returning {:.4} vs A1 mass {:.4} (z {:.1}); no-return p {:.2e}",
            j.fit.statistic,
            j.fit.p_value_or_bound,
            j.split.returning_fraction,
            j.split.a1_mass,
            j.split.z,
            j.split.a2_fit.p_value_or_bound
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn closed_forms() -> Outcome {
    let mut imck: f64 = 0.0;
    for i in 0..5 {
        for j in 0..5 {
            let a = 10f64.powf(-1.0 + 0.5 * i as f64);
            let b = 10f64.powf(-1.0 + 0.5 * j as f64);
            let d = (imck_identity(a, b).map_err(|e| e.to_string())? - imck_quadrature(a, b).map_err(|e| e.to_string())?).abs();
            imck = imck.max(d);
        }
    }
    let dens = |alpha: f64, t: f64, x: f64, y: f64| skew_transition_density(SkewParams { alpha, t, x, y }).unwrap();
    let span = |x: f64, t: f64| {
        let r = TRUNCATION_SD * t.sqrt();
        [x.min(0.0) - r, 0.0, x.max(0.0) + r]
    };
    let mut norm: f64 = 0.0;
    for alpha in [0.0, 0.3, 0.5, 0.7, 1.0] {
        for x in [-2.0, 0.0, 2.0] {
            for t in [0.25, 1.0, 4.0] {
                let q = integrate_pieces(|y| dens(alpha, t, x, y), &span(x, t), QUAD_TOL).value;
                norm = norm.max((q - 1.0).abs());
            }
        }
    }
    let mut ck: f64 = 0.0;
    for alpha in [0.2, 0.5, 0.85, 1.0] {
        let (s, t) = (0.4, 1.0);
        for y in [-1.5, -0.3, 0.2, 0.9, 2.2] {
            let q = integrate_pieces(|z| dens(alpha, s, 0.0, z) * dens(alpha, t - s, z, y), &span(0.0, t), QUAD_TOL);
            ck = ck.max((q.value - dens(alpha, t, 0.0, y)).abs());
        }
    }
    let double = |f: &dyn Fn(f64, f64) -> f64, s: f64, t: f64| {
        let (rs, rt) = (TRUNCATION_SD * s.sqrt(), TRUNCATION_SD * t.sqrt());
        integrate_pieces(
            |v| {
                let mut b = [-rt, 0.0, v, rt];
                b.sort_by(f64::total_cmp);
                integrate_pieces(|u| f(v, u), &b, 1e-12).value
            },
            &[-rs, 0.0, rs],
            1e-10,
        )
        .value
    };
    let phi1 = |u: f64| (-u).exp();
    let (s, t) = (0.35, 1.0);
    let kern = double(&|v, u| phi1(v) * phi1(u) * (a1_kernel(1.0, s, t, v, u).unwrap() + a2_kernel(1.0, s, t, v, u).unwrap()), s, t);
    let joint = double(&|v, u| phi1(v) * phi1(u) * joint_density_from_zero(1.0, s, t, v, u).unwrap(), s, t);
    let split = (kern - joint).abs();
    let mid = integrate(|v| excursion_marginal(0.0, 0.5, 1.0, v).unwrap(), 0.0, 12.0, QUAD_TOL).value;
    let ok = imck <= 1e-8 && norm <= 1e-8 && ck <= 1e-6 && split <= 1e-6 && (mid - 1.0).abs() <= 1e-8;
    Ok((
        ok,
        format!("IMcK {imck:.1e}, normalization {norm:.1e}, Chapman-Kolmogorov {ck:.1e}, A1+A2 vs reflected {split:.1e}"),
    ))
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/lazy-x-skew.cfg");
    let go = |dir: &str, threads: usize| -> Result<BTreeMap<String, Vec<u8>>, String> {
        let out = tmp.path().join(dir);
        let o = Overrides { threads: Some(threads), out: Some(out.clone()), ..Default::default() };
        run(&RunConfig::from_file(&cfg, &o).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        Ok(files(&out))
    };
    let a = go("a", 4)?;
    let b = go("b", 4)?;
    let c = go("c", 1)?;
    let ok = a == b && a == c && a.contains_key("verify.json");
    let bytes: usize = a.values().map(|v| v.len()).sum();
    Ok((ok, format!("{} files, {bytes} bytes identical across two runs and 1 vs 4 workers", a.len())))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("exact enumeration fixtures", exact_fixtures),
        ("harmonicity of h", harmonicity),
        ("first-passage tail law", tail_laws),
        ("local limits and c2", local_laws),
        ("Green potential", green_potential_law),
        ("reflected marginal", reflected_marginal),
        ("skew marginals and alpha", skew_marginals),
        ("two-time law", two_time_law),
        ("closed-form identities", closed_forms),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !filter.is_empty() && !filter.iter().any(|s| s == &id.to_string()) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        let (ok, detail) = match outcome {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!("{} {id:>2} {name}: {detail} [{secs:.1}s]", if ok { "PASS" } else { "FAIL" });
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
