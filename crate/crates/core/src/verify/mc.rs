use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::stats::{chi_square, kolmogorov_p_value, ks_lattice, ks_statistic, pool_small_cells};
use super::{FitTest, Verdict, VerifyError};
use crate::lattice::{ModelKind, WalkModel};
use crate::sbm::quadrature::integrate_pieces;
use crate::sbm::{gauss, phi, skew_cdf, skew_density, skew_marginal_quantile, TRUNCATION_SD};
use crate::walks::{interpolate, map_paths, scale_value, zero_visit_stats, BatchConfig};

/// Integer lattice index `t·n` when it is exact.
fn lattice_index(t: f64, n: usize) -> Option<usize> {
    let k = t * n as f64;
    (k.fract() == 0.0).then_some(k as usize)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignTest {
    /// Fraction of paths with `X_n(t) > 0`.
    pub frequency: f64,
    pub target: f64,
    pub std_error: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalCheck {
    pub t: f64,
    pub n: usize,
    pub alpha: f64,
    /// Kolmogorov distance, continuity-corrected when `X_n(t)` is lattice valued.
    pub fit: FitTest,
    pub raw_ks: f64,
    pub sign: SignTest,
    /// Unscaled lattice values and their counts (empty when interpolated).
    pub counts: Vec<(i64, u64)>,
    pub sigma: f64,
    pub sigma_prime: f64,
}

pub struct MarginalTolerances {
    pub ks: f64,
    pub sign: f64,
}

impl Default for MarginalTolerances {
    fn default() -> Self {
        Self { ks: 0.02, sign: 0.02 }
    }
}

/// Law of `X_n(t)` against the skew marginal from 0 with parameter `alpha`
/// (the half-normal law when `alpha = 1`).
pub fn check_marginal(
    model: &WalkModel,
    alpha: f64,
    t: f64,
    cfg: &BatchConfig,
    tol: &MarginalTolerances,
) -> Result<MarginalCheck, VerifyError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(VerifyError::InvalidInput(format!("time {t} outside [0, 1]")));
    }
    if model.kind == ModelKind::Y && alpha != 1.0 {
        return Err(VerifyError::InvalidInput("the one-sided chain has alpha = 1".into()));
    }
    let (sigma, sigma_prime) = (model.sigma(), model.sigma_prime());
    let name = format!("marginal t={t}");
    if t == 0.0 {
        let na = |v: f64| FitTest::not_applicable(&name, "ks_corrected", cfg.paths, v);
        return Ok(MarginalCheck {
            t,
            n: cfg.n,
            alpha,
            fit: na(tol.ks),
            raw_ks: f64::NAN,
            sign: SignTest {
                frequency: f64::NAN,
                target: alpha,
                std_error: f64::NAN,
                tolerance: tol.sign,
                verdict: Verdict::NotApplicable,
            },
            counts: vec![],
            sigma,
            sigma_prime,
        });
    }
    if cfg.n < 512 || cfg.paths < 10_000 {
        return Err(VerifyError::InvalidInput("marginal check needs n >= 512 and at least 10^4 paths".into()));
    }
    let n = cfg.n;
    let scale = |v: f64| scale_value(v, n, sigma, sigma_prime);
    let cdf = |u: f64| skew_cdf(alpha, t, 0.0, u);
    let (corrected, raw, counts, positive) = match lattice_index(t, n) {
        Some(k) => {
            let sim = BatchConfig { n: k, ..*cfg };
            let values = map_paths(model, &sim, |p| p.values[k]);
            let mut counts = BTreeMap::new();
            for &v in &values {
                *counts.entry(v).or_insert(0u64) += 1;
            }
            let positive = values.iter().filter(|&&v| v > 0).count();
            let ks = ks_lattice(&counts, scale, cdf);
            (ks.corrected, ks.raw, counts.into_iter().collect(), positive)
        }
        None => {
            let s = t * n as f64;
            let sim = BatchConfig { n: s.ceil() as usize, ..*cfg };
            let mut values = map_paths(model, &sim, |p| scale(interpolate(&p.values, s)));
            values.sort_by(f64::total_cmp);
            let positive = values.iter().filter(|&&v| v > 0.0).count();
            let d = ks_statistic(&values, cdf);
            (d, d, vec![], positive)
        }
    };
    let paths = cfg.paths as f64;
    let frequency = positive as f64 / paths;
    let std_error = (alpha * (1.0 - alpha) / paths).sqrt();
    Ok(MarginalCheck {
        t,
        n,
        alpha,
        fit: FitTest {
            name,
            statistic_name: if counts.is_empty() { "ks" } else { "ks_corrected" }.into(),
            statistic: corrected,
            sample_size: cfg.paths,
            threshold: tol.ks,
            p_value_or_bound: kolmogorov_p_value(corrected, cfg.paths),
            verdict: Verdict::from_bool(corrected <= tol.ks),
        },
        raw_ks: raw,
        sign: SignTest {
            frequency,
            target: alpha,
            std_error,
            tolerance: tol.sign,
            verdict: Verdict::from_bool((frequency - alpha).abs() <= tol.sign),
        },
        counts,
        sigma,
        sigma_prime,
    })
}

/// Lattice-aware binning of the pair `(X_n(s), X_n(t))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointBins {
    /// Row edges in the `s` coordinate, `bins + 1` values with infinite ends.
    pub rows: Vec<f64>,
    /// Column edges in the `t` coordinate, per row.
    pub columns: Vec<Vec<f64>>,
}

impl JointBins {
    fn locate(edges: &[f64], x: f64) -> usize {
        edges[1..edges.len() - 1].partition_point(|&e| e < x)
    }

    pub fn cell(&self, v: f64, u: f64) -> usize {
        let i = Self::locate(&self.rows, v);
        let k = Self::locate(&self.columns[i], u);
        i * (self.rows.len() - 1) + k
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitCheck {
    /// Fraction of paths with a zero in `(ns, nt]`.
    pub returning_fraction: f64,
    /// Total mass of the returning kernel.
    pub a1_mass: f64,
    pub std_error: f64,
    /// Distance in standard errors.
    pub z: f64,
    pub verdict: Verdict,
    /// Shape of the non-returning pairs against the killed kernel.
    pub a2_fit: FitTest,
    pub a2_pooled_cells: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointCheck {
    pub s: f64,
    pub t: f64,
    pub n: usize,
    pub alpha: f64,
    pub fit: FitTest,
    pub bins: JointBins,
    pub observed: Vec<u64>,
    pub expected: Vec<f64>,
    pub split: SplitCheck,
}

/// Everything the joint check needs from the reference law.
struct Reference {
    alpha: f64,
    s: f64,
    dt: f64,
}

impl Reference {
    fn range(&self, lo: f64, hi: f64) -> Vec<f64> {
        let r = TRUNCATION_SD * self.s.sqrt();
        let (lo, hi) = (lo.max(-r), hi.min(r));
        let mut b = vec![lo];
        if lo < 0.0 && 0.0 < hi {
            b.push(0.0);
        }
        b.push(hi);
        b
    }

    fn row_mass(&self, lo: f64, hi: f64) -> f64 {
        if lo >= hi {
            return 0.0;
        }
        integrate_pieces(|v| skew_density(self.alpha, self.s, 0.0, v), &self.range(lo, hi), 1e-12).value
    }

    /// `P[B_s ∈ (lo, hi], B_t <= c]`.
    fn row_cdf(&self, lo: f64, hi: f64, c: f64) -> f64 {
        if lo >= hi {
            return 0.0;
        }
        let f = |v: f64| skew_density(self.alpha, self.s, 0.0, v) * skew_cdf(self.alpha, self.dt, v, c);
        integrate_pieces(f, &self.range(lo, hi), 1e-12).value
    }

    fn cell(&self, lo: f64, hi: f64, c: f64, d: f64) -> f64 {
        if lo >= hi {
            return 0.0;
        }
        let f = |v: f64| {
            skew_density(self.alpha, self.s, 0.0, v)
                * (skew_cdf(self.alpha, self.dt, v, d) - skew_cdf(self.alpha, self.dt, v, c))
        };
        integrate_pieces(f, &self.range(lo, hi), 1e-12).value
    }

    /// Mass of the no-return kernel with `v ∈ (lo, hi]`, `u ∈ (c, d]`.
    fn a2_cell(&self, lo: f64, hi: f64, c: f64, d: f64) -> f64 {
        if lo >= hi {
            return 0.0;
        }
        let f = |v: f64| {
            let w = if v >= 0.0 { self.alpha } else { 1.0 - self.alpha };
            2.0 * w * gauss(self.s, v) * (killed_cdf(self.dt, v, d) - killed_cdf(self.dt, v, c))
        };
        integrate_pieces(f, &self.range(lo, hi), 1e-12).value
    }

    fn a1_mass(&self) -> f64 {
        let r = self.dt.sqrt();
        // ∫ a1(v, u) du collapses to 4 w(v) p_s(v) Φ(-|v|/√(t-s)).
        let g = |v: f64| {
            let w = if v >= 0.0 { self.alpha } else { 1.0 - self.alpha };
            4.0 * w * gauss(self.s, v) * phi(-v.abs() / r)
        };
        integrate_pieces(g, &self.range(f64::NEG_INFINITY, f64::INFINITY), 1e-12).value
    }
}

/// `∫_{-∞}^{c} (p(u - v) - p(u + v)) 1{sign u = sign v} du` over the time `dt`:
/// the law of a path from `v` killed at zero.
fn killed_cdf(dt: f64, v: f64, c: f64) -> f64 {
    let r = dt.sqrt();
    if v > 0.0 {
        if c <= 0.0 {
            return 0.0;
        }
        (phi((c - v) / r) - phi(-v / r)) - (phi((c + v) / r) - phi(v / r))
    } else if v < 0.0 {
        let a = -v;
        let m = (-c).max(0.0);
        // Mass on u ∈ (-∞, min(c, 0)] is the part with |u| >= m.
        phi((m + a) / r) - phi((m - a) / r)
    } else {
        0.0
    }
}

/// Snaps a scaled edge to the nearest half-lattice point below it (in
/// absolute value), so that no lattice value sits on an edge.
fn snap(e: f64, n: usize, sigma: f64, sigma_prime: f64) -> f64 {
    if !e.is_finite() {
        return e;
    }
    let rn = (n as f64).sqrt();
    if e >= 0.0 {
        ((e * sigma * rn).floor() + 0.5) / (sigma * rn)
    } else {
        -(((-e) * sigma_prime * rn).floor() + 0.5) / (sigma_prime * rn)
    }
}

fn bisect<F: Fn(f64) -> f64>(f: F, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn build_bins(reference: &Reference, t: f64, bins: usize, n: usize, sigma: f64, sigma_prime: f64) -> JointBins {
    let (alpha, s) = (reference.alpha, reference.s);
    let mut rows = vec![f64::NEG_INFINITY];
    for i in 1..bins {
        rows.push(snap(skew_marginal_quantile(alpha, s, i as f64 / bins as f64), n, sigma, sigma_prime));
    }
    rows.push(f64::INFINITY);
    let span = TRUNCATION_SD * t.sqrt();
    let columns = rows
        .windows(2)
        .map(|w| {
            let (lo, hi) = (w[0], w[1]);
            let mass = reference.row_mass(lo, hi);
            let mut edges = vec![f64::NEG_INFINITY];
            for k in 1..bins {
                let target = mass * k as f64 / bins as f64;
                let c = bisect(|c| reference.row_cdf(lo, hi, c), target, -span, span);
                edges.push(snap(c, n, sigma, sigma_prime));
            }
            edges.push(f64::INFINITY);
            edges
        })
        .collect();
    JointBins { rows, columns }
}

/// Joint law of `(X_n(s), X_n(t))` against the skew two-time law, and the
/// split by whether the path visits zero in `(ns, nt]`.
pub fn check_joint(
    model: &WalkModel,
    alpha: f64,
    s: f64,
    t: f64,
    cfg: &BatchConfig,
    bins: usize,
    p_threshold: f64,
) -> Result<JointCheck, VerifyError> {
    if !(0.0 < s && s < t && t <= 1.0) {
        return Err(VerifyError::InvalidInput(format!("need 0 < s < t <= 1, got s={s}, t={t}")));
    }
    if bins < 4 {
        return Err(VerifyError::InvalidInput("need at least 4 bins per axis".into()));
    }
    let n = cfg.n;
    let (sigma, sigma_prime) = (model.sigma(), model.sigma_prime());
    let reference = Reference { alpha, s, dt: t - s };
    let grid = build_bins(&reference, t, bins, n, sigma, sigma_prime);

    let cells = bins * bins;
    let mut expected = vec![0.0; cells];
    let mut a2_expected = vec![0.0; cells];
    for i in 0..bins {
        let (lo, hi) = (grid.rows[i], grid.rows[i + 1]);
        for k in 0..bins {
            let (c, d) = (grid.columns[i][k], grid.columns[i][k + 1]);
            expected[i * bins + k] = reference.cell(lo, hi, c, d);
            a2_expected[i * bins + k] = reference.a2_cell(lo, hi, c, d);
        }
    }

    let (ss, ts) = (s * n as f64, t * n as f64);
    let sim = BatchConfig { n: ts.ceil() as usize, ..*cfg };
    let scale = |v: f64| scale_value(v, n, sigma, sigma_prime);
    let pairs = map_paths(model, &sim, |p| {
        let v = scale(interpolate(&p.values, ss));
        let u = scale(interpolate(&p.values, ts));
        let returned = p.return_times.iter().any(|&r| r as f64 > ss.floor() && r as f64 <= ts.floor());
        (grid.cell(v, u), returned)
    });
    let mut observed = vec![0u64; cells];
    let mut a2_observed = vec![0u64; cells];
    let mut returning = 0u64;
    for &(c, ret) in &pairs {
        observed[c] += 1;
        if ret {
            returning += 1;
        } else {
            a2_observed[c] += 1;
        }
    }
    let paths = cfg.paths as f64;
    let exp_counts: Vec<f64> = expected.iter().map(|p| p * paths).collect();
    let min_expected = exp_counts.iter().copied().fold(f64::INFINITY, f64::min);
    if min_expected < 5.0 {
        return Err(VerifyError::InsufficientCounts { min_expected });
    }
    let chi = chi_square(&observed, &exp_counts, 0);

    let a1_mass = reference.a1_mass();
    let returning_fraction = returning as f64 / paths;
    let std_error = (a1_mass * (1.0 - a1_mass) / paths).sqrt();
    let z = (returning_fraction - a1_mass) / std_error;
    let kept = (cfg.paths as u64 - returning) as f64;
    let a2_mass: f64 = a2_expected.iter().sum();
    let a2_counts: Vec<f64> = a2_expected.iter().map(|p| p / a2_mass * kept).collect();
    let (po, pe) = pool_small_cells(&a2_observed, &a2_counts, 5.0);
    let pooled = a2_counts.iter().filter(|&&e| e < 5.0).count();
    let a2_chi = chi_square(&po, &pe, 0);

    Ok(JointCheck {
        s,
        t,
        n,
        alpha,
        fit: FitTest {
            name: format!("joint s={s} t={t}"),
            statistic_name: "chi_square".into(),
            statistic: chi.statistic,
            sample_size: cfg.paths,
            threshold: p_threshold,
            p_value_or_bound: chi.p_value,
            verdict: Verdict::from_bool(chi.p_value > p_threshold),
        },
        bins: grid,
        observed,
        expected: exp_counts,
        split: SplitCheck {
            returning_fraction,
            a1_mass,
            std_error,
            z,
            verdict: Verdict::from_bool(z.abs() <= 3.0),
            a2_fit: FitTest {
                name: format!("joint no-return s={s} t={t}"),
                statistic_name: "chi_square".into(),
                statistic: a2_chi.statistic,
                sample_size: kept as usize,
                threshold: p_threshold,
                p_value_or_bound: a2_chi.p_value,
                verdict: Verdict::from_bool(a2_chi.p_value > p_threshold),
            },
            a2_pooled_cells: pooled,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TightnessRow {
    pub n: usize,
    /// `E[N_n]/√n`.
    pub visits: f64,
    /// `E[max restart]/√n`.
    pub max_restart: f64,
    /// Median and 90% quantile of the scaled modulus, one pair per `δ`.
    pub modulus: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TightnessReport {
    pub delta_grid: Vec<f64>,
    pub rows: Vec<TightnessRow>,
    /// Largest over smallest `E[N_n]/√n`.
    pub visits_spread: f64,
    pub restart_decreasing: bool,
    pub zero_delta_vanishes: bool,
    pub verdict: Verdict,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let i = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[i]
}

pub fn tightness_diagnostics(
    model: &WalkModel,
    n_grid: &[usize],
    delta_grid: &[f64],
    cfg: &BatchConfig,
) -> Result<TightnessReport, VerifyError> {
    if cfg.paths < 1000 || n_grid.is_empty() {
        return Err(VerifyError::InvalidInput("tightness needs at least 10^3 paths and an n grid".into()));
    }
    let scale = model.sigma().min(model.sigma_prime());
    let mut rows = Vec::new();
    for &n in n_grid {
        let sim = BatchConfig { n, ..*cfg };
        let stats = map_paths(model, &sim, |p| {
            let per_delta: Vec<_> = delta_grid.iter().map(|&d| zero_visit_stats(p, n, d)).collect();
            per_delta
        });
        let rn = (n as f64).sqrt();
        let paths = stats.len() as f64;
        let mut visits = 0.0;
        let mut restart = 0.0;
        let mut moduli = vec![Vec::with_capacity(stats.len()); delta_grid.len()];
        for per in stats {
            let per: Vec<_> = per.into_iter().collect::<Result<_, _>>()?;
            if let Some(first) = per.first() {
                visits += first.n_n as f64;
                restart += first.max_restart_abs as f64;
            }
            for (j, z) in per.iter().enumerate() {
                moduli[j].push(z.max_increment_window / (scale * rn));
            }
        }
        let modulus = moduli
            .iter_mut()
            .map(|m| {
                m.sort_by(f64::total_cmp);
                (quantile(m, 0.5), quantile(m, 0.9))
            })
            .collect();
        rows.push(TightnessRow { n, visits: visits / paths / rn, max_restart: restart / paths / rn, modulus });
    }
    let (lo, hi) = rows.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r.visits), hi.max(r.visits)));
    let visits_spread = hi / lo;
    let restart_decreasing = rows.len() < 2 || rows.last().unwrap().max_restart < rows[0].max_restart;
    let zero_delta_vanishes = delta_grid
        .iter()
        .enumerate()
        .filter(|(_, &d)| d == 0.0)
        .all(|(j, _)| rows.iter().all(|r| r.modulus[j] == (0.0, 0.0)));
    let ok = visits_spread < 2.0 && restart_decreasing && zero_delta_vanishes;
    Ok(TightnessReport {
        delta_grid: delta_grid.to_vec(),
        rows,
        visits_spread,
        restart_decreasing,
        zero_delta_vanishes,
        verdict: Verdict::from_bool(ok),
    })
}
