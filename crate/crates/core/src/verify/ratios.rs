use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{RatioCheck, Verdict, VerifyError};
use crate::lattice::{LatticePmf, StepSpec, WalkModel};
use crate::oracle::{
    c2_from_identity, green_potential, harmonicity_bound_constant, return_time_pmf, survival_dp_with,
    BoundaryConvention, ConstantsReport, DpOptions, LocalRecording, OracleError, RenewalTable, SideTables,
};

/// One step law with its oracle tables and the convention they are read under.
#[derive(Clone, Copy, Debug)]
pub struct WalkSide<'a> {
    pub xi: &'a StepSpec,
    pub tables: &'a SideTables,
    pub convention: BoundaryConvention,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailCheck {
    pub x: i64,
    pub ratio: RatioCheck,
    /// `sup_{1 <= n <= N} √n P[τ(x) > n] / (c₁ h(x))`.
    pub envelope_observed: f64,
    /// Supremum of the observed ratios continued past `N` by the fitted
    /// `r∞ + b n^{-1/2}`; this is `max(envelope_observed, r∞)`.
    pub envelope: f64,
}

/// `√n P[τ(x) > n] / (c₁ h(x))` for every `x` of the grid.
pub fn check_tail(
    side: WalkSide<'_>,
    x_grid: &[i64],
    n_grid: &[usize],
    tolerance: f64,
    opts: DpOptions,
) -> Result<Vec<TailCheck>, VerifyError> {
    let horizon = grid_max(n_grid)?;
    let c1 = side.tables.c1.value;
    x_grid
        .par_iter()
        .map(|&x| {
            let h = side.convention.h(&side.tables.h, x);
            if side.tables.h.try_h(x - side.convention.h_shift as i64)? <= 0.0 {
                return Err(VerifyError::InvalidInput(format!("h vanishes at x = {x} under {}", side.convention)));
            }
            let t = survival_dp_with(&side.xi.pmf, x, horizon, side.convention, opts, &LocalRecording::None)?;
            let ratio_at = |n: usize| (n as f64).sqrt() * t.survive[n] / (c1 * h);
            let raw = n_grid.iter().map(|&n| ratio_at(n)).collect();
            let envelope_observed = (1..=horizon).map(ratio_at).fold(0.0, f64::max);
            let ratio = RatioCheck::new(format!("tail x={x}"), n_grid, raw, tolerance);
            let envelope = envelope_observed.max(ratio.extrapolated_limit);
            Ok(TailCheck { x, ratio, envelope_observed, envelope })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalCheck {
    pub x: i64,
    /// `n^{3/2} P[τ(x) > n, x + S(n) = y] / (c₂ h(x) h̃(y))`, one per `y`.
    pub local: Vec<(i64, RatioCheck)>,
    /// `n^{3/2} P[τ(x) = n] / ((c₁/2) h(x))`.
    pub first_passage: RatioCheck,
    /// Mean over `y` of the extrapolated `n^{3/2} P[τ > n, y] / (h(x) h̃(y))`.
    pub c2_fit: f64,
    pub c2_identity: f64,
    pub c2_gap: f64,
    pub c2_tolerance: f64,
    pub c2_verdict: Verdict,
    /// Largest relative gap between `P[τ = n+1]` and `Σ_y P[τ > n, y] P[y + ξ killed]`.
    pub reaggregation_gap: f64,
    pub reaggregation_tolerance: f64,
    pub reaggregation_verdict: Verdict,
}

pub struct LocalTolerances {
    pub ratio: f64,
    pub c2: f64,
    pub reaggregation: f64,
}

impl Default for LocalTolerances {
    fn default() -> Self {
        Self { ratio: 0.05, c2: 0.03, reaggregation: 0.01 }
    }
}

pub fn check_local(
    side: WalkSide<'_>,
    x: i64,
    y_grid: &[i64],
    n_grid: &[usize],
    tol: &LocalTolerances,
    opts: DpOptions,
) -> Result<LocalCheck, VerifyError> {
    if side.xi.span_gcd != 1 {
        return Err(OracleError::Periodic(side.xi.span_gcd).into());
    }
    let horizon = grid_max(n_grid)? + 1;
    let conv = side.convention;
    let h_tilde = side
        .tables
        .h_tilde
        .as_ref()
        .ok_or_else(|| VerifyError::InvalidInput("local check needs the h-tilde table".into()))?;
    let c1 = side.tables.c1.value;
    let c2_identity = c2_from_identity(c1, h_tilde, side.xi, conv)?;
    let hx = conv.h(&side.tables.h, x);
    side.tables.h.try_h(x - conv.h_shift as i64)?;
    let record = LocalRecording::At(n_grid.to_vec());
    let t = survival_dp_with(&side.xi.pmf, x, horizon, conv, opts, &record)?;
    let n15 = |n: usize| (n as f64).powf(1.5);

    let mut local = Vec::new();
    let mut fits = Vec::new();
    for &y in y_grid {
        h_tilde.try_h(y - conv.h_shift as i64)?;
        let hy = conv.h(h_tilde, y);
        if hy <= 0.0 || hx <= 0.0 {
            return Err(VerifyError::InvalidInput(format!("h or h-tilde vanishes at ({x}, {y})")));
        }
        let raw_fit: Vec<f64> = n_grid.iter().map(|&n| n15(n) * t.local(n, y).unwrap_or(0.0) / (hx * hy)).collect();
        fits.push(crate::extrapolate::richardson(n_grid, &raw_fit).limit);
        let raw = raw_fit.iter().map(|r| r / c2_identity).collect();
        local.push((y, RatioCheck::new(format!("local x={x} y={y}"), n_grid, raw, tol.ratio)));
    }
    let fp_raw = n_grid.iter().map(|&n| n15(n) * t.first_passage[n] / (0.5 * c1 * hx)).collect();
    let first_passage = RatioCheck::new(format!("first passage x={x}"), n_grid, fp_raw, tol.ratio);

    let floor = conv.floor();
    let exit = |y: i64| -> f64 { side.xi.pmf.atoms().filter(|&(v, _)| y + v < floor).map(|(_, p)| p).sum() };
    let mut reaggregation_gap: f64 = 0.0;
    for &n in n_grid {
        let row = &t.local[&n];
        let sum: f64 = row
            .probs
            .iter()
            .enumerate()
            .map(|(i, &p)| p * exit(row.min_position + i as i64))
            .sum();
        let exact = t.first_passage[n + 1];
        reaggregation_gap = reaggregation_gap.max(((sum - exact) / exact).abs());
    }

    let c2_fit = fits.iter().sum::<f64>() / fits.len().max(1) as f64;
    let c2_gap = ((c2_fit - c2_identity) / c2_identity).abs();
    Ok(LocalCheck {
        x,
        local,
        first_passage,
        c2_fit,
        c2_identity,
        c2_gap,
        c2_tolerance: tol.c2,
        c2_verdict: Verdict::from_bool(c2_gap <= tol.c2),
        reaggregation_gap,
        reaggregation_tolerance: tol.reaggregation,
        reaggregation_verdict: Verdict::from_bool(reaggregation_gap <= tol.reaggregation),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReturnTimeCheck {
    /// `√n P[τ₁ > n] / K`, `K` the tail constant of the report.
    pub tail: RatioCheck,
    /// `n^{3/2} P[τ₁ = n] / (K/2)`.
    pub local: RatioCheck,
    /// `√n Σₙ · π K`.
    pub green: RatioCheck,
    /// `P[τ₁ > n, restart > 0] / (α P[τ₁ > n])`.
    pub alpha: RatioCheck,
    /// `P[τ₁ = 1]`, the restart mass at zero.
    pub tau1_at_one: f64,
    pub tau1_pmf: Vec<f64>,
    pub sigma: Vec<f64>,
}

pub struct ReturnTolerances {
    pub tail: f64,
    pub local: f64,
    pub green: f64,
    pub alpha: f64,
}

impl Default for ReturnTolerances {
    fn default() -> Self {
        Self { tail: 0.02, local: 0.05, green: 0.03, alpha: 0.02 }
    }
}

/// Return-time ratios of the zero-restarted chain. `report` must be computed
/// under the chain convention.
pub fn check_return_times(
    model: &WalkModel,
    report: &ConstantsReport,
    n_grid: &[usize],
    tol: &ReturnTolerances,
    opts: DpOptions,
) -> Result<ReturnTimeCheck, VerifyError> {
    let horizon = grid_max(n_grid)?;
    let table = return_time_pmf(model, horizon, opts)?;
    let green = green_potential(&table.tau1_pmf, horizon);
    let k = report.tail_constant;
    let rt = |n: usize| (n as f64).sqrt();
    let tail = n_grid.iter().map(|&n| rt(n) * table.tail(n) / k).collect();
    let local = n_grid.iter().map(|&n| rt(n).powi(3) * table.tau1_pmf[n] / (0.5 * k)).collect();
    let green_raw = n_grid.iter().map(|&n| rt(n) * green.sigma[n] * std::f64::consts::PI * k).collect();
    let alpha = n_grid
        .iter()
        .map(|&n| table.positive_survival[n] / (table.tail(n) * report.alpha))
        .collect();
    Ok(ReturnTimeCheck {
        tail: RatioCheck::new("return tail".into(), n_grid, tail, tol.tail),
        local: RatioCheck::new("return local".into(), n_grid, local, tol.local),
        green: RatioCheck::new("green potential".into(), n_grid, green_raw, tol.green),
        alpha: RatioCheck::new("alpha limit".into(), n_grid, alpha, tol.alpha),
        tau1_at_one: table.tau1_pmf[1],
        tau1_pmf: table.tau1_pmf,
        sigma: green.sigma,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicityCheck {
    pub convention: BoundaryConvention,
    pub x_max: i64,
    /// `E[h(x + ξ); x + ξ survives] - h(x)` for `x = floor..=x_max`.
    pub residuals: Vec<(i64, f64)>,
    pub max_abs_residual: f64,
    /// Remainder mass times `Σ_{v>0} P[ξ=v] v(v+1)/2`.
    pub bound: f64,
    pub remainder_mass: f64,
    pub verdict: Verdict,
}

/// Checks that the tabulated renewal function is harmonic for the walk
/// killed outside the survival set of `conv`.
pub fn check_harmonicity(
    xi: &LatticePmf,
    table: &RenewalTable,
    conv: BoundaryConvention,
    x_max: i64,
) -> Result<HarmonicityCheck, VerifyError> {
    let shift = conv.h_shift as i64;
    let needed = x_max + xi.max_value() - shift;
    if needed > table.x_max() as i64 {
        return Err(OracleError::TableTooShort { needed, have: table.x_max() }.into());
    }
    let floor = conv.floor();
    let mut residuals = Vec::new();
    for x in floor..=x_max {
        let hx = conv.h(table, x);
        if hx <= 0.0 {
            continue;
        }
        let lhs: f64 = xi.atoms().filter(|&(v, _)| conv.survives(x + v)).map(|(v, p)| p * conv.h(table, x + v)).sum();
        residuals.push((x, lhs - hx));
    }
    let max_abs_residual = residuals.iter().map(|r| r.1.abs()).fold(0.0, f64::max);
    let bound = table.remainder_mass() * harmonicity_bound_constant(xi);
    // Allow for rounding in the O(x) sums.
    let slack = 64.0 * f64::EPSILON * (x_max.max(1) as f64 + 1.0);
    Ok(HarmonicityCheck {
        convention: conv,
        x_max,
        residuals,
        max_abs_residual,
        bound,
        remainder_mass: table.remainder_mass(),
        verdict: Verdict::from_bool(max_abs_residual <= bound + slack),
    })
}

fn grid_max(n_grid: &[usize]) -> Result<usize, VerifyError> {
    match n_grid.iter().max() {
        Some(&m) if m >= 1 && n_grid.iter().all(|&n| n >= 1) => Ok(m),
        _ => Err(VerifyError::InvalidInput("n grid must be nonempty and positive".into())),
    }
}
