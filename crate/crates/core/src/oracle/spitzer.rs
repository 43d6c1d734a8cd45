use serde::{Deserialize, Serialize};

use super::OracleError;
use crate::lattice::{ConvolutionPowers, LatticePmf, StepSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpitzerSide {
    /// Series in `P[S(k) >= 0]`, giving `c₁`.
    GeqZero,
    /// Series in `P[S(k) <= 0]`, giving `c₁'`.
    LeqZero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpitzerConstant {
    pub value: f64,
    pub error_estimate: f64,
    pub terms: usize,
    pub partial_sum: f64,
    pub tail_sum: f64,
    pub fitted_exponent: f64,
    pub tail_amplitude: f64,
}

/// `a_k = (P[S(k) >= 0] - 1/2)/k` for `k = 1..=count`, or the `<= 0` variant.
///
/// Computed as `(P[S >= 0] - P[S < 0])/(2k)`, which does not depend on the
/// exact normalization of the pruned convolution powers.
pub fn spitzer_terms(step: &LatticePmf, side: SpitzerSide, count: usize) -> Vec<f64> {
    let step = match side {
        SpitzerSide::GeqZero => step.clone(),
        SpitzerSide::LeqZero => step.negate(),
    };
    ConvolutionPowers::new(&step)
        .take(count)
        .enumerate()
        .map(|(i, s)| {
            let k = (i + 1) as f64;
            let (mut ge, mut lt) = (0.0, 0.0);
            for (v, p) in s.atoms() {
                if v >= 0 {
                    ge += p;
                } else {
                    lt += p;
                }
            }
            (ge - lt) / (2.0 * k)
        })
        .collect()
}

/// `Σ_{k >= n0} k^{-s}` for `s > 1`, by Euler–Maclaurin from `max(n0, 64)`.
pub fn hurwitz_tail(s: f64, n0: usize) -> f64 {
    assert!(s > 1.0 && n0 >= 1);
    let n = n0.max(64);
    let direct: f64 = (n0..n).map(|k| (k as f64).powf(-s)).sum();
    let x = n as f64;
    let em = x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s) + s * x.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * x.powf(-s - 3.0) / 720.0
        + s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * x.powf(-s - 5.0) / 30240.0;
    direct + em
}

/// `(1/√π)·exp(Σ a_k)` with the series tail modelled as `β k^{-3/2}`.
pub fn spitzer_constant(xi: &StepSpec, which: SpitzerSide, k: usize) -> Result<SpitzerConstant, OracleError> {
    if k < 16 {
        return Err(OracleError::InvalidInput("Spitzer series needs at least 16 terms".into()));
    }
    let a = spitzer_terms(&xi.pmf, which, k);
    let partial_sum: f64 = a.iter().sum();

    let start = (k / 10).max(1);
    let window: Vec<(f64, f64)> = (start..=k)
        .map(|j| (j as f64, a[j - 1]))
        .filter(|&(_, v)| v != 0.0)
        .collect();
    if window.len() < 3 {
        return Err(OracleError::TailFitUnstable { exponent: f64::NAN });
    }
    let m = window.len() as f64;
    let (sx, sy) = window.iter().fold((0.0, 0.0), |(sx, sy), &(j, v)| (sx + j.ln(), sy + v.abs().ln()));
    let (mx, my) = (sx / m, sy / m);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(j, v) in &window {
        let dx = j.ln() - mx;
        sxy += dx * (v.abs().ln() - my);
        sxx += dx * dx;
    }
    let exponent = sxy / sxx;
    if (exponent + 1.5).abs() > 0.3 {
        return Err(OracleError::TailFitUnstable { exponent });
    }
    let amplitude = |pts: &[(f64, f64)]| {
        let (num, den) = pts
            .iter()
            .fold((0.0, 0.0), |(n, d), &(j, v)| (n + v * j.powf(-1.5), d + j.powf(-3.0)));
        num / den
    };
    let beta = amplitude(&window);
    let zeta = hurwitz_tail(1.5, k + 1);
    let tail_sum = beta * zeta;
    // Drift of the amplitude across the window measures the neglected
    // higher-order terms.
    let (early, late) = window.split_at(window.len() / 2);
    let drift = (amplitude(early) - amplitude(late)).abs() * zeta;

    let sign = if beta < 0.0 { -1.0 } else { 1.0 };
    let free_amp = sign * (my - exponent * mx).exp();
    let tail_free = free_amp * hurwitz_tail(-exponent, k + 1);
    let err_sum = (tail_free - tail_sum).abs() + drift + k as f64 * f64::EPSILON;

    let value = (partial_sum + tail_sum).exp() / std::f64::consts::PI.sqrt();
    Ok(SpitzerConstant {
        value,
        error_estimate: value * err_sum.exp_m1(),
        terms: k,
        partial_sum,
        tail_sum,
        fitted_exponent: exponent,
        tail_amplitude: beta,
    })
}
