use serde::{Deserialize, Serialize};

use super::dp::{DpOptions, KilledWalk};
use super::OracleError;
use crate::lattice::{ModelKind, WalkModel};

/// Exact law of the first return time `τ₁` of the zero-restarted chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReturnTimeTable {
    pub horizon: usize,
    /// `tau1_pmf[n] = P[τ₁ = n]`, entry 0 is zero.
    pub tau1_pmf: Vec<f64>,
    /// `P[τ₁ > n, restart > 0]`.
    pub positive_survival: Vec<f64>,
    /// `P[τ₁ > n, restart < 0]`.
    pub negative_survival: Vec<f64>,
    pub leaked_mass: f64,
}

impl ReturnTimeTable {
    /// `P[τ₁ > n]`.
    pub fn tail(&self, n: usize) -> f64 {
        if n == 0 {
            1.0
        } else {
            self.positive_survival[n] + self.negative_survival[n]
        }
    }
}

/// Survival of one side: start from the restart mass on that side (mapped to
/// positive positions) and kill on `<= 0`, the chains' own absorption rule.
fn side(
    step: &crate::lattice::LatticePmf,
    init: &[(i64, f64)],
    horizon: usize,
    opts: DpOptions,
    pmf: &mut [f64],
) -> Result<(Vec<f64>, f64), OracleError> {
    let mut survival = vec![0.0; horizon + 1];
    let total: f64 = init.iter().map(|a| a.1).sum();
    survival[0] = total;
    if init.is_empty() {
        return Ok((survival, 0.0));
    }
    let mut walk = KilledWalk::new(step, 1, init, opts);
    if horizon >= 1 {
        survival[1] = total;
    }
    for n in 2..=horizon {
        pmf[n] += walk.step(|_, _| {})?;
        survival[n] = walk.mass();
    }
    Ok((survival, walk.leaked))
}

pub fn return_time_pmf(model: &WalkModel, horizon: usize, opts: DpOptions) -> Result<ReturnTimeTable, OracleError> {
    if horizon < 1 {
        return Err(OracleError::InvalidInput("horizon must be at least 1".into()));
    }
    let restart = &model.restart.pmf;
    let mut pmf = vec![0.0; horizon + 1];
    pmf[1] = restart.prob(0);
    let pos_init: Vec<(i64, f64)> = restart.atoms().filter(|a| a.0 > 0).collect();
    let (positive_survival, leak_pos) = side(&model.xi.pmf, &pos_init, horizon, opts, &mut pmf)?;
    let neg_init: Vec<(i64, f64)> = restart.atoms().filter(|a| a.0 < 0).map(|(v, p)| (-v, p)).collect();
    let (negative_survival, leak_neg) = match (model.kind, &model.xi_prime) {
        (ModelKind::X, Some(xp)) => side(&xp.pmf.negate(), &neg_init, horizon, opts, &mut pmf)?,
        _ => (vec![0.0; horizon + 1], 0.0),
    };
    Ok(ReturnTimeTable {
        horizon,
        tau1_pmf: pmf,
        positive_survival,
        negative_survival,
        leaked_mass: leak_pos + leak_neg,
    })
}

/// `Σₙ = Σ_l P[τ_l = n]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenTable {
    pub tau1_pmf: Vec<f64>,
    pub sigma: Vec<f64>,
    pub horizon: usize,
}

/// Renewal recursion `Σ₀ = 1`, `Σₙ = Σ_{m=1..n} P[τ₁ = m] Σ_{n-m}`.
pub fn green_potential(tau1: &[f64], horizon: usize) -> GreenTable {
    let mut sigma = vec![0.0; horizon + 1];
    sigma[0] = 1.0;
    for n in 1..=horizon {
        let mut acc = 0.0;
        for m in 1..=n.min(tau1.len().saturating_sub(1)) {
            acc += tau1[m] * sigma[n - m];
        }
        sigma[n] = acc;
    }
    GreenTable { tau1_pmf: tau1.to_vec(), sigma, horizon }
}
