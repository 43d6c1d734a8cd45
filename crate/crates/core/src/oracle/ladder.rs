use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::dp::{DpOptions, KilledWalk};
use super::OracleError;
use crate::lattice::{LatticePmf, ModelKind, StepSpec, WalkModel};

/// Defective law of the first strict descending ladder height, observed up
/// to a finite horizon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderLaw {
    /// `masses[j - 1] = P[S(ℓ₁) = -j, ℓ₁ <= horizon]`.
    pub masses: Vec<f64>,
    /// Mass not assigned to any height: `P[ℓ₁ > horizon]` plus pruned mass.
    pub remainder_mass: f64,
    pub surviving_mass: f64,
    pub leaked_mass: f64,
    pub horizon: usize,
}

impl LadderLaw {
    pub fn assigned_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// `(-j, mass)` pairs with positive mass.
    pub fn atoms(&self) -> Vec<(i64, f64)> {
        self.masses
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0.0)
            .map(|(i, &m)| (-(i as i64) - 1, m))
            .collect()
    }
}

pub fn ladder_height_distribution(
    xi: &StepSpec,
    horizon: usize,
    opts: DpOptions,
) -> Result<LadderLaw, OracleError> {
    ladder_from_pmf(&xi.pmf, horizon, opts)
}

pub(crate) fn ladder_from_pmf(
    step: &LatticePmf,
    horizon: usize,
    opts: DpOptions,
) -> Result<LadderLaw, OracleError> {
    let depth = (-step.min_value()).max(0) as usize;
    if depth == 0 {
        return Err(OracleError::InvalidInput("step law has no negative support".into()));
    }
    let mut masses = vec![0.0; depth];
    let mut walk = KilledWalk::new(step, 0, &[(0, 1.0)], opts);
    for _ in 0..horizon {
        walk.step(|pos, m| masses[(-pos - 1) as usize] += m)?;
        if walk.live().1.is_empty() {
            break;
        }
    }
    let surviving_mass = walk.mass();
    let assigned: f64 = masses.iter().sum();
    let remainder_mass = (surviving_mass + walk.leaked).max(1.0 - assigned).max(0.0);
    Ok(LadderLaw { masses, remainder_mass, surviving_mass, leaked_mass: walk.leaked, horizon })
}

/// Tabulated descending renewal function with one-sided truncation bounds.
///
/// The tabulated `h_values` underestimate the true function; the true value
/// lies in `[h_values[x], h_values[x] + error_bounds[x]]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenewalTable {
    pub ladder: LadderLaw,
    pub renewal_mass: Vec<f64>,
    pub h_values: Vec<f64>,
    pub error_bounds: Vec<f64>,
}

impl RenewalTable {
    pub fn x_max(&self) -> usize {
        self.h_values.len() - 1
    }

    pub fn remainder_mass(&self) -> f64 {
        self.ladder.remainder_mass
    }

    /// `h(x)`; zero for negative `x`. Panics beyond the table.
    pub fn h(&self, x: i64) -> f64 {
        if x < 0 {
            0.0
        } else {
            self.h_values[x as usize]
        }
    }

    pub fn try_h(&self, x: i64) -> Result<f64, OracleError> {
        if x > self.x_max() as i64 {
            return Err(OracleError::TableTooShort { needed: x, have: self.x_max() });
        }
        Ok(self.h(x))
    }

    pub fn error_bound(&self, x: i64) -> f64 {
        if x < 0 {
            0.0
        } else {
            self.error_bounds[x as usize]
        }
    }

    /// Same table with `h` multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> RenewalTable {
        let mut t = self.clone();
        t.h_values.iter_mut().for_each(|h| *h *= factor);
        t.error_bounds.iter_mut().for_each(|b| *b *= factor);
        t
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,h,err\n");
        for (x, (h, e)) in self.h_values.iter().zip(&self.error_bounds).enumerate() {
            let _ = writeln!(out, "{x},{h},{e}");
        }
        out
    }
}

/// `h(x) = Σ_{k<=x} u(k)` with `u` the renewal mass of the ladder heights.
///
/// With remainder `r`, the neglected part of `u` is `u_H * d * u` where `d`
/// is the missing ladder mass; since `u_H <= 1` and `h(y) <= y + 1`, the
/// truncation error at `x` is at most `r·x(x+1)/2`.
pub fn renewal_function(
    ladder: &LadderLaw,
    x_max: usize,
    max_remainder: f64,
    relative_tolerance: f64,
) -> Result<RenewalTable, OracleError> {
    if ladder.remainder_mass >= max_remainder {
        return Err(OracleError::RemainderTooLarge { remainder: ladder.remainder_mass, limit: max_remainder });
    }
    let mut u = vec![0.0; x_max + 1];
    u[0] = 1.0;
    for k in 1..=x_max {
        let mut acc = 0.0;
        for (j, &q) in ladder.masses.iter().enumerate() {
            let j = j + 1;
            if j > k {
                break;
            }
            acc += q * u[k - j];
        }
        u[k] = acc;
    }
    let mut h = Vec::with_capacity(x_max + 1);
    let mut running = 0.0;
    for &uk in &u {
        running += uk;
        h.push(running);
    }
    let r = ladder.remainder_mass;
    let error_bounds: Vec<f64> = (0..=x_max).map(|x| r * (x * (x + 1)) as f64 / 2.0).collect();
    for x in 0..=x_max {
        if error_bounds[x] > relative_tolerance * h[x] {
            return Err(OracleError::TruncationTooCoarse {
                x,
                bound: error_bounds[x],
                tolerance: relative_tolerance * h[x],
            });
        }
    }
    Ok(RenewalTable { ladder: ladder.clone(), renewal_mass: u, h_values: h, error_bounds })
}

/// `Σ_{v>0} P[ξ = v]·v(v+1)/2`: multiplying the remainder mass by this bounds
/// the harmonic-equation residual of a truncated table.
pub fn harmonicity_bound_constant(xi: &LatticePmf) -> f64 {
    xi.atoms().filter(|&(v, _)| v > 0).map(|(v, p)| p * (v * (v + 1)) as f64 / 2.0).sum()
}

/// Renewal functions of the sign-flipped laws: `h̃` from `-ξ`, and `h'` from
/// `-ξ'` when the model is two-sided.
pub fn ascending_variants(
    model: &WalkModel,
    x_max: usize,
    horizon: usize,
    opts: DpOptions,
    max_remainder: f64,
    relative_tolerance: f64,
) -> Result<(RenewalTable, Option<RenewalTable>), OracleError> {
    let build = |s: &StepSpec| -> Result<RenewalTable, OracleError> {
        let ladder = ladder_from_pmf(&s.pmf.negate(), horizon, opts)?;
        renewal_function(&ladder, x_max, max_remainder, relative_tolerance)
    };
    let h_tilde = build(&model.xi)?;
    let h_prime = match (model.kind, &model.xi_prime) {
        (ModelKind::X, Some(xp)) => Some(build(xp)?),
        _ => None,
    };
    Ok((h_tilde, h_prime))
}
