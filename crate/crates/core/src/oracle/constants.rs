use serde::{Deserialize, Serialize};

use super::dp::DpOptions;
use super::ladder::{ladder_from_pmf, renewal_function, RenewalTable};
use super::spitzer::{spitzer_constant, SpitzerConstant, SpitzerSide};
use super::{BoundaryConvention, OracleError};
use crate::lattice::{ModelKind, StepSpec, WalkModel};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Numerical knobs shared by every oracle computation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleParams {
    pub spitzer_terms: usize,
    pub ladder_horizon: usize,
    pub renewal_x_max: usize,
    pub max_remainder: f64,
    /// Largest allowed `error_bound(x)/h(x)` on the tabulated range.
    pub relative_tolerance: f64,
    pub dp: DpOptions,
}

impl Default for OracleParams {
    fn default() -> Self {
        Self {
            spitzer_terms: 10_000,
            ladder_horizon: 1 << 18,
            renewal_x_max: 32,
            max_remainder: 0.1,
            relative_tolerance: 0.05,
            dp: DpOptions::default(),
        }
    }
}

/// `c₁`, `h` and (optionally) `h̃` for one step law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideTables {
    pub c1: SpitzerConstant,
    pub h: RenewalTable,
    pub h_tilde: Option<RenewalTable>,
}

impl SideTables {
    pub fn build(step: &StepSpec, params: &OracleParams, with_tilde: bool) -> Result<Self, OracleError> {
        let symmetric = step.pmf == step.pmf.negate();
        let (c1, (h, h_tilde)) = rayon::join(
            || spitzer_constant(step, SpitzerSide::GeqZero, params.spitzer_terms),
            || {
                rayon::join(
                    || renewal_table(&step.pmf, params),
                    || (with_tilde && !symmetric).then(|| renewal_table(&step.pmf.negate(), params)).transpose(),
                )
            },
        );
        let h = h?;
        let h_tilde = match h_tilde? {
            Some(t) => Some(t),
            None if with_tilde => Some(h.clone()),
            None => None,
        };
        Ok(Self { c1: c1?, h, h_tilde })
    }
}

fn renewal_table(pmf: &crate::lattice::LatticePmf, params: &OracleParams) -> Result<RenewalTable, OracleError> {
    let ladder = ladder_from_pmf(pmf, params.ladder_horizon, params.dp)?;
    renewal_function(&ladder, params.renewal_x_max, params.max_remainder, params.relative_tolerance)
}

/// `c₂ = c₁ / (2 Σ_{y >= floor} h̃(y - shift)·P[y + ξ < floor])`.
///
/// With the literal pairing (`on_nonpositive:0`) this is
/// `c₁ / (2 Σ_{y>=1} h̃(y) P[ξ <= -y])`.
pub fn c2_from_identity(
    c1: f64,
    h_tilde: &RenewalTable,
    xi: &StepSpec,
    conv: BoundaryConvention,
) -> Result<f64, OracleError> {
    let (sum, _) = identity_sum(h_tilde, xi, conv)?;
    Ok(c1 / (2.0 * sum))
}

/// The identity sum and its truncation bound.
fn identity_sum(
    h_tilde: &RenewalTable,
    xi: &StepSpec,
    conv: BoundaryConvention,
) -> Result<(f64, f64), OracleError> {
    let floor = conv.floor();
    let depth = (-xi.min_step).max(0);
    let (mut sum, mut err) = (0.0, 0.0);
    for y in floor..floor + depth {
        let x = y - conv.h_shift as i64;
        let exit: f64 = xi.pmf.atoms().filter(|&(v, _)| y + v < floor).map(|(_, p)| p).sum();
        sum += h_tilde.try_h(x)? * exit;
        err += h_tilde.error_bound(x) * exit;
    }
    if sum == 0.0 {
        return Err(OracleError::DivisionDegenerate);
    }
    Ok((sum, err))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub c1: Estimate,
    pub c1_prime: Option<Estimate>,
    pub c2: Estimate,
    pub alpha: f64,
    pub alpha_error: f64,
    /// `E[h(η - shift); η > 0]`.
    pub eh_eta_pos: Estimate,
    /// `E[h'(-η - shift); η < 0]`.
    pub ehp_eta_neg: Estimate,
    /// `c₁ E[h(η);η>0] + c₁' E[h'(-η);η<0]`: the `√n` tail constant of the first return.
    pub tail_constant: f64,
    pub series_terms_used: usize,
    pub tail_model: String,
    pub convention: BoundaryConvention,
    pub ladder_horizon: usize,
    pub max_remainder_mass: f64,
}

impl ConstantsReport {
    pub fn recompute_alpha(&self) -> f64 {
        let pos = self.c1.value * self.eh_eta_pos.value;
        let neg = self.c1_prime.map_or(0.0, |c| c.value) * self.ehp_eta_neg.value;
        pos / (pos + neg)
    }

    /// Assembles the report from prebuilt tables. `neg` holds the tables of
    /// `-ξ'` (so its `c1` is `c₁'` and its `h` is `h'`).
    pub fn from_tables(
        model: &WalkModel,
        pos: &SideTables,
        neg: Option<&SideTables>,
        conv: BoundaryConvention,
    ) -> Result<Self, OracleError> {
        let restart = &model.restart.pmf;
        let mut eh = Estimate { value: 0.0, error: 0.0 };
        let mut ehp = Estimate { value: 0.0, error: 0.0 };
        for (v, p) in restart.atoms() {
            if v > 0 {
                let x = v - conv.h_shift as i64;
                eh.value += p * pos.h.try_h(x)?;
                eh.error += p * pos.h.error_bound(x);
            } else if v < 0 {
                let side = neg.ok_or_else(|| OracleError::InvalidInput("negative restart without xi'".into()))?;
                let x = -v - conv.h_shift as i64;
                ehp.value += p * side.h.try_h(x)?;
                ehp.error += p * side.h.error_bound(x);
            }
        }
        let c1 = Estimate { value: pos.c1.value, error: pos.c1.error_estimate };
        let c1_prime = neg.map(|s| Estimate { value: s.c1.value, error: s.c1.error_estimate });
        let h_tilde = pos
            .h_tilde
            .as_ref()
            .ok_or_else(|| OracleError::InvalidInput("h-tilde table missing".into()))?;
        let (sum, sum_err) = identity_sum(h_tilde, &model.xi, conv)?;
        let c2v = c1.value / (2.0 * sum);
        let c2 = Estimate { value: c2v, error: c2v * (c1.error / c1.value + sum_err / sum) };

        let a = c1.value * eh.value;
        let b = c1_prime.map_or(0.0, |c| c.value) * ehp.value;
        let alpha = a / (a + b);
        let da = c1.error * eh.value + c1.value * eh.error;
        let db = c1_prime.map_or(0.0, |c| c.error * ehp.value + c.value * ehp.error);
        let alpha_error = (b * da + a * db) / ((a + b) * (a + b));

        let remainder = [Some(&pos.h), pos.h_tilde.as_ref(), neg.map(|s| &s.h)]
            .into_iter()
            .flatten()
            .map(|t| t.remainder_mass())
            .fold(0.0, f64::max);
        Ok(Self {
            c1,
            c1_prime,
            c2,
            alpha,
            alpha_error,
            eh_eta_pos: eh,
            ehp_eta_neg: ehp,
            tail_constant: a + b,
            series_terms_used: pos.c1.terms,
            tail_model: format!(
                "a_k ~ beta*k^(-3/2) fitted on k in [{}, {}], beta = {:e}, free exponent {:.4}",
                (pos.c1.terms / 10).max(1),
                pos.c1.terms,
                pos.c1.tail_amplitude,
                pos.c1.fitted_exponent
            ),
            convention: conv,
            ladder_horizon: pos.h.ladder.horizon,
            max_remainder_mass: remainder,
        })
    }
}

/// Tables of both sides: `ξ` (with `h̃`) and, for the two-sided chain, `-ξ'`.
pub fn model_tables(model: &WalkModel, params: &OracleParams) -> Result<(SideTables, Option<SideTables>), OracleError> {
    let pos = SideTables::build(&model.xi, params, true)?;
    let neg = match (model.kind, &model.xi_prime) {
        (ModelKind::X, Some(xp)) => {
            let flipped = xp.negated();
            if flipped.pmf == model.xi.pmf {
                Some(SideTables { c1: pos.c1.clone(), h: pos.h.clone(), h_tilde: None })
            } else if xp.pmf == model.xi.pmf {
                let c1 = spitzer_constant(&flipped, SpitzerSide::GeqZero, params.spitzer_terms)?;
                Some(SideTables { c1, h: pos.h_tilde.clone().expect("built with tilde"), h_tilde: None })
            } else {
                Some(SideTables::build(&flipped, params, false)?)
            }
        }
        _ => None,
    };
    Ok((pos, neg))
}

/// Builds all tables for `model` and evaluates the skewness parameter under
/// `conv`. For the one-sided chain the result has `alpha = 1`.
pub fn alpha_parameter(
    model: &WalkModel,
    conv: BoundaryConvention,
    params: &OracleParams,
) -> Result<ConstantsReport, OracleError> {
    let (pos, neg) = model_tables(model, params)?;
    ConstantsReport::from_tables(model, &pos, neg.as_ref(), conv)
}
