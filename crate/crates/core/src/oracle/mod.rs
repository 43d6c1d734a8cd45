//! Exact dynamic-programming oracle for killed walks, ladder heights, renewal
//! functions, Spitzer constants, the skewness parameter, and return times.

mod calibrate;
mod constants;
mod dp;
mod ladder;
mod returns;
mod spitzer;
mod survival;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::lattice::LatticeError;

pub use calibrate::{calibrate_convention, Calibration, CandidateResidual};
pub use constants::{
    alpha_parameter, c2_from_identity, model_tables, ConstantsReport, Estimate, OracleParams, SideTables,
};
pub use dp::DpOptions;
pub use ladder::{
    ascending_variants, harmonicity_bound_constant, ladder_height_distribution, renewal_function,
    LadderLaw, RenewalTable,
};
pub use returns::{green_potential, return_time_pmf, GreenTable, ReturnTimeTable};
pub use spitzer::{hurwitz_tail, spitzer_constant, spitzer_terms, SpitzerConstant, SpitzerSide};
pub use survival::{
    first_passage_pmf, survival_dp, survival_dp_with, LocalRecording, LocalRow, SurvivalTable,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("live state count {states} exceeds cap {cap}")]
    ResourceLimit { states: usize, cap: usize },
    #[error("ladder remainder mass {remainder} exceeds limit {limit}")]
    RemainderTooLarge { remainder: f64, limit: f64 },
    #[error("renewal error bound {bound} at x={x} exceeds tolerance {tolerance}")]
    TruncationTooCoarse { x: usize, bound: f64, tolerance: f64 },
    #[error("renewal table covers x <= {have}, need {needed}")]
    TableTooShort { needed: i64, have: usize },
    #[error("Spitzer tail exponent {exponent} is not within 0.3 of -3/2")]
    TailFitUnstable { exponent: f64 },
    #[error("identity sum vanishes (step law has no negative support)")]
    DivisionDegenerate,
    #[error("no boundary convention fits (best residual {best})")]
    NoConventionFits { best: f64 },
    #[error("step law must be aperiodic for local limits (span {0})")]
    Periodic(u64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KillRule {
    /// Killed once `x + S(n) <= 0`.
    OnNonpositive,
    /// Killed once `x + S(n) < 0`.
    OnNegative,
}

/// Which positions survive and how the renewal function is indexed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundaryConvention {
    pub kill_rule: KillRule,
    pub h_shift: u8,
}

impl BoundaryConvention {
    pub const CANDIDATES: [BoundaryConvention; 4] = [
        BoundaryConvention { kill_rule: KillRule::OnNegative, h_shift: 0 },
        BoundaryConvention { kill_rule: KillRule::OnNegative, h_shift: 1 },
        BoundaryConvention { kill_rule: KillRule::OnNonpositive, h_shift: 0 },
        BoundaryConvention { kill_rule: KillRule::OnNonpositive, h_shift: 1 },
    ];

    pub const fn new(kill_rule: KillRule, h_shift: u8) -> Self {
        Self { kill_rule, h_shift }
    }

    /// Lowest surviving position.
    pub fn floor(&self) -> i64 {
        match self.kill_rule {
            KillRule::OnNegative => 0,
            KillRule::OnNonpositive => 1,
        }
    }

    pub fn survives(&self, position: i64) -> bool {
        position >= self.floor()
    }

    /// `h(x - shift)`, zero below the table.
    pub fn h(&self, table: &RenewalTable, x: i64) -> f64 {
        table.h(x - self.h_shift as i64)
    }

    /// Convention for the zero-restarted chains, which are absorbed at zero
    /// (kill on `<= 0`). The offset between survival floor and renewal index
    /// found for the plain walk is carried over.
    pub fn for_chain(&self) -> Option<Self> {
        let offset = self.h_shift as i64 - self.floor();
        let shift = 1 + offset;
        (0..=1).contains(&shift).then(|| Self::new(KillRule::OnNonpositive, shift as u8))
    }
}

impl fmt::Display for BoundaryConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rule = match self.kill_rule {
            KillRule::OnNegative => "on_negative",
            KillRule::OnNonpositive => "on_nonpositive",
        };
        write!(f, "{rule}:{}", self.h_shift)
    }
}

impl FromStr for BoundaryConvention {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (rule, shift) = s.split_once(':').ok_or_else(|| format!("expected RULE:SHIFT, got {s:?}"))?;
        let kill_rule = match rule {
            "on_negative" => KillRule::OnNegative,
            "on_nonpositive" => KillRule::OnNonpositive,
            _ => return Err(format!("unknown kill rule {rule:?}")),
        };
        let h_shift = match shift {
            "0" => 0,
            "1" => 1,
            _ => return Err(format!("h shift must be 0 or 1, got {shift:?}")),
        };
        Ok(Self { kill_rule, h_shift })
    }
}
