//! Numeric verdicts: DP ratio tables with extrapolation, and Monte Carlo
//! goodness-of-fit tests against the limiting laws.

mod mc;
mod ratios;
pub mod stats;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::extrapolate::richardson;
use crate::oracle::OracleError;
use crate::sbm::SbmError;
use crate::walks::WalkError;

pub use mc::{
    check_joint, check_marginal, tightness_diagnostics, JointBins, JointCheck, MarginalCheck, MarginalTolerances,
    SignTest, SplitCheck, TightnessReport, TightnessRow,
};
pub use ratios::{
    check_harmonicity, check_local, check_return_times, check_tail, HarmonicityCheck, LocalCheck, LocalTolerances,
    ReturnTimeCheck, ReturnTolerances, TailCheck, WalkSide,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Sbm(#[from] SbmError),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error("expected bin count {min_expected} below 5")]
    InsufficientCounts { min_expected: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    /// `Fail` if any input fails, `NotApplicable` if all are, else `Pass`.
    pub fn combine<I: IntoIterator<Item = Verdict>>(items: I) -> Self {
        let mut out = Verdict::NotApplicable;
        for v in items {
            match v {
                Verdict::Fail => return Verdict::Fail,
                Verdict::Pass => out = Verdict::Pass,
                Verdict::NotApplicable => {}
            }
        }
        out
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }
}

/// A ratio sequence whose limit should be 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioCheck {
    pub name: String,
    pub n_grid: Vec<usize>,
    pub raw_ratios: Vec<f64>,
    pub extrapolated_limit: f64,
    pub slope: f64,
    pub target: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl RatioCheck {
    pub fn new(name: String, n_grid: &[usize], raw_ratios: Vec<f64>, tolerance: f64) -> Self {
        let e = richardson(n_grid, &raw_ratios);
        let ok = (e.limit - 1.0).abs() <= tolerance;
        Self {
            name,
            n_grid: n_grid.to_vec(),
            raw_ratios,
            extrapolated_limit: e.limit,
            slope: e.slope,
            target: 1.0,
            tolerance,
            verdict: Verdict::from_bool(ok),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,ratio\n");
        for (n, r) in self.n_grid.iter().zip(&self.raw_ratios) {
            let _ = writeln!(out, "{n},{r}");
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitTest {
    pub name: String,
    pub statistic_name: String,
    pub statistic: f64,
    pub sample_size: usize,
    /// Upper bound on the statistic for KS tests, lower bound on the
    /// p-value for chi-square tests.
    pub threshold: f64,
    pub p_value_or_bound: f64,
    pub verdict: Verdict,
}

impl FitTest {
    pub fn not_applicable(name: &str, statistic_name: &str, sample_size: usize, threshold: f64) -> Self {
        Self {
            name: name.into(),
            statistic_name: statistic_name.into(),
            statistic: f64::NAN,
            sample_size,
            threshold,
            p_value_or_bound: f64::NAN,
            verdict: Verdict::NotApplicable,
        }
    }
}

/// One serialized check of a verification report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// The statement being tested, in words.
    pub claim: String,
    pub inputs: serde_json::Value,
    pub numbers: serde_json::Value,
    pub verdict: Verdict,
}

impl CheckRecord {
    pub fn new<I: Serialize, N: Serialize>(
        name: impl Into<String>,
        claim: impl Into<String>,
        inputs: &I,
        numbers: &N,
        verdict: Verdict,
    ) -> Self {
        Self {
            name: name.into(),
            claim: claim.into(),
            inputs: serde_json::to_value(inputs).unwrap_or(serde_json::Value::Null),
            numbers: serde_json::to_value(numbers).unwrap_or(serde_json::Value::Null),
            verdict,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn push(&mut self, record: CheckRecord) {
        self.checks.push(record);
    }

    pub fn overall(&self) -> Verdict {
        Verdict::combine(self.checks.iter().map(|c| c.verdict))
    }

    pub fn find(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }
}
