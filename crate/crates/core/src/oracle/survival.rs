use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::dp::{DpOptions, KilledWalk};
use super::{BoundaryConvention, OracleError};
use crate::lattice::{LatticePmf, StepSpec};

/// Which local rows `P[τ > n, x + S(n) = ·]` to keep.
#[derive(Clone, Debug, PartialEq)]
pub enum LocalRecording {
    None,
    All,
    At(Vec<usize>),
}

impl LocalRecording {
    fn wants(&self, n: usize) -> bool {
        match self {
            LocalRecording::None => false,
            LocalRecording::All => true,
            LocalRecording::At(ns) => ns.contains(&n),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalRow {
    pub min_position: i64,
    pub probs: Vec<f64>,
}

impl LocalRow {
    pub fn get(&self, y: i64) -> f64 {
        if y < self.min_position {
            return 0.0;
        }
        self.probs.get((y - self.min_position) as usize).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalTable {
    pub x0: i64,
    pub horizon: usize,
    /// `survive[n] = P[τ > n]`.
    pub survive: Vec<f64>,
    /// `first_passage[n] = P[τ = n]`, accumulated directly from killed mass.
    pub first_passage: Vec<f64>,
    pub local: BTreeMap<usize, LocalRow>,
    pub leaked_mass: f64,
    pub convention: BoundaryConvention,
}

impl SurvivalTable {
    pub fn local(&self, n: usize, y: i64) -> Option<f64> {
        self.local.get(&n).map(|row| row.get(y))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,survive,first_passage\n");
        for n in 0..=self.horizon {
            let _ = writeln!(out, "{},{},{}", n, self.survive[n], self.first_passage[n]);
        }
        out
    }
}

/// Killed walk from `x0`, all local rows recorded.
pub fn survival_dp(
    xi: &StepSpec,
    x0: i64,
    horizon: usize,
    conv: BoundaryConvention,
) -> Result<SurvivalTable, OracleError> {
    survival_dp_with(&xi.pmf, x0, horizon, conv, DpOptions::default(), &LocalRecording::All)
}

pub fn survival_dp_with(
    step: &LatticePmf,
    x0: i64,
    horizon: usize,
    conv: BoundaryConvention,
    opts: DpOptions,
    record: &LocalRecording,
) -> Result<SurvivalTable, OracleError> {
    if horizon < 1 {
        return Err(OracleError::InvalidInput("horizon must be at least 1".into()));
    }
    if x0 < 0 {
        return Err(OracleError::InvalidInput("start must be nonnegative".into()));
    }
    let mut walk = KilledWalk::new(step, conv.floor(), &[(x0, 1.0)], opts);
    let mut survive = Vec::with_capacity(horizon + 1);
    let mut first_passage = Vec::with_capacity(horizon + 1);
    let mut local = BTreeMap::new();
    survive.push(1.0);
    first_passage.push(0.0);
    if record.wants(0) {
        local.insert(0, LocalRow { min_position: x0, probs: vec![1.0] });
    }
    for n in 1..=horizon {
        let killed = walk.step(|_, _| {})?;
        first_passage.push(killed);
        survive.push(walk.mass());
        if record.wants(n) {
            let (lo, probs) = walk.live();
            local.insert(n, LocalRow { min_position: lo, probs: probs.to_vec() });
        }
    }
    Ok(SurvivalTable {
        x0,
        horizon,
        survive,
        first_passage,
        local,
        leaked_mass: walk.leaked,
        convention: conv,
    })
}

/// `P[τ = n]` for `n = 0..=horizon` (entry 0 is zero).
pub fn first_passage_pmf(table: &SurvivalTable) -> Vec<f64> {
    table.first_passage.clone()
}
