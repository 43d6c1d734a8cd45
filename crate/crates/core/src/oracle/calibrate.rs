use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::constants::SideTables;
use super::dp::DpOptions;
use super::survival::{survival_dp_with, LocalRecording};
use super::{BoundaryConvention, KillRule, OracleError};
use crate::extrapolate::richardson;
use crate::lattice::StepSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateResidual {
    pub convention: BoundaryConvention,
    /// Extrapolated `√n P[τ(x) > n] / (c₁ h_conv(x))` per grid point.
    pub limits: Vec<f64>,
    /// `max_x |limit - 1|`; infinite when `h_conv(x) = 0` somewhere.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub convention: BoundaryConvention,
    pub x_grid: Vec<i64>,
    pub n_grid: Vec<usize>,
    pub candidates: Vec<CandidateResidual>,
}

/// Picks the (kill rule, shift) pairing under which the `√n` tail law holds
/// with constant `c₁ h(x)` on the whole grid.
pub fn calibrate_convention(
    xi: &StepSpec,
    tables: &SideTables,
    x_grid: &[i64],
    n_grid: &[usize],
    opts: DpOptions,
) -> Result<Calibration, OracleError> {
    if x_grid.is_empty() || n_grid.len() < 2 {
        return Err(OracleError::InvalidInput("calibration needs an x grid and at least two n".into()));
    }
    let horizon = *n_grid.iter().max().unwrap();
    let rules = [KillRule::OnNegative, KillRule::OnNonpositive];
    let jobs: Vec<(KillRule, i64)> = rules.iter().flat_map(|&r| x_grid.iter().map(move |&x| (r, x))).collect();
    let survivals: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(rule, x)| {
            survival_dp_with(
                &xi.pmf,
                x,
                horizon,
                BoundaryConvention::new(rule, 0),
                opts,
                &LocalRecording::None,
            )
            .map(|t| t.survive)
        })
        .collect::<Result<_, _>>()?;

    let c1 = tables.c1.value;
    let mut candidates = Vec::new();
    for conv in BoundaryConvention::CANDIDATES {
        let mut limits = Vec::new();
        let mut residual: f64 = 0.0;
        for &x in x_grid {
            let job = jobs.iter().position(|&(r, jx)| r == conv.kill_rule && jx == x).unwrap();
            let h = conv.h(&tables.h, x);
            if h == 0.0 {
                limits.push(f64::INFINITY);
                residual = f64::INFINITY;
                continue;
            }
            let rs: Vec<f64> =
                n_grid.iter().map(|&n| (n as f64).sqrt() * survivals[job][n] / (c1 * h)).collect();
            let lim = richardson(n_grid, &rs).limit;
            residual = residual.max((lim - 1.0).abs());
            limits.push(lim);
        }
        candidates.push(CandidateResidual { convention: conv, limits, residual });
    }
    let best = candidates
        .iter()
        .min_by(|a, b| a.residual.total_cmp(&b.residual))
        .expect("four candidates");
    if best.residual > 0.05 {
        return Err(OracleError::NoConventionFits { best: best.residual });
    }
    Ok(Calibration {
        convention: best.convention,
        x_grid: x_grid.to_vec(),
        n_grid: n_grid.to_vec(),
        candidates,
    })
}
