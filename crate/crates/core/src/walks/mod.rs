//! Seeded simulation of the zero-restarted chains, rescaling, and
//! zero-visit instrumentation.

mod batch;

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::lattice::{sample, ModelKind, WalkModel};
use crate::rng::RandomStream;

pub use batch::{batch_estimate, map_paths, BatchConfig, BatchEstimate, Statistic};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WalkError {
    #[error("grid time {t} outside [0, 1] or beyond the path (n = {n}, length {len})")]
    GridOutOfRange { t: f64, n: usize, len: usize },
    #[error("operation needs a {expected:?} model")]
    WrongKind { expected: ModelKind },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Which case of the transition rule fired.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    PositiveStep,
    PositiveToZero,
    Restart,
    NegativeStep,
    NegativeToZero,
}

/// One-sided chain: `draw` is a `ξ` draw when `state > 0`, a `γ` draw at 0.
pub fn transition_y(state: i64, draw: i64) -> (i64, Branch) {
    debug_assert!(state >= 0);
    if state == 0 {
        (draw, Branch::Restart)
    } else if state + draw > 0 {
        (state + draw, Branch::PositiveStep)
    } else {
        (0, Branch::PositiveToZero)
    }
}

/// Two-sided chain: `draw` is from `ξ`, `η` or `ξ'` according to the sign of `state`.
pub fn transition_x(state: i64, draw: i64) -> (i64, Branch) {
    if state > 0 {
        if state + draw > 0 {
            (state + draw, Branch::PositiveStep)
        } else {
            (0, Branch::PositiveToZero)
        }
    } else if state == 0 {
        (draw, Branch::Restart)
    } else if state + draw < 0 {
        (state + draw, Branch::NegativeStep)
    } else {
        (0, Branch::NegativeToZero)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PathBundle {
    pub values: Vec<i64>,
    /// Times `k >= 1` with `values[k] == 0`.
    pub return_times: Vec<usize>,
    /// `(time, value)` of every restart draw; `values[time] == value`.
    pub restart_draws: Vec<(usize, i64)>,
    pub seed: u64,
    pub stream: u64,
}

impl PathBundle {
    pub fn len_steps(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,value\n");
        for (k, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{k},{v}");
        }
        out
    }
}

/// Simulates `n` steps into `path`, reusing its buffers.
pub fn simulate_into(model: &WalkModel, n: usize, stream: &mut RandomStream, path: &mut PathBundle) {
    path.values.clear();
    path.return_times.clear();
    path.restart_draws.clear();
    path.seed = stream.seed();
    path.stream = stream.stream();
    path.values.reserve(n + 1);
    path.values.push(0);
    let neg = model.xi_prime.as_ref().unwrap_or(&model.xi);
    let mut state = 0i64;
    for k in 1..=n {
        let next = if state > 0 {
            let d = sample(&model.xi, stream);
            if state + d > 0 {
                state + d
            } else {
                0
            }
        } else if state == 0 {
            let d = sample(&model.restart, stream);
            path.restart_draws.push((k, d));
            d
        } else {
            let d = sample(neg, stream);
            if state + d < 0 {
                state + d
            } else {
                0
            }
        };
        if next == 0 {
            path.return_times.push(k);
        }
        path.values.push(next);
        state = next;
    }
}

pub fn simulate_y(model: &WalkModel, n: usize, stream: &mut RandomStream) -> Result<PathBundle, WalkError> {
    if model.kind != ModelKind::Y {
        return Err(WalkError::WrongKind { expected: ModelKind::Y });
    }
    let mut p = PathBundle::default();
    simulate_into(model, n, stream, &mut p);
    Ok(p)
}

pub fn simulate_x(model: &WalkModel, n: usize, stream: &mut RandomStream) -> Result<PathBundle, WalkError> {
    if model.kind != ModelKind::X {
        return Err(WalkError::WrongKind { expected: ModelKind::X });
    }
    let mut p = PathBundle::default();
    simulate_into(model, n, stream, &mut p);
    Ok(p)
}

/// Linear interpolation of an integer path at real time `s`.
pub fn interpolate(values: &[i64], s: f64) -> f64 {
    let k = s.floor() as usize;
    let frac = s - k as f64;
    if frac == 0.0 || k + 1 >= values.len() {
        return values[k.min(values.len() - 1)] as f64;
    }
    values[k] as f64 + frac * (values[k + 1] - values[k]) as f64
}

/// Sign-dependent diffusive scaling: `σ√n` above zero, `σ'√n` below.
pub fn scale_value(v: f64, n: usize, sigma: f64, sigma_prime: f64) -> f64 {
    let root = (n as f64).sqrt();
    if v >= 0.0 {
        v / (sigma * root)
    } else {
        v / (sigma_prime * root)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RescaledPath {
    pub grid_times: Vec<f64>,
    pub values: Vec<f64>,
    pub n: usize,
    pub sigma: f64,
    pub sigma_prime: f64,
}

/// Interpolates the path at `n·t`, then applies the sign-dependent scaling.
pub fn rescale_path(
    path: &PathBundle,
    n: usize,
    sigma: f64,
    sigma_prime: f64,
    grid: &[f64],
) -> Result<RescaledPath, WalkError> {
    let len = path.len_steps();
    let mut values = Vec::with_capacity(grid.len());
    for &t in grid {
        let s = t * n as f64;
        if !(0.0..=1.0).contains(&t) || s > len as f64 {
            return Err(WalkError::GridOutOfRange { t, n, len });
        }
        values.push(scale_value(interpolate(&path.values, s), n, sigma, sigma_prime));
    }
    Ok(RescaledPath { grid_times: grid.to_vec(), values, n, sigma, sigma_prime })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroVisitStats {
    /// Number of `k` in `1..=n` with value 0.
    pub n_n: usize,
    /// Largest `|restart|` among restarts landing at times `<= n`.
    pub max_restart_abs: i64,
    /// Largest `|v_i - v_j|` over `|i - j| <= nδ`, `i, j <= n`.
    pub max_increment_window: f64,
}

pub fn zero_visit_stats(path: &PathBundle, n: usize, delta: f64) -> Result<ZeroVisitStats, WalkError> {
    if path.len_steps() < n {
        return Err(WalkError::InvalidInput(format!("path has {} steps, need {n}", path.len_steps())));
    }
    let n_n = path.return_times.iter().take_while(|&&t| t <= n).count();
    let max_restart_abs =
        path.restart_draws.iter().filter(|d| d.0 <= n).map(|d| d.1.abs()).max().unwrap_or(0);
    let window = ((n as f64) * delta).floor().max(0.0) as usize;
    Ok(ZeroVisitStats { n_n, max_restart_abs, max_increment_window: window_range(&path.values[..=n], window) })
}

/// `max_{|i-j| <= w} |v_i - v_j|` with monotone deques.
fn window_range(v: &[i64], w: usize) -> f64 {
    if w == 0 || v.len() < 2 {
        return 0.0;
    }
    let mut maxq: VecDeque<usize> = VecDeque::new();
    let mut minq: VecDeque<usize> = VecDeque::new();
    let mut best = 0i64;
    for j in 0..v.len() {
        while maxq.back().is_some_and(|&i| v[i] <= v[j]) {
            maxq.pop_back();
        }
        maxq.push_back(j);
        while minq.back().is_some_and(|&i| v[i] >= v[j]) {
            minq.pop_back();
        }
        minq.push_back(j);
        while maxq.front().is_some_and(|&i| i + w < j) {
            maxq.pop_front();
        }
        while minq.front().is_some_and(|&i| i + w < j) {
            minq.pop_front();
        }
        best = best.max(v[maxq[0]] - v[minq[0]]);
    }
    best as f64
}
