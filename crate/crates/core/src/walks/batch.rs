use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{interpolate, scale_value, simulate_into, PathBundle, WalkError};
use crate::lattice::WalkModel;
use crate::rng::RandomStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchConfig {
    pub paths: usize,
    pub n: usize,
    pub seed: u64,
    pub chunk_size: usize,
}

/// Applies `f` to every simulated path; path `i` uses stream `(seed, i)`.
///
/// Results come back in path order, so any sequential fold over them is
/// independent of the worker count.
pub fn map_paths<T, F>(model: &WalkModel, cfg: &BatchConfig, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&PathBundle) -> T + Sync,
{
    let chunk = cfg.chunk_size.max(1);
    let chunks = cfg.paths.div_ceil(chunk);
    let parts: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut buf = PathBundle::default();
            let end = ((c + 1) * chunk).min(cfg.paths);
            (c * chunk..end)
                .map(|i| {
                    let mut stream = RandomStream::new(cfg.seed, i as u64);
                    simulate_into(model, cfg.n, &mut stream, &mut buf);
                    f(&buf)
                })
                .collect()
        })
        .collect();
    parts.into_iter().flatten().collect()
}

/// Indicator statistics of one path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// `τ₁ > m`.
    Tail { m: usize },
    /// `τ₁ = m`.
    Local { m: usize },
    /// `X_n(t) <= u`.
    Marginal { t: f64, u: f64 },
    /// `X_n(s) <= u` and `X_n(t) <= v`.
    Joint { s: f64, t: f64, u: f64, v: f64 },
    /// `X_n(t) > 0`.
    Sign { t: f64 },
}

impl Statistic {
    fn horizon(&self, n: usize) -> Option<usize> {
        match *self {
            Statistic::Tail { m } | Statistic::Local { m } => Some(m),
            Statistic::Marginal { t, .. } | Statistic::Sign { t } => valid(t).then_some(n),
            Statistic::Joint { s, t, .. } => (valid(s) && valid(t)).then_some(n),
        }
    }

    fn indicator(&self, path: &PathBundle, n: usize, sigma: f64, sigma_prime: f64) -> bool {
        let at = |t: f64| scale_value(interpolate(&path.values, t * n as f64), n, sigma, sigma_prime);
        match *self {
            Statistic::Tail { m } => path.return_times.first().is_none_or(|&t| t > m),
            Statistic::Local { m } => path.return_times.first() == Some(&m),
            Statistic::Marginal { t, u } => at(t) <= u,
            Statistic::Joint { s, t, u, v } => at(s) <= u && at(t) <= v,
            Statistic::Sign { t } => at(t) > 0.0,
        }
    }
}

fn valid(t: f64) -> bool {
    (0.0..=1.0).contains(&t)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchEstimate {
    pub statistic: Statistic,
    pub paths: usize,
    pub successes: u64,
    pub mean: f64,
    pub std_error: f64,
    /// 95% normal-approximation interval.
    pub ci_low: f64,
    pub ci_high: f64,
}

pub fn batch_estimate(model: &WalkModel, statistic: Statistic, cfg: &BatchConfig) -> Result<BatchEstimate, WalkError> {
    if cfg.paths < 1000 {
        return Err(WalkError::InvalidInput("batch estimates need at least 1000 paths".into()));
    }
    let steps = statistic
        .horizon(cfg.n)
        .ok_or_else(|| WalkError::InvalidInput(format!("statistic {statistic:?} has a time outside [0, 1]")))?;
    let (sigma, sigma_prime) = (model.sigma(), model.sigma_prime());
    let local = BatchConfig { n: steps, ..*cfg };
    let hits = map_paths(model, &local, |p| statistic.indicator(p, cfg.n, sigma, sigma_prime));
    let successes = hits.iter().filter(|&&h| h).count() as u64;
    let mean = successes as f64 / cfg.paths as f64;
    let std_error = (mean * (1.0 - mean) / cfg.paths as f64).sqrt();
    Ok(BatchEstimate {
        statistic,
        paths: cfg.paths,
        successes,
        mean,
        std_error,
        ci_low: mean - 1.96 * std_error,
        ci_high: mean + 1.96 * std_error,
    })
}
