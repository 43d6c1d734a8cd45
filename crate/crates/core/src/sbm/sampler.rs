use super::{skew_cdf, skew_density, skew_marginal_quantile, SbmError, TRUNCATION_SD};
use crate::rng::RandomStream;

/// Solves `P_x[B^α_t <= c] = p` for `c`.
///
/// From 0 the quantile is closed form; otherwise Newton steps on the exact
/// distribution function, falling back to bisection whenever a step leaves
/// the current bracket.
pub fn skew_inverse_cdf(alpha: f64, t: f64, x: f64, p: f64) -> Result<f64, SbmError> {
    if !(t > 0.0) {
        return Err(SbmError::NonpositiveTime(t));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(SbmError::InvalidAlpha(alpha));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(SbmError::InvalidInput(format!("probability {p} not in (0, 1)")));
    }
    if x == 0.0 {
        return Ok(skew_marginal_quantile(alpha, t, p));
    }
    let r = t.sqrt();
    let pad = 3.0 * TRUNCATION_SD * r;
    let (mut lo, mut hi) = (x.min(0.0) - pad, x.max(0.0) + pad);
    let mut c = x;
    let tol = 1e-14 * (r + x.abs());
    for _ in 0..200 {
        let f = skew_cdf(alpha, t, x, c) - p;
        if f == 0.0 {
            return Ok(c);
        }
        if f < 0.0 {
            lo = c;
        } else {
            hi = c;
        }
        if hi - lo <= tol {
            break;
        }
        let d = skew_density(alpha, t, x, c);
        let newton = c - f / d;
        c = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (c - lo).min(hi - c) <= tol && d > 0.0 {
            break;
        }
    }
    Ok(c)
}

/// One path of `B^α` started at 0, observed at increasing `times`.
///
/// Each value is drawn from the exact transition law given the previous one.
pub fn sample_skew_path(alpha: f64, times: &[f64], stream: &mut RandomStream) -> Result<Vec<f64>, SbmError> {
    let mut out = Vec::with_capacity(times.len());
    let (mut prev_t, mut x) = (0.0, 0.0);
    for &t in times {
        let dt = t - prev_t;
        if !(dt > 0.0) {
            return Err(SbmError::NonpositiveTime(dt));
        }
        let mut u = stream.uniform();
        while u == 0.0 {
            u = stream.uniform();
        }
        x = skew_inverse_cdf(alpha, dt, x, u)?;
        out.push(x);
        prev_t = t;
    }
    Ok(out)
}
