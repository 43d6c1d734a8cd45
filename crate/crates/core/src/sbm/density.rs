use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use super::quadrature::integrate;
use super::{SbmError, QUAD_TOL};

/// Standard normal distribution function.
pub fn phi(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Inverse of [`phi`] on `(0, 1)`, polished by two Newton steps.
pub fn phi_inv(p: f64) -> f64 {
    let mut z = -SQRT_2 * erfc_inv(2.0 * p);
    for _ in 0..2 {
        let d = gauss(1.0, z);
        if d > 0.0 && z.is_finite() {
            z -= (phi(z) - p) / d;
        }
    }
    z
}

fn check_time(t: f64) -> Result<(), SbmError> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(SbmError::NonpositiveTime(t))
    }
}

fn check_alpha(alpha: f64) -> Result<(), SbmError> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(SbmError::InvalidAlpha(alpha))
    }
}

/// `p_t(x) = e^{-x²/2t}/√(2πt)`.
pub fn gauss_density(t: f64, x: f64) -> Result<f64, SbmError> {
    check_time(t)?;
    Ok(gauss(t, x))
}

#[inline]
pub(crate) fn gauss(t: f64, x: f64) -> f64 {
    (-x * x / (2.0 * t)).exp() / (2.0 * PI * t).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkewParams {
    pub alpha: f64,
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

/// Transition density of skew Brownian motion.
///
/// At `y = 0` the `y > 0` branch is used.
pub fn skew_transition_density(p: SkewParams) -> Result<f64, SbmError> {
    check_time(p.t)?;
    check_alpha(p.alpha)?;
    Ok(skew_density(p.alpha, p.t, p.x, p.y))
}

pub(crate) fn skew_density(alpha: f64, t: f64, x: f64, y: f64) -> f64 {
    let up = y >= 0.0;
    if x == 0.0 {
        if up {
            2.0 * alpha * gauss(t, y)
        } else {
            2.0 * (1.0 - alpha) * gauss(t, y)
        }
    } else if x > 0.0 {
        if up {
            gauss(t, y - x) + (2.0 * alpha - 1.0) * gauss(t, x + y)
        } else {
            2.0 * (1.0 - alpha) * gauss(t, y - x)
        }
    } else if up {
        2.0 * alpha * gauss(t, y - x)
    } else {
        gauss(t, y - x) + (1.0 - 2.0 * alpha) * gauss(t, y + x)
    }
}

/// `P_x[B^α_t <= c]` in closed form.
pub fn skew_transition_cdf(alpha: f64, t: f64, x: f64, c: f64) -> Result<f64, SbmError> {
    check_time(t)?;
    check_alpha(alpha)?;
    Ok(skew_cdf(alpha, t, x, c))
}

pub(crate) fn skew_cdf(alpha: f64, t: f64, x: f64, c: f64) -> f64 {
    if x < 0.0 {
        // Mirror: -B^α from x is B^{1-α} from -x.
        return 1.0 - skew_cdf(1.0 - alpha, t, -x, -c);
    }
    let r = t.sqrt();
    if c < 0.0 {
        2.0 * (1.0 - alpha) * phi((c - x) / r)
    } else {
        2.0 * (1.0 - alpha) * phi(-x / r) + (phi((c - x) / r) - phi(-x / r))
            + (2.0 * alpha - 1.0) * (phi((c + x) / r) - phi(x / r))
    }
}

/// Law of `B^α_t` from 0: distribution function.
pub fn skew_marginal_cdf(alpha: f64, t: f64, u: f64) -> f64 {
    skew_cdf(alpha, t, 0.0, u)
}

/// Quantile of `B^α_t` from 0.
pub fn skew_marginal_quantile(alpha: f64, t: f64, p: f64) -> f64 {
    let r = t.sqrt();
    if p < 1.0 - alpha {
        r * phi_inv(p / (2.0 * (1.0 - alpha)))
    } else if alpha == 0.0 {
        0.0
    } else {
        r * phi_inv(0.5 + (p - (1.0 - alpha)) / (2.0 * alpha))
    }
}

/// `2e^{-u²/2t}/√(2πt)` on `u >= 0`, zero below.
pub fn marginal_half_normal(t: f64, u: f64) -> Result<f64, SbmError> {
    check_time(t)?;
    Ok(if u < 0.0 { 0.0 } else { 2.0 * gauss(t, u) })
}

/// Density of `z√(1-t)` for Rayleigh `z`; at `t = 0` this is `z e^{-z²/2}`.
pub fn meander_marginal(t_frac: f64, z: f64) -> f64 {
    let w = 1.0 - t_frac;
    if z < 0.0 || !(w > 0.0 && w <= 1.0) {
        return 0.0;
    }
    z / w * (-z * z / (2.0 * w)).exp()
}

/// `∫₀^∞ φ(z√(1-t)) z e^{-z²/2} dz`.
pub fn meander_functional<F: Fn(f64) -> f64>(phi_fn: F, t: f64) -> Result<f64, SbmError> {
    if !(0.0..1.0).contains(&t) {
        return Err(SbmError::InvalidInput(format!("meander time fraction {t} not in [0, 1)")));
    }
    let s = (1.0 - t).sqrt();
    Ok(integrate(|z| phi_fn(z * s) * meander_marginal(0.0, z), 0.0, 12.0, QUAD_TOL).value)
}

/// Endpoint density at time `s` of the excursion straddling `(s1, s2)`.
pub fn excursion_marginal(s1: f64, s: f64, s2: f64, v: f64) -> Result<f64, SbmError> {
    if !(s1 < s && s < s2) {
        return Err(SbmError::DegenerateInterval);
    }
    if v < 0.0 {
        return Ok(0.0);
    }
    let tau = (s - s1) * (s2 - s) / (s2 - s1);
    Ok(2.0 / (2.0 * PI).sqrt() * v * v * (-v * v / (2.0 * tau)).exp() / tau.powf(1.5))
}

/// `p^α_s(0, v) p^α_{t-s}(v, u)`.
pub fn joint_density_from_zero(alpha: f64, s: f64, t: f64, v: f64, u: f64) -> Result<f64, SbmError> {
    check_alpha(alpha)?;
    check_time(s)?;
    if t <= s {
        return Err(SbmError::DegenerateInterval);
    }
    Ok(skew_density(alpha, s, 0.0, v) * skew_density(alpha, t - s, v, u))
}

fn side_weight(alpha: f64, x: f64) -> f64 {
    if x >= 0.0 {
        alpha
    } else {
        1.0 - alpha
    }
}

/// Joint density of `(B^α_s, B^α_t)` on the event that the path hits 0 in `(s, t)`:
/// `4 w(v) w(u) p_s(|v|) p_{t-s}(|u| + |v|)` with `w = α` above 0, `1-α` below.
/// For `α = 1` this is `(2/(π√(s(t-s)))) e^{-v²/2s} e^{-(u+v)²/2(t-s)}`.
pub fn a1_kernel(alpha: f64, s: f64, t: f64, v: f64, u: f64) -> Result<f64, SbmError> {
    check_alpha(alpha)?;
    check_time(s)?;
    if t <= s {
        return Err(SbmError::DegenerateInterval);
    }
    Ok(4.0 * side_weight(alpha, v) * side_weight(alpha, u) * gauss(s, v) * gauss(t - s, u.abs() + v.abs()))
}

/// Joint density on the event of no zero in `(s, t)`: the sign is kept and the
/// path is killed at 0, `2 w(v) p_s(|v|)(p_{t-s}(|v|-|u|) - p_{t-s}(|v|+|u|))`.
pub fn a2_kernel(alpha: f64, s: f64, t: f64, v: f64, u: f64) -> Result<f64, SbmError> {
    check_alpha(alpha)?;
    check_time(s)?;
    if t <= s {
        return Err(SbmError::DegenerateInterval);
    }
    if (v >= 0.0) != (u >= 0.0) {
        return Ok(0.0);
    }
    let (a, b) = (v.abs(), u.abs());
    Ok(2.0 * side_weight(alpha, v) * gauss(s, v) * (gauss(t - s, a - b) - gauss(t - s, a + b)))
}

/// `√(π/a) e^{-2√(ab)}`.
pub fn imck_identity(a: f64, b: f64) -> Result<f64, SbmError> {
    if !(a > 0.0) || !(b >= 0.0) {
        return Err(SbmError::NonpositiveParameter);
    }
    Ok((PI / a).sqrt() * (-2.0 * (a * b).sqrt()).exp())
}

/// `∫₀^∞ t^{-1/2} e^{-at-b/t} dt` by quadrature after `t = w²`.
pub fn imck_quadrature(a: f64, b: f64) -> Result<f64, SbmError> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(SbmError::NonpositiveParameter);
    }
    let peak = (b / a).powf(0.25);
    let floor = 2.0 * (a * b).sqrt();
    // a w² >= 2√(ab) + 60 makes the neglected tail below e^{-60} of the peak.
    let upper = ((floor + 60.0) / a).sqrt().max(2.0 * peak);
    let f = |w: f64| if w == 0.0 { 0.0 } else { 2.0 * (-a * w * w - b / (w * w)).exp() };
    let scale = (-floor).exp();
    Ok(integrate(f, 0.0, upper, QUAD_TOL * scale.min(1.0)).value)
}
