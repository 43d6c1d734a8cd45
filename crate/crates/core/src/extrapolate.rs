//! First-order Richardson extrapolation in `n^{-1/2}`.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    /// Fitted `r∞`.
    pub limit: f64,
    /// Fitted `b` in `r(n) = r∞ + b n^{-1/2}`.
    pub slope: f64,
}

/// Solves `r(n) = r∞ + b n^{-1/2}` through the two largest `n`.
///
/// With a single point the limit is that point and the slope is zero.
pub fn richardson(ns: &[usize], rs: &[f64]) -> Extrapolation {
    assert_eq!(ns.len(), rs.len());
    assert!(!ns.is_empty(), "empty grid");
    let mut idx: Vec<usize> = (0..ns.len()).collect();
    idx.sort_by_key(|&i| ns[i]);
    let hi = idx[idx.len() - 1];
    if idx.len() == 1 {
        return Extrapolation { limit: rs[hi], slope: 0.0 };
    }
    let lo = idx[idx.len() - 2];
    let (u1, u2) = ((ns[lo] as f64).powf(-0.5), (ns[hi] as f64).powf(-0.5));
    let slope = (rs[lo] - rs[hi]) / (u1 - u2);
    Extrapolation { limit: rs[hi] - slope * u2, slope }
}
