//! Closed-form laws of skew and reflected Brownian motion, quadrature, and
//! an exact-marginal path sampler.

mod density;
pub mod quadrature;
mod sampler;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use density::{
    a1_kernel, a2_kernel, excursion_marginal, gauss_density, imck_identity, imck_quadrature,
    joint_density_from_zero, marginal_half_normal, meander_functional, meander_marginal, phi, phi_inv,
    skew_marginal_cdf, skew_marginal_quantile, skew_transition_cdf, skew_transition_density, SkewParams,
};
pub(crate) use density::{gauss, skew_cdf, skew_density};
pub use sampler::{sample_skew_path, skew_inverse_cdf};

/// Absolute tolerance for every quadrature in this module.
pub const QUAD_TOL: f64 = 1e-10;
/// Truncation of infinite ranges, in standard deviations.
pub const TRUNCATION_SD: f64 = 12.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SbmError {
    #[error("time must be positive, got {0}")]
    NonpositiveTime(f64),
    #[error("degenerate interval: need s1 < s < s2 (or s < t)")]
    DegenerateInterval,
    #[error("parameters must be positive")]
    NonpositiveParameter,
    #[error("alpha {0} outside [0, 1]")]
    InvalidAlpha(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// A density tabulated at Gauss–Kronrod nodes of equal panels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub values: Vec<f64>,
}

impl DensityGrid {
    pub fn tabulate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> Result<Self, SbmError> {
        if !(a < b) || panels == 0 {
            return Err(SbmError::InvalidInput(format!("grid range [{a}, {b}] with {panels} panels")));
        }
        let width = (b - a) / panels as f64;
        let mut grid = DensityGrid { nodes: vec![], weights: vec![], values: vec![] };
        for k in 0..panels {
            let lo = a + k as f64 * width;
            let hi = if k + 1 == panels { b } else { lo + width };
            let mut pts = quadrature::kronrod_nodes(lo, hi);
            pts.sort_by(|x, y| x.0.total_cmp(&y.0));
            for (x, w) in pts {
                grid.nodes.push(x);
                grid.weights.push(w);
                grid.values.push(f(x));
            }
        }
        Ok(grid)
    }

    pub fn integral(&self) -> f64 {
        self.weights.iter().zip(&self.values).map(|(w, v)| w * v).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("coordinate,density\n");
        for (x, v) in self.nodes.iter().zip(&self.values) {
            let _ = writeln!(out, "{x},{v}");
        }
        out
    }
}
