//! Perturbed-at-zero lattice random walks and their skew Brownian limits.
//!
//! * [`lattice`]: step laws, convolution, sampling, walk models.
//! * [`oracle`]: exact DP for killed walks, ladder heights, renewal functions,
//!   Spitzer constants, the skewness parameter, and return times.
//! * [`walks`]: seeded simulation and rescaling of the restarted chains.
//! * [`sbm`]: skew Brownian motion densities, two-time kernels, quadrature.
//! * [`verify`]: ratio checks against the oracle and Monte Carlo fit tests.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod extrapolate;
pub mod lattice;
pub mod oracle;
pub mod rng;
pub mod sbm;
pub mod verify;
pub mod walks;

pub use rng::RandomStream;
