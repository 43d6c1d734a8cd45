//! Finite-support integer distributions: validation, moments, convolution,
//! sampling, and the walk models built from them.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::rng::RandomStream;

/// Mass tolerance for a user-supplied pmf.
pub const MASS_TOLERANCE: f64 = 1e-12;
/// Atoms below this are dropped from the edges of convolution powers.
pub const PRUNE_BELOW: f64 = 1e-300;
/// Default cap on the support width of a convolution power.
pub const DEFAULT_SUPPORT_CAP: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LatticeError {
    #[error("pmf has no atoms")]
    Empty,
    #[error("pmf values must be strictly increasing (at {0})")]
    NotIncreasing(i64),
    #[error("probability {prob} at value {value} is outside [0, 1]")]
    InvalidProbability { value: i64, prob: f64 },
    #[error("pmf mass {0} differs from 1")]
    MassMismatch(f64),
    #[error("step law has mean {0}, expected 0")]
    NotCentered(f64),
    #[error("step law is periodic with span {0}")]
    Periodic(u64),
    #[error("restart law is a point mass at 0")]
    DegenerateRestart,
    #[error("restart law for the one-sided chain charges negative values")]
    NegativeRestartForY,
    #[error("support width {size} exceeds cap {cap}")]
    ResourceLimit { size: usize, cap: usize },
    #[error("malformed pmf text at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("walk model is inconsistent: {0}")]
    Model(String),
}

/// Finite-support pmf on the integers, stored densely from its minimum value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(i64, f64)>", into = "Vec<(i64, f64)>")]
pub struct LatticePmf {
    min: i64,
    probs: Vec<f64>,
}

impl LatticePmf {
    /// Validates and builds a pmf from `(value, prob)` atoms.
    pub fn from_atoms(atoms: &[(i64, f64)]) -> Result<Self, LatticeError> {
        if atoms.is_empty() {
            return Err(LatticeError::Empty);
        }
        for w in atoms.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(LatticeError::NotIncreasing(w[1].0));
            }
        }
        let mut total = 0.0;
        for &(value, prob) in atoms {
            if !(0.0..=1.0).contains(&prob) || !prob.is_finite() {
                return Err(LatticeError::InvalidProbability { value, prob });
            }
            total += prob;
        }
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(LatticeError::MassMismatch(total));
        }
        let min = atoms[0].0;
        let width = (atoms[atoms.len() - 1].0 - min) as usize + 1;
        let mut probs = vec![0.0; width];
        for &(v, p) in atoms {
            probs[(v - min) as usize] = p;
        }
        let pmf = Self::from_dense(min, probs);
        if pmf.probs.is_empty() {
            return Err(LatticeError::Empty);
        }
        Ok(pmf)
    }

    /// Builds from a dense vector without a mass check; zero edges are trimmed.
    pub(crate) fn from_dense(min: i64, mut probs: Vec<f64>) -> Self {
        let lead = probs.iter().take_while(|&&p| p == 0.0).count();
        if lead == probs.len() {
            return Self { min, probs: Vec::new() };
        }
        let trail = probs.iter().rev().take_while(|&&p| p == 0.0).count();
        probs.truncate(probs.len() - trail);
        probs.drain(..lead);
        Self { min: min + lead as i64, probs }
    }

    pub fn point_mass(value: i64) -> Self {
        Self { min: value, probs: vec![1.0] }
    }

    pub fn min_value(&self) -> i64 {
        self.min
    }

    pub fn max_value(&self) -> i64 {
        self.min + self.probs.len() as i64 - 1
    }

    /// Dense probabilities for `min_value()..=max_value()`.
    pub fn dense(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, value: i64) -> f64 {
        if value < self.min {
            return 0.0;
        }
        self.probs.get((value - self.min) as usize).copied().unwrap_or(0.0)
    }

    /// Atoms with positive probability, in increasing order.
    pub fn atoms(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(move |(i, &p)| (self.min + i as i64, p))
    }

    pub fn support(&self) -> Vec<i64> {
        self.atoms().map(|(v, _)| v).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn prob_ge(&self, value: i64) -> f64 {
        self.atoms().filter(|&(v, _)| v >= value).map(|(_, p)| p).sum()
    }

    pub fn prob_le(&self, value: i64) -> f64 {
        self.atoms().filter(|&(v, _)| v <= value).map(|(_, p)| p).sum()
    }

    /// Law of `-X`.
    pub fn negate(&self) -> Self {
        let mut probs = self.probs.clone();
        probs.reverse();
        Self { min: -self.max_value(), probs }
    }

    /// Expectation of `f` over the pmf.
    pub fn expect(&self, mut f: impl FnMut(i64) -> f64) -> f64 {
        self.atoms().map(|(v, p)| p * f(v)).sum()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (v, p) in self.atoms() {
            out.push_str(&format!("{v}\t{p:e}\n"));
        }
        out
    }

    /// Parses the `value<TAB>probability` format; `#` starts a comment.
    pub fn parse_text(text: &str) -> Result<Self, LatticeError> {
        let mut atoms = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(v), Some(p), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(LatticeError::Parse { line: i + 1, msg: "expected two fields".into() });
            };
            let value = v
                .parse::<i64>()
                .map_err(|e| LatticeError::Parse { line: i + 1, msg: e.to_string() })?;
            let prob = parse_probability(p)
                .ok_or_else(|| LatticeError::Parse { line: i + 1, msg: format!("bad probability {p:?}") })?;
            atoms.push((value, prob));
        }
        atoms.sort_by_key(|a| a.0);
        Self::from_atoms(&atoms)
    }
}

/// Accepts decimals and simple fractions such as `1/3`.
pub fn parse_probability(s: &str) -> Option<f64> {
    if let Some((a, b)) = s.split_once('/') {
        let a: f64 = a.trim().parse().ok()?;
        let b: f64 = b.trim().parse().ok()?;
        (b != 0.0).then_some(a / b)
    } else {
        s.trim().parse().ok()
    }
}

impl TryFrom<Vec<(i64, f64)>> for LatticePmf {
    type Error = LatticeError;
    fn try_from(atoms: Vec<(i64, f64)>) -> Result<Self, Self::Error> {
        Self::from_atoms(&atoms)
    }
}

impl From<LatticePmf> for Vec<(i64, f64)> {
    fn from(p: LatticePmf) -> Self {
        p.atoms().collect()
    }
}

impl FromStr for LatticePmf {
    type Err = LatticeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse_text(s)
    }
}

impl fmt::Display for LatticePmf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Mean and variance as exact finite sums.
pub fn moments(pmf: &LatticePmf) -> (f64, f64) {
    let mean = pmf.expect(|v| v as f64);
    let var = pmf.expect(|v| {
        let d = v as f64 - mean;
        d * d
    });
    (mean, var)
}

pub fn convolve(a: &LatticePmf, b: &LatticePmf) -> LatticePmf {
    let mut out = vec![0.0; a.probs.len() + b.probs.len() - 1];
    for (j, &q) in b.probs.iter().enumerate() {
        if q == 0.0 {
            continue;
        }
        for (o, &p) in out[j..].iter_mut().zip(&a.probs) {
            *o += p * q;
        }
    }
    LatticePmf::from_dense(a.min + b.min, out)
}

fn prune_edges(p: LatticePmf) -> LatticePmf {
    let mut probs = p.probs;
    for x in probs.iter_mut() {
        if *x < PRUNE_BELOW {
            *x = 0.0;
        } else {
            break;
        }
    }
    for x in probs.iter_mut().rev() {
        if *x < PRUNE_BELOW {
            *x = 0.0;
        } else {
            break;
        }
    }
    LatticePmf::from_dense(p.min, probs)
}

/// Law of `S(k)` by binary exponentiation.
pub fn nth_convolution(p: &LatticePmf, k: usize, cap: usize) -> Result<LatticePmf, LatticeError> {
    assert!(k >= 1, "nth_convolution needs k >= 1");
    let width = (p.probs.len() - 1).saturating_mul(k) + 1;
    if width > cap {
        return Err(LatticeError::ResourceLimit { size: width, cap });
    }
    let mut result: Option<LatticePmf> = None;
    let mut base = p.clone();
    let mut k = k;
    loop {
        if k & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => prune_edges(convolve(&r, &base)),
            });
        }
        k >>= 1;
        if k == 0 {
            break;
        }
        base = prune_edges(convolve(&base, &base));
    }
    Ok(result.expect("k >= 1"))
}

/// Successive laws of `S(1), S(2), ...` by one-step convolution.
pub struct ConvolutionPowers {
    step: LatticePmf,
    current: Option<LatticePmf>,
}

impl ConvolutionPowers {
    pub fn new(step: &LatticePmf) -> Self {
        Self { step: step.clone(), current: None }
    }
}

impl Iterator for ConvolutionPowers {
    type Item = LatticePmf;
    fn next(&mut self) -> Option<LatticePmf> {
        let next = match &self.current {
            None => self.step.clone(),
            Some(c) => prune_edges(convolve(c, &self.step)),
        };
        self.current = Some(next.clone());
        Some(next)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// gcd of pairwise support differences; 0 for a point mass.
pub fn span_gcd(pmf: &LatticePmf) -> u64 {
    let support = pmf.support();
    let first = support[0];
    support[1..].iter().fold(0, |g, &v| gcd(g, (v - first) as u64))
}

fn support_gcd(pmf: &LatticePmf) -> u64 {
    pmf.atoms().fold(0, |g, (v, _)| gcd(g, v.unsigned_abs()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRole {
    Step,
    RestartY,
    RestartX,
}

/// How strictly a step law's lattice structure is checked.
///
/// `Strict` demands span 1. `TailOnly` accepts periodic laws whose support
/// still generates the integers; first-passage tails and renewal functions are
/// well defined for them, local limits are not.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aperiodicity {
    #[default]
    Strict,
    TailOnly,
}

/// A validated law plus its alias table.
#[derive(Clone, Debug)]
pub struct StepSpec {
    pub pmf: LatticePmf,
    pub mean: f64,
    pub variance: f64,
    pub span_gcd: u64,
    pub min_step: i64,
    pub max_step: i64,
    pub role: StepRole,
    values: Vec<i64>,
    alias: WeightedAliasIndex<f64>,
}

impl StepSpec {
    pub fn sigma(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn is_aperiodic(&self) -> bool {
        self.span_gcd == 1
    }

    /// Same spec with the sign flipped (role kept).
    pub fn negated(&self) -> StepSpec {
        build_spec(self.pmf.negate(), self.role)
    }

    pub fn sample(&self, stream: &mut RandomStream) -> i64 {
        sample(self, stream)
    }
}

fn build_spec(pmf: LatticePmf, role: StepRole) -> StepSpec {
    let (mean, variance) = moments(&pmf);
    let atoms: Vec<(i64, f64)> = pmf.atoms().collect();
    let values = atoms.iter().map(|a| a.0).collect();
    let alias = WeightedAliasIndex::new(atoms.iter().map(|a| a.1).collect())
        .expect("validated pmf has positive mass");
    StepSpec {
        span_gcd: span_gcd(&pmf),
        min_step: pmf.min_value(),
        max_step: pmf.max_value(),
        pmf,
        mean,
        variance,
        role,
        values,
        alias,
    }
}

pub fn validate_step_spec(pmf: &LatticePmf, role: StepRole) -> Result<StepSpec, LatticeError> {
    validate_step_spec_with(pmf, role, Aperiodicity::Strict)
}

pub fn validate_step_spec_with(
    pmf: &LatticePmf,
    role: StepRole,
    policy: Aperiodicity,
) -> Result<StepSpec, LatticeError> {
    let total = pmf.total_mass();
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(LatticeError::MassMismatch(total));
    }
    let spec = build_spec(pmf.clone(), role);
    match role {
        StepRole::Step => {
            if spec.mean.abs() > MASS_TOLERANCE {
                return Err(LatticeError::NotCentered(spec.mean));
            }
            let ok = match policy {
                Aperiodicity::Strict => spec.span_gcd == 1,
                Aperiodicity::TailOnly => support_gcd(pmf) == 1,
            };
            if !ok {
                return Err(LatticeError::Periodic(spec.span_gcd));
            }
        }
        StepRole::RestartY => {
            if pmf.min_value() < 0 {
                return Err(LatticeError::NegativeRestartForY);
            }
            if pmf.prob(0) >= 1.0 {
                return Err(LatticeError::DegenerateRestart);
            }
        }
        StepRole::RestartX => {
            if pmf.prob(0) >= 1.0 {
                return Err(LatticeError::DegenerateRestart);
            }
        }
    }
    Ok(spec)
}

/// One draw by alias-table lookup.
pub fn sample(spec: &StepSpec, stream: &mut RandomStream) -> i64 {
    spec.values[spec.alias.sample(stream)]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    /// Two-sided chain restarted by `eta` at zero.
    X,
    /// One-sided chain restarted by `gamma` at zero.
    Y,
}

#[derive(Clone, Debug)]
pub struct WalkModel {
    pub kind: ModelKind,
    pub xi: StepSpec,
    pub xi_prime: Option<StepSpec>,
    pub restart: StepSpec,
}

impl WalkModel {
    pub fn new_x(xi: StepSpec, xi_prime: StepSpec, eta: StepSpec) -> Result<Self, LatticeError> {
        if xi.role != StepRole::Step || xi_prime.role != StepRole::Step {
            return Err(LatticeError::Model("xi and xi' must be validated as steps".into()));
        }
        if eta.role != StepRole::RestartX {
            return Err(LatticeError::Model("eta must be validated as an X restart".into()));
        }
        Ok(Self { kind: ModelKind::X, xi, xi_prime: Some(xi_prime), restart: eta })
    }

    pub fn new_y(xi: StepSpec, gamma: StepSpec) -> Result<Self, LatticeError> {
        if xi.role != StepRole::Step {
            return Err(LatticeError::Model("xi must be validated as a step".into()));
        }
        if gamma.role != StepRole::RestartY {
            return Err(LatticeError::Model("gamma must be validated as a Y restart".into()));
        }
        Ok(Self { kind: ModelKind::Y, xi, xi_prime: None, restart: gamma })
    }

    pub fn sigma(&self) -> f64 {
        self.xi.sigma()
    }

    /// Scale on the negative half-line; equals `sigma()` for the one-sided chain.
    pub fn sigma_prime(&self) -> f64 {
        self.xi_prime.as_ref().map_or(self.sigma(), |s| s.sigma())
    }

    /// Step law driving the walk on the negative side.
    pub fn negative_step(&self) -> Option<&StepSpec> {
        self.xi_prime.as_ref()
    }
}

/// Exact rational pmf for small golden computations.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactPmf {
    min: i64,
    probs: Vec<BigRational>,
}

impl ExactPmf {
    /// Atoms as `(value, numerator, denominator)`.
    pub fn from_fractions(atoms: &[(i64, i64, i64)]) -> Result<Self, LatticeError> {
        if atoms.is_empty() {
            return Err(LatticeError::Empty);
        }
        let min = atoms.iter().map(|a| a.0).min().unwrap();
        let max = atoms.iter().map(|a| a.0).max().unwrap();
        let mut probs = vec![BigRational::zero(); (max - min) as usize + 1];
        for &(v, n, d) in atoms {
            probs[(v - min) as usize] += BigRational::new(BigInt::from(n), BigInt::from(d));
        }
        let total: BigRational = probs.iter().cloned().sum();
        if !total.is_one() {
            return Err(LatticeError::MassMismatch(total.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Self { min, probs })
    }

    pub fn prob(&self, value: i64) -> BigRational {
        if value < self.min {
            return BigRational::zero();
        }
        self.probs.get((value - self.min) as usize).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn prob_ge(&self, value: i64) -> BigRational {
        self.probs
            .iter()
            .enumerate()
            .filter(|(i, _)| self.min + *i as i64 >= value)
            .map(|(_, p)| p.clone())
            .sum()
    }

    pub fn convolve(&self, other: &Self) -> Self {
        let mut out = vec![BigRational::zero(); self.probs.len() + other.probs.len() - 1];
        for (i, p) in self.probs.iter().enumerate() {
            for (j, q) in other.probs.iter().enumerate() {
                out[i + j] += p * q;
            }
        }
        Self { min: self.min + other.min, probs: out }
    }

    pub fn nth_convolution(&self, k: usize) -> Self {
        assert!(k >= 1);
        let mut acc = self.clone();
        for _ in 1..k {
            acc = acc.convolve(self);
        }
        acc
    }

    pub fn to_lattice(&self) -> LatticePmf {
        LatticePmf::from_dense(self.min, self.probs.iter().map(|p| p.to_f64().unwrap()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn lazy() -> LatticePmf {
        LatticePmf::from_atoms(&[(-1, 0.25), (0, 0.5), (1, 0.25)]).unwrap()
    }

    #[test]
    fn rejects_bad_atoms() {
        assert_eq!(LatticePmf::from_atoms(&[]), Err(LatticeError::Empty));
        assert!(matches!(
            LatticePmf::from_atoms(&[(1, 0.5), (0, 0.5)]),
            Err(LatticeError::NotIncreasing(0))
        ));
        assert!(matches!(
            LatticePmf::from_atoms(&[(0, 0.5), (1, 0.4)]),
            Err(LatticeError::MassMismatch(_))
        ));
    }

    #[test]
    fn lazy_moments_and_span() {
        let spec = validate_step_spec(&lazy(), StepRole::Step).unwrap();
        assert_eq!(spec.mean, 0.0);
        assert_abs_diff_eq!(spec.variance, 0.5, epsilon = 1e-15);
        assert_eq!(spec.span_gcd, 1);
    }

    #[test]
    fn bernoulli_is_periodic() {
        let b = LatticePmf::from_atoms(&[(-1, 0.5), (1, 0.5)]).unwrap();
        assert_eq!(validate_step_spec(&b, StepRole::Step).unwrap_err(), LatticeError::Periodic(2));
        assert!(validate_step_spec_with(&b, StepRole::Step, Aperiodicity::TailOnly).is_ok());
    }

    #[test]
    fn uncentered_step_rejected() {
        let p = LatticePmf::from_atoms(&[(-1, 0.25), (1, 0.75)]).unwrap();
        assert!(matches!(validate_step_spec(&p, StepRole::Step), Err(LatticeError::NotCentered(_))));
    }

    #[test]
    fn restart_rules() {
        let zero = LatticePmf::point_mass(0);
        assert_eq!(
            validate_step_spec(&zero, StepRole::RestartY).unwrap_err(),
            LatticeError::DegenerateRestart
        );
        let neg = LatticePmf::from_atoms(&[(-1, 0.5), (2, 0.5)]).unwrap();
        assert_eq!(
            validate_step_spec(&neg, StepRole::RestartY).unwrap_err(),
            LatticeError::NegativeRestartForY
        );
        assert!(validate_step_spec(&neg, StepRole::RestartX).is_ok());
    }

    #[test]
    fn convolution_examples() {
        let l2 = convolve(&lazy(), &lazy());
        let want = [(-2, 1.0 / 16.0), (-1, 0.25), (0, 0.375), (1, 0.25), (2, 1.0 / 16.0)];
        for (v, p) in want {
            assert_abs_diff_eq!(l2.prob(v), p, epsilon = 1e-15);
        }
        let b = LatticePmf::from_atoms(&[(-1, 0.5), (1, 0.5)]).unwrap();
        let b2 = convolve(&b, &b);
        assert_eq!(b2.support(), vec![-2, 0, 2]);
        assert_abs_diff_eq!(b2.prob(0), 0.5, epsilon = 1e-15);
        assert_eq!(convolve(&LatticePmf::point_mass(0), &lazy()), lazy());
    }

    #[test]
    fn nth_convolution_examples() {
        let s2 = nth_convolution(&lazy(), 2, DEFAULT_SUPPORT_CAP).unwrap();
        assert_abs_diff_eq!(s2.prob_ge(0), 11.0 / 16.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s2.prob(0), 3.0 / 8.0, epsilon = 1e-15);
        assert_eq!(nth_convolution(&lazy(), 1, DEFAULT_SUPPORT_CAP).unwrap(), lazy());
        assert!(matches!(
            nth_convolution(&lazy(), 1000, 100),
            Err(LatticeError::ResourceLimit { .. })
        ));
    }

    #[test]
    fn powers_match_binary_exponentiation() {
        let p = LatticePmf::from_atoms(&[(-2, 1.0 / 3.0), (1, 2.0 / 3.0)]).unwrap();
        let it: Vec<_> = ConvolutionPowers::new(&p).take(37).collect();
        let direct = nth_convolution(&p, 37, DEFAULT_SUPPORT_CAP).unwrap();
        for v in direct.min_value()..=direct.max_value() {
            assert_abs_diff_eq!(it[36].prob(v), direct.prob(v), epsilon = 1e-14);
        }
    }

    #[test]
    fn exact_mode_agrees() {
        let e = ExactPmf::from_fractions(&[(-1, 1, 4), (0, 1, 2), (1, 1, 4)]).unwrap();
        let e2 = e.nth_convolution(2);
        assert_eq!(e2.prob_ge(0), BigRational::new(11.into(), 16.into()));
        assert_eq!(e2.prob(0), BigRational::new(3.into(), 8.into()));
        assert_eq!(e2.to_lattice(), convolve(&lazy(), &lazy()));
    }

    #[test]
    fn text_roundtrip() {
        let text = "# lazy walk\n-1\t0.25\n0\t1/2   # half\n1\t0.25\n";
        let p: LatticePmf = text.parse().unwrap();
        assert_eq!(p, lazy());
        assert_eq!(LatticePmf::parse_text(&p.to_text()).unwrap(), p);
        assert!(matches!(LatticePmf::parse_text("1\n"), Err(LatticeError::Parse { line: 1, .. })));
    }

    #[test]
    fn point_mass_sampling_is_constant() {
        let spec = validate_step_spec(&LatticePmf::point_mass(3), StepRole::RestartY).unwrap();
        let mut s = RandomStream::new(5, 0);
        assert!((0..1000).all(|_| sample(&spec, &mut s) == 3));
    }

    #[test]
    fn negate_flips_support() {
        let p = LatticePmf::from_atoms(&[(-2, 1.0 / 3.0), (1, 2.0 / 3.0)]).unwrap();
        let n = p.negate();
        assert_eq!(n.support(), vec![-1, 2]);
        assert_abs_diff_eq!(n.prob(2), 1.0 / 3.0);
    }
}
