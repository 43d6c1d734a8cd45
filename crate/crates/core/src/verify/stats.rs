use std::collections::BTreeMap;

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Two-sided Kolmogorov distance between a sorted sample and a continuous law.
pub fn ks_statistic<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// Kolmogorov distances for a lattice-valued sample.
///
/// `raw` is the plain supremum distance. `corrected` compares the empirical
/// distribution function at each lattice point `j` with the reference law at
/// the midpoint `j + 1/2`, which removes the unavoidable jump of size `P[j]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeKs {
    pub corrected: f64,
    pub raw: f64,
}

pub fn ks_lattice<S, F>(counts: &BTreeMap<i64, u64>, scale: S, cdf: F) -> LatticeKs
where
    S: Fn(f64) -> f64,
    F: Fn(f64) -> f64,
{
    let total: u64 = counts.values().sum();
    if total == 0 {
        return LatticeKs { corrected: f64::NAN, raw: f64::NAN };
    }
    let n = total as f64;
    let (lo, hi) = (*counts.keys().next().unwrap(), *counts.keys().next_back().unwrap());
    let (mut corrected, mut raw): (f64, f64) = (0.0, 0.0);
    let mut below = 0u64;
    for j in lo - 1..=hi {
        let before = below as f64 / n;
        below += counts.get(&j).copied().unwrap_or(0);
        let at = below as f64 / n;
        let f = cdf(scale(j as f64));
        raw = raw.max((f - before).abs()).max((at - f).abs());
        corrected = corrected.max((at - cdf(scale(j as f64 + 0.5))).abs());
    }
    LatticeKs { corrected, raw }
}

/// Asymptotic Kolmogorov tail `P[√n D > λ]`.
pub fn kolmogorov_p_value(d: f64, n: usize) -> f64 {
    let lambda = d * (n as f64).sqrt();
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub min_expected: f64,
}

/// Pearson statistic with `df = cells - 1 - fitted`.
pub fn chi_square(observed: &[u64], expected: &[f64], fitted: usize) -> ChiSquare {
    assert_eq!(observed.len(), expected.len());
    let statistic = observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| {
            let d = o as f64 - e;
            d * d / e
        })
        .sum();
    let df = observed.len().saturating_sub(1 + fitted).max(1);
    let p_value = ChiSquared::new(df as f64).map(|c| c.sf(statistic)).unwrap_or(f64::NAN);
    let min_expected = expected.iter().copied().fold(f64::INFINITY, f64::min);
    ChiSquare { statistic, df, p_value, min_expected }
}

/// Merges every cell with expected count below `min` into one extra cell.
pub fn pool_small_cells(observed: &[u64], expected: &[f64], min: f64) -> (Vec<u64>, Vec<f64>) {
    let (mut o, mut e) = (Vec::new(), Vec::new());
    let (mut ro, mut re) = (0u64, 0.0);
    for (&oi, &ei) in observed.iter().zip(expected) {
        if ei < min {
            ro += oi;
            re += ei;
        } else {
            o.push(oi);
            e.push(ei);
        }
    }
    if re > 0.0 || ro > 0 {
        o.push(ro);
        e.push(re);
    }
    (o, e)
}
