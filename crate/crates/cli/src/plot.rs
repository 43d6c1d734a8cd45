use std::fmt::Write as _;

use serde_json::Value;
use skewalk_core::sbm::{skew_transition_density, SkewParams};
use skewalk_core::verify::VerificationReport;

use crate::CliError;

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn malformed(which: &str) -> CliError {
    CliError::Failed(format!("check {which:?} has no plottable numbers"))
}

/// Plot-ready CSV for one named check of a report.
///
/// Ratio checks give `n,ratio`; the marginal check gives empirical and
/// reference densities; the joint check gives the binned heat map.
pub fn emit_plotdata(report: &VerificationReport, which: &str) -> Result<String, CliError> {
    let rec = report.find(which).ok_or_else(|| CliError::UnknownCurve(which.into()))?;
    let n = &rec.numbers;
    if let Some(ratio) = n.get("ratio").or_else(|| n.get("raw_ratios").map(|_| n)) {
        return ratio_csv(ratio).ok_or_else(|| malformed(which));
    }
    if n.get("counts").is_some() {
        return marginal_csv(n).ok_or_else(|| malformed(which));
    }
    if n.get("bins").is_some() {
        return joint_csv(n).ok_or_else(|| malformed(which));
    }
    Err(CliError::UnknownCurve(which.into()))
}

fn ratio_csv(r: &Value) -> Option<String> {
    let ns = r.get("n_grid")?.as_array()?;
    let rs = r.get("raw_ratios")?.as_array()?;
    let mut out = String::from("n,ratio\n");
    for (n, v) in ns.iter().zip(rs) {
        let _ = writeln!(out, "{},{}", n.as_u64()?, num(v));
    }
    Some(out)
}

fn marginal_csv(m: &Value) -> Option<String> {
    let (t, n, alpha) = (num(m.get("t")?), m.get("n")?.as_u64()? as f64, num(m.get("alpha")?));
    let (sigma, sigma_prime) = (num(m.get("sigma")?), num(m.get("sigma_prime")?));
    let counts = m.get("counts")?.as_array()?;
    let total: f64 = counts.iter().filter_map(|c| c.get(1)?.as_u64()).sum::<u64>() as f64;
    let mut out = String::from("u,empirical_density,reference_density\n");
    for c in counts {
        let v = c.get(0)?.as_i64()?;
        let k = c.get(1)?.as_u64()? as f64;
        let s = if v >= 0 { sigma } else { sigma_prime };
        let width = 1.0 / (s * n.sqrt());
        let u = v as f64 * width;
        let reference = skew_transition_density(SkewParams { alpha, t, x: 0.0, y: u }).ok()?;
        let _ = writeln!(out, "{u},{},{reference}", k / (total * width));
    }
    Some(out)
}

fn edge(v: &Value, first: bool) -> f64 {
    match v.as_f64() {
        Some(x) => x,
        None if first => f64::NEG_INFINITY,
        None => f64::INFINITY,
    }
}

fn joint_csv(j: &Value) -> Option<String> {
    let bins = j.get("bins")?;
    let rows = bins.get("rows")?.as_array()?;
    let columns = bins.get("columns")?.as_array()?;
    let observed = j.get("observed")?.as_array()?;
    let expected = j.get("expected")?.as_array()?;
    let b = rows.len() - 1;
    let mut out = String::from("row,column,s_low,s_high,t_low,t_high,observed,expected\n");
    for i in 0..b {
        let cols = columns.get(i)?.as_array()?;
        for k in 0..b {
            let c = i * b + k;
            let _ = writeln!(
                out,
                "{i},{k},{},{},{},{},{},{}",
                edge(&rows[i], i == 0),
                edge(&rows[i + 1], false),
                edge(&cols[k], k == 0),
                edge(&cols[k + 1], false),
                observed.get(c)?.as_u64()?,
                num(expected.get(c)?)
            );
        }
    }
    Some(out)
}
