//! Exact return-time laws against Monte Carlo frequencies of the simulator.

use skewalk_core::lattice::*;
use skewalk_core::oracle::{return_time_pmf, DpOptions};
use skewalk_core::walks::{batch_estimate, BatchConfig, Statistic};

fn lazy() -> StepSpec {
    validate_step_spec(&LatticePmf::from_atoms(&[(-1, 0.25), (0, 0.5), (1, 0.25)]).unwrap(), StepRole::Step).unwrap()
}

fn models() -> Vec<(&'static str, WalkModel)> {
    let gamma = LatticePmf::from_atoms(&[(0, 0.1), (1, 0.6), (2, 0.3)]).unwrap();
    let y = WalkModel::new_y(lazy(), validate_step_spec(&gamma, StepRole::RestartY).unwrap()).unwrap();
    let eta = validate_step_spec(&LatticePmf::from_atoms(&[(-1, 0.5), (2, 0.5)]).unwrap(), StepRole::RestartX).unwrap();
    let skew = LatticePmf::from_atoms(&[(-2, 1.0 / 3.0), (1, 2.0 / 3.0)]).unwrap();
    let skew = validate_step_spec_with(&skew, StepRole::Step, Aperiodicity::TailOnly).unwrap();
    let x = WalkModel::new_x(lazy(), skew, eta).unwrap();
    vec![("y", y), ("x", x)]
}

#[test]
fn return_time_law_matches_simulation() {
    for (name, model) in models() {
        let table = return_time_pmf(&model, 64, DpOptions::default()).unwrap();
        for (k, m) in [1usize, 2, 5, 17, 64].into_iter().enumerate() {
            let cfg = BatchConfig { paths: 40_000, n: 0, seed: 1000 + k as u64, chunk_size: 512 };
            let tail = batch_estimate(&model, Statistic::Tail { m }, &cfg).unwrap();
            let exact = table.tail(m);
            let se = (exact * (1.0 - exact) / cfg.paths as f64).sqrt().max(1e-9);
            assert!((tail.mean - exact).abs() <= 4.0 * se, "{name} tail m={m}: {} vs {exact}", tail.mean);

            let local = batch_estimate(&model, Statistic::Local { m }, &cfg).unwrap();
            let exact = table.tau1_pmf[m];
            let se = (exact * (1.0 - exact) / cfg.paths as f64).sqrt().max(1e-9);
            assert!((local.mean - exact).abs() <= 4.0 * se, "{name} local m={m}: {} vs {exact}", local.mean);
        }
    }
}

#[test]
fn confidence_interval_shrinks_with_paths() {
    let (_, model) = models().remove(0);
    let width = |paths| {
        let cfg = BatchConfig { paths, n: 0, seed: 5, chunk_size: 256 };
        let e = batch_estimate(&model, Statistic::Tail { m: 10 }, &cfg).unwrap();
        e.ci_high - e.ci_low
    };
    let ratio = width(10_000) / width(40_000);
    assert!((ratio - 2.0).abs() < 0.1, "{ratio}");
}
