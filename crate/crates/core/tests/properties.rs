use proptest::prelude::*;
use rayon::ThreadPoolBuilder;
use skewalk_core::lattice::*;
use skewalk_core::oracle::{spitzer_terms, SpitzerSide};
use skewalk_core::walks::{map_paths, simulate_into, transition_x, transition_y, BatchConfig, Branch, PathBundle};
use skewalk_core::RandomStream;

fn pmf_strategy() -> impl Strategy<Value = LatticePmf> {
    (-4i64..=0, prop::collection::vec(0.0f64..1.0, 1..6)).prop_filter_map("positive mass", |(lo, w)| {
        let total: f64 = w.iter().sum();
        if total <= 1e-3 {
            return None;
        }
        let atoms: Vec<(i64, f64)> = w.iter().enumerate().map(|(i, &x)| (lo + i as i64, x / total)).collect();
        LatticePmf::from_atoms(&atoms).ok()
    })
}

fn close(a: &LatticePmf, b: &LatticePmf) -> bool {
    let lo = a.min_value().min(b.min_value());
    let hi = a.max_value().max(b.max_value());
    (lo..=hi).all(|v| (a.prob(v) - b.prob(v)).abs() < 1e-12)
}

fn lazy() -> StepSpec {
    validate_step_spec(&LatticePmf::from_atoms(&[(-1, 0.25), (0, 0.5), (1, 0.25)]).unwrap(), StepRole::Step).unwrap()
}

fn skew_x() -> WalkModel {
    let eta = validate_step_spec(&LatticePmf::from_atoms(&[(-1, 0.5), (2, 0.5)]).unwrap(), StepRole::RestartX).unwrap();
    let wide = LatticePmf::from_atoms(&[(-3, 0.1), (-1, 0.3), (0, 0.2), (1, 0.2), (2, 0.2)]).unwrap();
    let wide = validate_step_spec_with(&wide, StepRole::Step, Aperiodicity::TailOnly).unwrap();
    WalkModel::new_x(lazy(), wide, eta).unwrap()
}

proptest! {
    #[test]
    fn convolution_commutes(a in pmf_strategy(), b in pmf_strategy()) {
        prop_assert!(close(&convolve(&a, &b), &convolve(&b, &a)));
    }

    #[test]
    fn convolution_associates(a in pmf_strategy(), b in pmf_strategy(), c in pmf_strategy()) {
        prop_assert!(close(&convolve(&convolve(&a, &b), &c), &convolve(&a, &convolve(&b, &c))));
    }

    #[test]
    fn powers_add(p in pmf_strategy(), j in 1usize..6, k in 1usize..6) {
        let lhs = convolve(&nth_convolution(&p, j, 1 << 20).unwrap(), &nth_convolution(&p, k, 1 << 20).unwrap());
        prop_assert!(close(&lhs, &nth_convolution(&p, j + k, 1 << 20).unwrap()));
    }

    #[test]
    fn symmetric_series_terms(w in prop::collection::vec(0.01f64..1.0, 1..4)) {
        // Symmetric laws: P[S >= 0] - 1/2 = P[S = 0]/2.
        let mut atoms = vec![(0i64, w[0])];
        for (i, &x) in w.iter().enumerate().skip(1) {
            atoms.push((i as i64, x / 2.0));
            atoms.push((-(i as i64), x / 2.0));
        }
        let total: f64 = w.iter().sum();
        let mut atoms: Vec<_> = atoms.into_iter().map(|(v, p)| (v, p / total)).collect();
        atoms.sort_by_key(|a| a.0);
        let p = LatticePmf::from_atoms(&atoms).unwrap();
        let a = spitzer_terms(&p, SpitzerSide::GeqZero, 12);
        for (i, ak) in a.iter().enumerate() {
            let k = i + 1;
            let s = nth_convolution(&p, k, 1 << 20).unwrap();
            prop_assert!((ak - s.prob(0) / (2.0 * k as f64)).abs() < 1e-12);
        }
    }

    #[test]
    fn transitions_are_total(state in -50i64..50, draw in -50i64..50) {
        let (next, branch) = transition_x(state, draw);
        match branch {
            Branch::PositiveStep => prop_assert!(state > 0 && next > 0 && next == state + draw),
            Branch::PositiveToZero => prop_assert!(state > 0 && next == 0),
            Branch::Restart => prop_assert!(state == 0 && next == draw),
            Branch::NegativeStep => prop_assert!(state < 0 && next < 0 && next == state + draw),
            Branch::NegativeToZero => prop_assert!(state < 0 && next == 0),
        }
        if state >= 0 && (state > 0 || draw >= 0) {
            let (y, _) = transition_y(state, draw);
            prop_assert!(y >= 0);
        }
    }

    #[test]
    fn x_never_jumps_over_zero(seed in any::<u64>()) {
        let m = skew_x();
        let mut p = PathBundle::default();
        simulate_into(&m, 2000, &mut RandomStream::new(seed, 0), &mut p);
        for w in p.values.windows(2) {
            prop_assert!(!(w[0] > 0 && w[1] < 0) && !(w[0] < 0 && w[1] > 0));
        }
    }

    #[test]
    fn y_stays_nonnegative(seed in any::<u64>()) {
        let gamma = LatticePmf::from_atoms(&[(0, 0.2), (1, 0.5), (3, 0.3)]).unwrap();
        let m = WalkModel::new_y(lazy(), validate_step_spec(&gamma, StepRole::RestartY).unwrap()).unwrap();
        let mut p = PathBundle::default();
        simulate_into(&m, 2000, &mut RandomStream::new(seed, 3), &mut p);
        prop_assert!(p.values.iter().all(|&v| v >= 0));
    }

    #[test]
    fn paths_are_reproducible(seed in any::<u64>(), stream in any::<u64>()) {
        let m = skew_x();
        let (mut a, mut b) = (PathBundle::default(), PathBundle::default());
        simulate_into(&m, 500, &mut RandomStream::new(seed, stream), &mut a);
        simulate_into(&m, 500, &mut RandomStream::new(seed, stream), &mut b);
        prop_assert_eq!(a, b);
    }
}

#[test]
fn batches_ignore_threads_and_chunks() {
    let m = skew_x();
    let run = |threads: usize, chunk: usize| {
        let cfg = BatchConfig { paths: 3000, n: 300, seed: 99, chunk_size: chunk };
        let pool = ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| map_paths(&m, &cfg, |p| (p.values[300], p.return_times.len())))
    };
    let base = run(1, 64);
    assert_eq!(base, run(4, 64));
    assert_eq!(base, run(3, 1000));
}
