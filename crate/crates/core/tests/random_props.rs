use hcj_core::binomial::binom_gt;
use hcj_core::random::hoeffding_bound;
use hcj_core::{
    random_boolean, random_boolean_stream, ratio_probe, tail_experiment, wht_forward, CubeFunction,
    HcjError,
};
use proptest::prelude::*;

proptest! {
    #[test]
    fn boolean_tables_are_deterministic(n in 1usize..=14, seed in any::<u64>(), stream in 0u64..1000) {
        let a = random_boolean_stream(n, seed, stream).unwrap();
        prop_assert_eq!(&a, &random_boolean_stream(n, seed, stream).unwrap());
        prop_assert!(a.values().iter().all(|&v| v == 1.0 || v == -1.0));
    }

    #[test]
    fn bound_is_nonincreasing_in_degree(n in 1usize..=30, k in 0.5f64..5.0) {
        for d in 0..n {
            prop_assert!(hoeffding_bound(n, d + 1, k) <= hoeffding_bound(n, d, k));
        }
    }
}

#[test]
fn mean_coefficient_is_centred() {
    let n = 10;
    let seeds = 10_000u64;
    let mean: f64 = (0..seeds)
        .map(|s| random_boolean(n, s).unwrap().mean())
        .sum::<f64>()
        / seeds as f64;
    assert!(
        mean.abs() <= 3.0 * 2f64.powf(-(n as f64) / 2.0) * 0.1,
        "mean {mean}"
    );
}

#[test]
fn mean_tail_energy_matches_expectation() {
    for d in [4, 7, 10] {
        let s = tail_experiment(14, d, 500, 11, 3.0).unwrap();
        let expected = binom_gt(14, d as u64) as f64 / 2f64.powi(14);
        assert_eq!(s.expected_tail_energy(), expected);
        let rel = (s.mean_tail_energy() - expected).abs() / expected;
        assert!(rel <= 0.05, "d={d}: {rel}");
    }
}

#[test]
fn trials_do_not_depend_on_thread_count() {
    let a = tail_experiment(12, 6, 40, 5, 3.0).unwrap();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let b = pool.install(|| tail_experiment(12, 6, 40, 5, 3.0).unwrap());
    assert_eq!(a.max_tail_norms, b.max_tail_norms);
    assert_eq!(a.tail_energies, b.tail_energies);
    assert_eq!(a.exceed_count, b.exceed_count);
    assert!(a.exceed_count <= a.trials);
    assert!(a.max_tail_norms.iter().all(|&v| v >= 0.0));
}

#[test]
fn top_level_tail_is_one_coefficient() {
    let s = tail_experiment(16, 15, 20, 2, 3.0).unwrap();
    assert_eq!(s.bound, 3.0 / 64.0);
    for t in 0..20 {
        let f = random_boolean_stream(16, 2, t).unwrap();
        let top = wht_forward(&f).coeff((1 << 16) - 1).abs();
        assert!((s.max_tail_norms[t as usize] - top).abs() < 1e-15);
    }
}

#[test]
fn invalid_trials_rejected() {
    assert!(matches!(
        tail_experiment(23, 1, 1, 0, 3.0),
        Err(HcjError::Resource(_))
    ));
    assert!(matches!(
        tail_experiment(8, 9, 1, 0, 3.0),
        Err(HcjError::Parameter(_))
    ));
    assert!(tail_experiment(8, 1, 1, 0, 0.0).is_err());
}

#[test]
fn ratio_probe_examples() {
    for n in 1..=10usize {
        for s in 1..1usize << n {
            let k = s.count_ones() as usize;
            let p = ratio_probe(&CubeFunction::character(n, s).unwrap(), k - 1).unwrap();
            assert!((p.ratio - 1.0 / (2.0 * k as f64)).abs() <= 1e-12);
        }
    }
    let n = 6;
    let a = CubeFunction::character(n, 0b111110).unwrap();
    let b = CubeFunction::character(n, 0b111111).unwrap();
    let sum = CubeFunction::new(
        n,
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| x + y)
            .collect(),
    )
    .unwrap();
    assert!(ratio_probe(&sum, 4).unwrap().ratio >= 1.0 / (2.0 * n as f64));
    let and = CubeFunction::new(2, vec![0.0, 0.0, 0.0, 1.0]).unwrap();
    assert!(matches!(ratio_probe(&and, 1), Err(HcjError::Validation(_))));
}
