mod common;

use common::{boolean_function, real_function};
use hcj_core::{
    harmonic_defect, odd_harmonic_dimension, odd_harmonic_project, odd_harmonic_residual,
    sensitivity, CubeFunction,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn projection_error_within_bound(
        f in prop_oneof![real_function(1usize..=14), boolean_function(1usize..=14)],
    ) {
        let r = odd_harmonic_project(&f);
        prop_assert!(r.error <= r.bound * (1.0 + 1e-12));
        prop_assert_eq!(r.bound, sensitivity(&f).value / f.n() as f64);
        prop_assert_eq!(odd_harmonic_residual(&r.g), 0.0);
        for x in 0..f.len() {
            if x.count_ones() % 2 == 0 {
                prop_assert_eq!(r.g.value(x), f.value(x));
            }
        }
    }

    #[test]
    fn defect_within_bound(f in real_function(1usize..=12)) {
        let bound = sensitivity(&f).value / f.n() as f64;
        prop_assert!(harmonic_defect(&f) <= bound * (1.0 + 1e-12));
    }
}

#[test]
fn parity_attains_the_bound() {
    for n in 1..=12 {
        let f =
            CubeFunction::from_fn(n, |x| if x.count_ones() % 2 == 1 { -1.0 } else { 1.0 }).unwrap();
        let r = odd_harmonic_project(&f);
        assert_eq!((r.error, r.bound), (2.0, 2.0));
        assert_eq!(harmonic_defect(&f), 2.0);
    }
}

/// Rank of the odd-point averaging constraints from singular values.
fn float_rank(n: usize) -> usize {
    let odd: Vec<usize> = (0..1usize << n)
        .filter(|x| x.count_ones() % 2 == 1)
        .collect();
    let a = DMatrix::from_fn(odd.len(), 1 << n, |i, y| {
        let x = odd[i];
        if y == x {
            n as f64
        } else if (x ^ y).count_ones() == 1 {
            -1.0
        } else {
            0.0
        }
    });
    a.svd(false, false)
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-9)
        .count()
}

#[test]
fn dimension_is_half() {
    for n in 1..=10 {
        assert_eq!(odd_harmonic_dimension(n).unwrap(), 1 << (n - 1), "n={n}");
    }
    for n in 1..=7 {
        assert_eq!((1 << n) - float_rank(n), 1 << (n - 1));
    }
}
