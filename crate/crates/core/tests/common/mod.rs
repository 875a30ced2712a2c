#![allow(dead_code)]

use hcj_core::CubeFunction;
use proptest::prelude::*;

/// Tables with entries uniform in `[-1, 1]`.
pub fn real_function(n: impl Strategy<Value = usize>) -> impl Strategy<Value = CubeFunction> {
    n.prop_flat_map(|n| {
        prop::collection::vec(-1.0f64..=1.0, 1 << n)
            .prop_map(move |v| CubeFunction::new(n, v).unwrap())
    })
}

/// `+-1` tables.
pub fn boolean_function(n: impl Strategy<Value = usize>) -> impl Strategy<Value = CubeFunction> {
    n.prop_flat_map(|n| {
        prop::collection::vec(any::<bool>(), 1 << n).prop_map(move |v| {
            CubeFunction::new(
                n,
                v.into_iter().map(|b| if b { -1.0 } else { 1.0 }).collect(),
            )
            .unwrap()
        })
    })
}

/// Either kind, paired with a degree in `0..=n`.
pub fn function_and_degree(max_n: usize) -> impl Strategy<Value = (CubeFunction, usize)> {
    prop_oneof![real_function(1..=max_n), boolean_function(1..=max_n)].prop_flat_map(|f| {
        let n = f.n();
        (Just(f), 0..=n)
    })
}

/// `2^-n sum_x f(x) W_S(x)` summed term by term.
pub fn direct_coefficient(f: &CubeFunction, s: usize) -> f64 {
    let total: f64 = f
        .values()
        .iter()
        .enumerate()
        .map(|(x, v)| {
            if (x & s).count_ones() % 2 == 1 {
                -v
            } else {
                *v
            }
        })
        .sum();
    total / f.len() as f64
}

/// Sensitivity from the definition.
pub fn direct_sensitivity(f: &CubeFunction) -> f64 {
    (0..f.len())
        .map(|x| {
            (0..f.n())
                .map(|j| (f.value(x) - f.value(x ^ (1 << j))).abs())
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}
