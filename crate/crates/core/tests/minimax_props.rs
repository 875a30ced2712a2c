mod common;

use common::{boolean_function, function_and_degree, real_function};
use hcj_core::minimax::{evaluate_degree_coefficients, CENSUS_MARGIN};
use hcj_core::{
    approx_degree, ed_at_most, ed_n, minimax_fit, sensitivity, tail_inf_norm, BasisSpec,
    CubeFunction, SolveStatus,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Best error by the dual: the maximum of `|<f, mu>| / ||mu||_1` over
/// measures orthogonal to the basis whose support is a set of at most
/// `dim + 1` points with a one-dimensional orthogonal complement. Vertices
/// of the dual feasible set are of this form, so the maximum is the exact
/// optimum.
fn circuit_oracle(target: &[f64], basis: &[Vec<f64>]) -> f64 {
    let points = target.len();
    let dim = basis.len();
    let mut best = 0.0f64;
    for support in 1u32..(1 << points) {
        let r = support.count_ones() as usize;
        if r > dim + 1 {
            continue;
        }
        let idx: Vec<usize> = (0..points).filter(|&p| support >> p & 1 == 1).collect();
        // Rows: basis elements restricted to the support, padded to square.
        let rows = dim.max(r);
        let a = DMatrix::from_fn(rows, r, |i, j| if i < dim { basis[i][idx[j]] } else { 0.0 });
        let svd = a.clone().svd(false, true);
        let mut sv: Vec<(f64, usize)> = svd
            .singular_values
            .iter()
            .copied()
            .enumerate()
            .map(|(i, s)| (s, i))
            .collect();
        sv.sort_by(|x, y| x.0.total_cmp(&y.0));
        let tol = 1e-9;
        let null = sv.iter().filter(|(s, _)| *s <= tol).count() + r.saturating_sub(sv.len());
        if null != 1 {
            continue;
        }
        let v_t = svd.v_t.unwrap();
        let row = sv[0].1;
        let mu: Vec<f64> = (0..r).map(|j| v_t[(row, j)]).collect();
        let l1: f64 = mu.iter().map(|m| m.abs()).sum();
        let value: f64 = mu.iter().zip(&idx).map(|(m, &p)| m * target[p]).sum();
        best = best.max(value.abs() / l1);
    }
    best
}

fn degree_basis(n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..1usize << n)
        .filter(|s| s.count_ones() as usize <= d)
        .map(|s| CubeFunction::character(n, s).unwrap().into_values())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn matches_circuit_oracle(f in real_function(1usize..=3), frac in 0.0f64..1.0) {
        let d = (frac * (f.n() + 1) as f64) as usize;
        let expected = circuit_oracle(f.values(), &degree_basis(f.n(), d));
        prop_assert!((ed_n(&f, d).unwrap() - expected).abs() < 1e-8);
    }

    #[test]
    fn matches_circuit_oracle_n4_linear(f in real_function(Just(4usize))) {
        let expected = circuit_oracle(f.values(), &degree_basis(4, 1));
        prop_assert!((ed_n(&f, 1).unwrap() - expected).abs() < 1e-8);
    }

    #[test]
    fn residual_and_certificate((f, d) in function_and_degree(8)) {
        let r = minimax_fit(&f, &BasisSpec::degree(f.n(), d).unwrap()).unwrap();
        prop_assert_eq!(r.status, SolveStatus::Optimal);
        let g = evaluate_degree_coefficients(f.n(), d, &r.coefficients).unwrap();
        prop_assert!((f.sup_distance(&g) - r.error).abs() <= 1e-8);
        prop_assert!(r.lower_bound <= r.error + 1e-12);
        prop_assert!(r.error - r.lower_bound <= 1e-9 * f.max_abs().max(1.0));
    }

    #[test]
    fn nonincreasing_in_degree(f in real_function(1usize..=7)) {
        let eds: Vec<f64> = (0..=f.n()).map(|d| ed_n(&f, d).unwrap()).collect();
        for w in eds.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9);
        }
        prop_assert!(eds[f.n()].abs() <= 1e-10);
        prop_assert!((eds[0] - (f.max() - f.min()) / 2.0).abs() <= 1e-10);
    }

    #[test]
    fn truncation_is_feasible((f, d) in function_and_degree(9)) {
        prop_assert!(ed_n(&f, d).unwrap() <= tail_inf_norm(&f, d).unwrap() + 1e-9);
    }

    #[test]
    fn wagner(f in prop_oneof![real_function(1usize..=10), boolean_function(1usize..=10)]) {
        prop_assert!(ed_n(&f, 0).unwrap() <= sensitivity(&f).value + 1e-9);
    }

    #[test]
    fn affine_equivariance(
        (f, d) in function_and_degree(6),
        alpha in -4.0f64..4.0,
        beta in -3.0f64..3.0,
    ) {
        let e = ed_n(&f, d).unwrap();
        let scaled = ed_n(&f.affine(alpha, beta), d).unwrap();
        prop_assert!((scaled - alpha.abs() * e).abs() <= 1e-8 * (1.0 + alpha.abs()));
    }

    #[test]
    fn enlarging_basis_never_hurts(
        f in real_function(2usize..=5),
        picks in prop::collection::vec(any::<usize>(), 1..6),
        extra in any::<usize>(),
    ) {
        let len = f.len();
        let small: Vec<CubeFunction> = picks
            .iter()
            .map(|&s| CubeFunction::character(f.n(), s % len).unwrap())
            .collect();
        let mut large = small.clone();
        large.push(CubeFunction::character(f.n(), extra % len).unwrap());
        let e_small = minimax_fit(&f, &BasisSpec::vectors(small).unwrap()).unwrap().error;
        let e_large = minimax_fit(&f, &BasisSpec::vectors(large).unwrap()).unwrap().error;
        prop_assert!(e_large <= e_small + 1e-9);
    }

    #[test]
    fn decision_agrees_with_optimum((f, d) in function_and_degree(7), ratio in 0.5f64..1.5) {
        let e = ed_n(&f, d).unwrap();
        let bound = e * ratio;
        let dec = ed_at_most(&f, d, bound).unwrap();
        if (bound - e).abs() > 1e-7 {
            prop_assert_eq!(dec.holds, e <= bound);
        }
        prop_assert!(dec.lower <= e + 1e-9 && e <= dec.upper + 1e-9);
    }
}

#[test]
fn constant_basis_is_the_chebyshev_center() {
    let f = CubeFunction::new(2, vec![3.0, -1.0, 0.5, 2.0]).unwrap();
    let r = minimax_fit(
        &f,
        &BasisSpec::vectors(vec![CubeFunction::constant(2, 1.0).unwrap()]).unwrap(),
    )
    .unwrap();
    assert!((r.error - 2.0).abs() < 1e-12);
    assert!((r.coefficients[0] - 1.0).abs() < 1e-12);
}

#[test]
fn spec_examples() {
    let and = CubeFunction::new(2, vec![0.0, 0.0, 0.0, 1.0]).unwrap();
    let r = minimax_fit(&and, &BasisSpec::degree(2, 1).unwrap()).unwrap();
    assert!((r.error - 0.25).abs() < 1e-12);
    // Masks in increasing order: {}, {1}, {2}.
    for (c, e) in r.coefficients.iter().zip([0.25, -0.25, -0.25]) {
        assert!((c - e).abs() < 1e-12);
    }
    assert!((ed_n(&and, 0).unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(approx_degree(&and, 1.0 / 3.0).unwrap(), 1);
    assert_eq!(
        approx_degree(&CubeFunction::constant(4, 2.0).unwrap(), 1.0 / 3.0).unwrap(),
        0
    );
    for n in 3..=6 {
        let f = CubeFunction::from_fn(n, |x| {
            if x.count_ones() % 2 == 1 {
                -1.0 / n as f64
            } else {
                1.0 / n as f64
            }
        })
        .unwrap();
        assert_eq!(approx_degree(&f, 1.0 / 3.0).unwrap(), 0);
    }
    let full: Vec<CubeFunction> = (0..8)
        .map(|s| CubeFunction::character(3, s).unwrap())
        .collect();
    let f = CubeFunction::from_fn(3, |x| (x * x) as f64).unwrap();
    assert!(
        minimax_fit(&f, &BasisSpec::vectors(full).unwrap())
            .unwrap()
            .error
            < 1e-10
    );
}

#[test]
fn boolean_optima_clear_the_census_margin() {
    // Every +-1 function on 3 bits has an optimal linear error that is either
    // at least one or well below the census band.
    for index in 0u64..256 {
        let f = CubeFunction::from_fn(3, |x| if index >> x & 1 == 1 { -1.0 } else { 1.0 }).unwrap();
        let e = ed_n(&f, 1).unwrap();
        assert!(
            e >= 1.0 - 1e-9 || e < 1.0 - 100.0 * CENSUS_MARGIN,
            "index {index}: {e}"
        );
    }
}

#[test]
fn oversized_program_is_a_resource_error() {
    // C(16, <= 8) = 39203 variables, above the 20000 cap.
    let g = CubeFunction::from_fn(16, |x| (x % 7) as f64).unwrap();
    assert!(matches!(ed_n(&g, 8), Err(hcj_core::HcjError::Resource(_))));
}
