use std::collections::HashSet;

use hcj_core::binomial::{big_log2, binom_le_big};
use hcj_core::packing::{
    boolean_from_index, guarantee_from_packing, guarantee_log_domain, packing_volume_bound,
};
use hcj_core::{
    binary_entropy, ed_n, family_member, greedy_packing, guarantee_check, hat, ptf_census,
    schlafli_regions, sensitivity, HatSpec, HcjError, PackingFamily,
};
use num_bigint::BigUint;
use num_traits::One;
use proptest::prelude::*;

/// Sign patterns `sign(sum_S c_S W_S(x))` over integer coefficients in
/// `[-w, w]` for all `|S| <= d`, keeping only patterns with no zero value.
/// Encoded like the census index: bit `x` set means the value is negative.
fn sign_representable(n: usize, d: usize, w: i64) -> HashSet<u64> {
    let masks: Vec<usize> = (0..1usize << n)
        .filter(|s| s.count_ones() as usize <= d)
        .collect();
    let span = (2 * w + 1) as u64;
    let count = span.pow(masks.len() as u32);
    let mut out = HashSet::new();
    for code in 0..count {
        let mut c = code;
        let coeffs: Vec<i64> = masks
            .iter()
            .map(|_| {
                let v = (c % span) as i64 - w;
                c /= span;
                v
            })
            .collect();
        let mut pattern = 0u64;
        let mut ok = true;
        for x in 0..1usize << n {
            let p: i64 = masks
                .iter()
                .zip(&coeffs)
                .map(|(&s, &cs)| {
                    if (x & s).count_ones() % 2 == 1 {
                        -cs
                    } else {
                        cs
                    }
                })
                .sum();
            if p == 0 {
                ok = false;
                break;
            }
            if p < 0 {
                pattern |= 1 << x;
            }
        }
        if ok {
            out.insert(pattern);
        }
    }
    out
}

/// `m s(f)` computed exactly on the integer numerators `m f(x)` of a table
/// whose values are multiples of `1/m`.
fn scaled_sensitivity(f: &hcj_core::CubeFunction, m: usize) -> i64 {
    let num: Vec<i64> = f
        .values()
        .iter()
        .map(|v| (v * m as f64).round() as i64)
        .collect();
    for (v, k) in f.values().iter().zip(&num) {
        assert!(
            (v * m as f64 - *k as f64).abs() < 1e-9,
            "value {v} is not a multiple of 1/{m}"
        );
    }
    (0..num.len())
        .map(|x| {
            (0..f.n())
                .map(|j| (num[x] - num[x ^ (1 << j)]).abs())
                .sum::<i64>()
        })
        .max()
        .unwrap()
}

/// `s(f) = n / m`: exactly on the numerators, and to a few ulps in floating
/// point, where `1/m` is generally not representable.
fn assert_n_over_m(f: &hcj_core::CubeFunction, n: usize, m: usize) {
    assert_eq!(scaled_sensitivity(f, m), n as i64, "n={n} m={m}");
    let target = n as f64 / m as f64;
    let s = sensitivity(f).value;
    assert!(
        (s - target).abs() <= 4.0 * n as f64 * f64::EPSILON * target,
        "n={n} m={m}: {s}"
    );
}

#[test]
fn hat_sensitivity_is_n_over_m() {
    for n in 1..=12usize {
        for m in 1..=n {
            for center in [0, (1 << n) - 1, 0b1010_1010_1010 & ((1 << n) - 1)] {
                let h = hat(HatSpec { n, center, m }).unwrap();
                assert_n_over_m(&h, n, m);
                assert_eq!(h.value(center), 1.0);
                let base = hat(HatSpec { n, center: 0, m }).unwrap();
                assert_eq!(h, base.translate(center));
            }
        }
    }
}

#[test]
fn greedy_packings_are_valid_and_maximal() {
    for n in 2..=12usize {
        for m in 1..=n / 2 {
            let k = greedy_packing(n, m).unwrap();
            for (i, &a) in k.iter().enumerate() {
                for &b in &k[..i] {
                    assert!((a ^ b).count_ones() as usize > 2 * m);
                }
            }
            for y in 0..1usize << n {
                assert!(
                    k.iter().any(|&c| (c ^ y).count_ones() as usize <= 2 * m),
                    "not maximal"
                );
            }
            assert!(k.len() as f64 >= packing_volume_bound(n, m), "n={n} m={m}");
            let rhs = BigUint::one() << n;
            assert!(BigUint::from(k.len()) * binom_le_big(n as u64, 2 * m as u64) >= rhs);
        }
    }
    assert_eq!(greedy_packing(3, 1).unwrap(), vec![0, 7]);
    assert_eq!(greedy_packing(2, 1).unwrap(), vec![0]);
    assert!(greedy_packing(3, 2).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn family_members_have_sensitivity_n_over_m(
        n in 2usize..=12,
        frac in 0.0f64..1.0,
        seed in any::<u64>(),
    ) {
        let m = 1 + (frac * (n / 2) as f64) as usize;
        let m = m.min(n / 2);
        let centers = greedy_packing(n, m).unwrap();
        let signs = (0..centers.len()).map(|i| if seed >> (i % 64) & 1 == 1 { -1 } else { 1 }).collect();
        let f = family_member(&PackingFamily { n, m, centers, signs }).unwrap();
        assert_n_over_m(&f, n, m);
        prop_assert!(f.max_abs() <= 1.0);
    }

    #[test]
    fn schlafli_full_exactly_when_m_covers_p(p in 1u64..=40, m in 1u64..=45) {
        let r = schlafli_regions(p, m).unwrap();
        let full = BigUint::one() << p as usize;
        if m >= p {
            prop_assert_eq!(r, full);
        } else {
            prop_assert!(r < full);
        }
    }
}

#[test]
fn family_examples() {
    let f = family_member(&PackingFamily {
        n: 3,
        m: 1,
        centers: vec![0, 7],
        signs: vec![1, -1],
    })
    .unwrap();
    assert_eq!(f.values(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0]);
    assert_eq!(sensitivity(&f).value, 3.0);
    let single = family_member(&PackingFamily {
        n: 4,
        m: 2,
        centers: vec![5],
        signs: vec![1],
    })
    .unwrap();
    assert_eq!(
        single,
        hat(HatSpec {
            n: 4,
            center: 5,
            m: 2
        })
        .unwrap()
    );
    let close = PackingFamily {
        n: 4,
        m: 1,
        centers: vec![0, 3],
        signs: vec![1, 1],
    };
    assert!(matches!(
        family_member(&close),
        Err(HcjError::Validation(_))
    ));
}

#[test]
fn entropy_bounds_binomial_sums() {
    assert_eq!(binary_entropy(0.5), 1.0);
    assert_eq!((binary_entropy(0.0), binary_entropy(1.0)), (0.0, 0.0));
    for n in 1..=40u64 {
        for k in 0..=n / 2 {
            let lhs = big_log2(&binom_le_big(n, k));
            let rhs = n as f64 * binary_entropy(k as f64 / n as f64);
            assert!(
                lhs <= rhs + 1e-12 * rhs.max(1.0),
                "n={n} k={k}: {lhs} > {rhs}"
            );
        }
    }
}

#[test]
fn guarantee_is_monotone_in_degree() {
    for n in 2..=14usize {
        for m in 1..=n / 2 {
            let p = greedy_packing(n, m).unwrap().len() as u64;
            let mut prev = true;
            let mut prev_log = f64::NEG_INFINITY;
            for d in 0..=n {
                let r = guarantee_from_packing(n, m, d, p).unwrap();
                assert!(!r.holds || prev, "n={n} m={m} d={d}");
                assert!(r.rhs_log2 >= prev_log - 1e-12 * prev_log.abs());
                prev = r.holds;
                prev_log = r.rhs_log2;
            }
            assert!(!guarantee_from_packing(n, m, n, p).unwrap().holds);
        }
    }
}

#[test]
fn log_route_agrees_with_exact_route() {
    for n in [12, 18, 22] {
        for m in 1..=3 {
            let p = greedy_packing(n, m).unwrap().len() as u64;
            for d in 1..=4 {
                let exact = guarantee_from_packing(n, m, d, p).unwrap();
                let log = guarantee_log_domain(n, m, d, p).unwrap();
                assert!(exact.exact, "n={n} m={m} d={d}");
                assert_eq!(log.holds, exact.holds, "n={n} m={m} d={d}");
                assert!((log.rhs_log2 - exact.rhs_log2).abs() <= 1e-9 * exact.rhs_log2);
            }
        }
    }
    // An independent exact comparison at n = 22.
    for (m, d) in [(1, 1), (1, 2), (1, 4), (2, 2), (3, 1)] {
        let r = guarantee_check(22, m, d).unwrap();
        let p = r.packing_size as usize;
        let dim = hcj_core::binomial::binom_le(22, d as u64) as u64;
        let exact = (BigUint::one() << p) > (binom_le_big((1 << 22) - 1, dim - 1) << 1);
        assert_eq!(r.holds, exact, "m={m} d={d}");
    }
}

#[test]
fn counting_certificate_is_consistent_with_ground_truth() {
    // When the certificate holds at census scale, an exhaustive search over
    // sign vectors must find a family member with E_d >= 1. At this scale
    // only d = 0 is ever certified.
    let mut certified = 0;
    for n in 2..=4usize {
        for m in 1..=n / 2 {
            let centers = greedy_packing(n, m).unwrap();
            for d in 0..=n / 2 {
                if !guarantee_check(n, m, d).unwrap().holds {
                    continue;
                }
                assert_eq!(d, 0);
                certified += 1;
                let found = (0u64..1 << centers.len()).any(|s| {
                    let signs = (0..centers.len())
                        .map(|i| if s >> i & 1 == 1 { -1 } else { 1 })
                        .collect();
                    let f = family_member(&PackingFamily {
                        n,
                        m,
                        centers: centers.clone(),
                        signs,
                    })
                    .unwrap();
                    ed_n(&f, d).unwrap() >= 1.0 - 1e-6
                });
                assert!(found, "certified but no hard member at n={n} m={m} d={d}");
            }
        }
    }
    assert!(certified > 0);
}

#[test]
fn census_matches_sign_representability() {
    for (n, d, w) in [(2, 1, 2), (2, 2, 2), (3, 1, 3)] {
        let representable = sign_representable(n, d, w);
        let report = ptf_census(n, d).unwrap();
        assert_eq!(report.total, 1 << (1 << n));
        assert_eq!(
            report.hard_count,
            report.total - representable.len() as u64,
            "n={n} d={d}"
        );
        for index in 0..report.total {
            let f = boolean_from_index(n, index).unwrap();
            let hard = ed_n(&f, d).unwrap() >= 1.0 - 1e-6;
            assert_eq!(hard, !representable.contains(&index));
        }
    }
    assert_eq!(sign_representable(2, 1, 2).len(), 14);
    assert_eq!(sign_representable(3, 1, 3).len(), 104);
    let r = ptf_census(2, 1).unwrap();
    assert_eq!((r.hard_count, r.fraction), (2, 0.125));
}

#[test]
fn census_sanity() {
    for n in 1..=3 {
        let fractions: Vec<f64> = (0..=n)
            .map(|d| ptf_census(n, d).unwrap().fraction)
            .collect();
        assert_eq!(fractions[n], 0.0);
        assert!(fractions.windows(2).all(|w| w[1] <= w[0]));
    }
    assert_eq!(ptf_census(3, 2).unwrap().hard_count, 2);
    assert!(matches!(ptf_census(5, 1), Err(HcjError::Resource(_))));
}
