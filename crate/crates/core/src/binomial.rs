//! Exact and log-domain binomial arithmetic.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use statrs::function::gamma::ln_gamma;

/// `C(n, k)` exactly.
pub fn binom_big(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `C(n, <= k) = sum_{j <= k} C(n, j)` exactly.
pub fn binom_le_big(n: u64, k: u64) -> BigUint {
    let k = k.min(n);
    let mut term = BigUint::one();
    let mut sum = BigUint::one();
    for j in 0..k {
        term *= n - j;
        term /= j + 1;
        sum += &term;
    }
    sum
}

/// `C(n, <= k)`, saturating at `u128::MAX`.
pub fn binom_le(n: u64, k: u64) -> u128 {
    binom_le_big(n, k).to_u128().unwrap_or(u128::MAX)
}

/// `C(n, > k)`, saturating.
pub fn binom_gt(n: u64, k: u64) -> u128 {
    if k >= n {
        return 0;
    }
    let total = BigUint::one() << n as usize;
    (total - binom_le_big(n, k)).to_u128().unwrap_or(u128::MAX)
}

pub fn binom_f64(n: u64, k: u64) -> f64 {
    binom_big(n, k).to_f64().unwrap_or(f64::INFINITY)
}

fn ln_binom(n: f64, k: f64) -> f64 {
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

/// `log2 C(n, k)` from log-gamma; exact for small arguments.
pub fn log2_binom(n: u64, k: u64) -> f64 {
    assert!(k <= n);
    if n <= 1000 {
        return big_log2(&binom_big(n, k));
    }
    ln_binom(n as f64, k as f64) / std::f64::consts::LN_2
}

/// `log2` of a big integer, accurate to double precision.
pub fn big_log2(v: &BigUint) -> f64 {
    if v.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().unwrap().log2();
    }
    let shift = bits - 64;
    let top = (v >> shift as usize).to_f64().unwrap();
    top.log2() + shift as f64
}

/// `log2 C(n, <= k)` without materializing the sum.
///
/// Below the middle the terms grow geometrically toward `j = k`, so the sum
/// is accumulated backwards from the largest term until the remaining terms
/// fall under double precision. Above the middle the complement is used.
pub fn log2_binom_le(n: u64, k: u64) -> f64 {
    if k >= n {
        return n as f64;
    }
    if n <= 2000 {
        return big_log2(&binom_le_big(n, k));
    }
    if 2 * k >= n {
        // C(n, <= k) = 2^n - C(n, <= n-k-1) with n-k-1 below the middle.
        let rest = log2_binom_le(n, n - k - 1) - n as f64;
        return n as f64 + (-(rest.exp2())).ln_1p() / std::f64::consts::LN_2;
    }
    let top = log2_binom(n, k);
    // Sum of C(n, j) / C(n, k) for j <= k, via the ratio C(n,j-1)/C(n,j) = j/(n-j+1).
    let mut ratio = 1.0f64;
    let mut sum = 1.0f64;
    let mut j = k;
    while j > 0 {
        ratio *= j as f64 / (n - j + 1) as f64;
        sum += ratio;
        if ratio < 1e-18 * sum {
            break;
        }
        j -= 1;
    }
    top + sum.log2()
}

/// `sum_{j <= k} C(big_n, j)` as the fraction `(q + t) / q`, by binary
/// splitting of the term ratios `(big_n - j) / (j + 1)`.
///
/// Avoiding the final division keeps the cost to a few large
/// multiplications even when the sum has millions of bits.
pub fn binom_le_fraction(big_n: u64, k: u64) -> (BigUint, BigUint) {
    let k = k.min(big_n);
    if k == 0 {
        return (BigUint::one(), BigUint::one());
    }
    let (_, q, t) = split_terms(big_n, 0, k);
    (&q + t, q)
}

/// `(P, Q, T)` over `[a, b)`: `P = prod (N - j)`, `Q = prod (j + 1)`, and
/// `T / Q = sum_{i=a+1}^{b} prod_{j=a}^{i-1} (N - j) / (j + 1)`.
fn split_terms(big_n: u64, a: u64, b: u64) -> (BigUint, BigUint, BigUint) {
    if b - a <= 16 {
        let (mut p, mut q, mut t) = (BigUint::one(), BigUint::one(), BigUint::zero());
        for j in a..b {
            // T_new / Q_new = T / Q + P_new / Q_new with P_new = P (N - j),
            // Q_new = Q (j + 1).
            p *= big_n - j;
            t = t * (j + 1) + &p;
            q *= j + 1;
        }
        return (p, q, t);
    }
    let m = a + (b - a) / 2;
    let (p1, q1, t1) = split_terms(big_n, a, m);
    let (p2, q2, t2) = split_terms(big_n, m, b);
    let t = t1 * &q2 + &p1 * t2;
    (p1 * p2, q1 * q2, t)
}
