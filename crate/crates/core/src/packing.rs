//! Hat functions, Hamming packings and counting certificates for
//! functions that no low-degree polynomial approximates to within 1.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::binomial::{big_log2, binom_le_big, binom_le_fraction, log2_binom_le};
use crate::cube::{check_dim, CubeFunction};
use crate::error::{HcjError, Result};
use crate::minimax::{ed_n, CENSUS_MARGIN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HatSpec {
    pub n: usize,
    pub center: usize,
    pub m: usize,
}

fn check_hat(n: usize, m: usize) -> Result<()> {
    check_dim(n)?;
    if m == 0 || m > n {
        return Err(HcjError::Parameter(format!(
            "hat radius {m} outside 1..={n}"
        )));
    }
    Ok(())
}

/// `max(0, (m - dist(center, y)) / m)`.
pub fn hat(spec: HatSpec) -> Result<CubeFunction> {
    check_hat(spec.n, spec.m)?;
    if spec.center >> spec.n != 0 {
        return Err(HcjError::Parameter(format!(
            "center {} is not an {}-bit point",
            spec.center, spec.n
        )));
    }
    let m = spec.m as f64;
    CubeFunction::from_fn(spec.n, |y| {
        let dist = (y ^ spec.center).count_ones() as usize;
        if dist >= spec.m {
            0.0
        } else {
            (spec.m - dist) as f64 / m
        }
    })
}

/// All masks of weight at most `r` over `n` bits.
fn ball_offsets(n: usize, r: usize) -> Vec<usize> {
    let mut out = Vec::new();
    // Gosper's hack per weight.
    out.push(0);
    for w in 1..=r.min(n) {
        let mut v = (1usize << w) - 1;
        while v < 1 << n {
            out.push(v);
            let c = v & v.wrapping_neg();
            let r = v + c;
            v = (((r ^ v) >> 2) / c) | r;
        }
    }
    out
}

/// First-fit packing: points in increasing order, keeping each one farther
/// than `2m` from everything kept so far. The result is maximal.
pub fn greedy_packing(n: usize, m: usize) -> Result<Vec<usize>> {
    check_dim(n)?;
    if m == 0 || 2 * m > n {
        return Err(HcjError::Parameter(format!(
            "need 1 <= m and 2m <= n, got m = {m}, n = {n}"
        )));
    }
    let ball = ball_offsets(n, 2 * m);
    let mut blocked = vec![0u64; (1usize << n).div_ceil(64)];
    let mut centers = Vec::new();
    for x in 0..1usize << n {
        if blocked[x / 64] >> (x % 64) & 1 == 1 {
            continue;
        }
        centers.push(x);
        for &o in &ball {
            let y = x ^ o;
            blocked[y / 64] |= 1 << (y % 64);
        }
    }
    Ok(centers)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PackingFamily {
    pub n: usize,
    pub m: usize,
    pub centers: Vec<usize>,
    pub signs: Vec<i8>,
}

/// `sum_x eps_x h_x`; the centres must be pairwise farther apart than `2m`.
pub fn family_member(p: &PackingFamily) -> Result<CubeFunction> {
    check_hat(p.n, p.m)?;
    if p.centers.len() != p.signs.len() {
        return Err(HcjError::Validation(format!(
            "{} centres but {} signs",
            p.centers.len(),
            p.signs.len()
        )));
    }
    if let Some(&s) = p.signs.iter().find(|s| s.abs() != 1) {
        return Err(HcjError::Validation(format!("sign {s} is not +-1")));
    }
    for (i, &a) in p.centers.iter().enumerate() {
        if a >> p.n != 0 {
            return Err(HcjError::Validation(format!(
                "center {a} is not an {}-bit point",
                p.n
            )));
        }
        for &b in &p.centers[..i] {
            let dist = (a ^ b).count_ones() as usize;
            if dist <= 2 * p.m {
                return Err(HcjError::Validation(format!(
                    "centres {b} and {a} are at distance {dist} <= 2m = {}",
                    2 * p.m
                )));
            }
        }
    }
    let mut values = vec![0.0; 1 << p.n];
    for (&c, &e) in p.centers.iter().zip(&p.signs) {
        let h = hat(HatSpec {
            n: p.n,
            center: c,
            m: p.m,
        })?;
        for (v, hv) in values.iter_mut().zip(h.values()) {
            *v += e as f64 * hv;
        }
    }
    CubeFunction::new(p.n, values)
}

/// Schläfli's bound `2 C(p - 1, <= m - 1)` on the regions cut by `p`
/// central hyperplanes in dimension `m`.
pub fn schlafli_regions(p: u64, m: u64) -> Result<BigUint> {
    if p == 0 || m == 0 {
        return Err(HcjError::Parameter(
            "schlafli_regions needs p, m >= 1".into(),
        ));
    }
    Ok(binom_le_big(p - 1, m - 1) << 1)
}

/// `p log2(1/p) + (1-p) log2(1/(1-p))`, zero at both ends.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

/// Size in bits of the region bound above which [`guarantee_check`]
/// compares in the log domain. Sweeps that stop at the first failing
/// degree stay far below it for `n <= 24`.
pub const EXACT_GUARANTEE_MAX_BITS: f64 = 8_388_608.0;

/// Relative band around a log-domain tie inside which the comparison is
/// redone exactly.
const LOG_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct GuaranteeReport {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    /// `P`, the size of the greedy packing; the left side is `2^P`.
    pub packing_size: u64,
    /// `log2` of the region bound `2 C(2^n - 1, <= C(n, <= d) - 1)`.
    pub rhs_log2: f64,
    /// True when `2^P` exceeds the region bound, so some member of the
    /// signed hat family has `E_d >= 1`.
    pub holds: bool,
    /// Whether the decision came from exact integer arithmetic.
    pub exact: bool,
}

/// Counting certificate with the packing size supplied, so sweeps over `d`
/// reuse one packing. Exact unless the bound exceeds
/// [`EXACT_GUARANTEE_MAX_BITS`].
pub fn guarantee_from_packing(
    n: usize,
    m: usize,
    d: usize,
    packing_size: u64,
) -> Result<GuaranteeReport> {
    guarantee_route(n, m, d, packing_size, false)
}

/// The same certificate decided in the log domain whenever the two sides
/// are separated by more than the guard band.
pub fn guarantee_log_domain(
    n: usize,
    m: usize,
    d: usize,
    packing_size: u64,
) -> Result<GuaranteeReport> {
    guarantee_route(n, m, d, packing_size, true)
}

fn guarantee_route(
    n: usize,
    m: usize,
    d: usize,
    packing_size: u64,
    force_log: bool,
) -> Result<GuaranteeReport> {
    check_dim(n)?;
    if d > n {
        return Err(HcjError::Parameter(format!("degree {d} exceeds n = {n}")));
    }
    let points = 1u64 << n;
    let dim = crate::binomial::binom_le(n as u64, d as u64) as u64;
    let report = |rhs_log2: f64, holds: bool, exact: bool| GuaranteeReport {
        n,
        m,
        d,
        packing_size,
        rhs_log2,
        holds,
        exact,
    };
    let rhs = 1.0 + log2_binom_le(points - 1, dim - 1);
    if force_log || rhs > EXACT_GUARANTEE_MAX_BITS {
        let lhs = packing_size as f64;
        if (lhs - rhs).abs() > LOG_GUARD * rhs.max(lhs) + 1.0 {
            return Ok(report(rhs, lhs > rhs, false));
        }
    }
    // 2^P > 2 (q + t) / q  <=>  2^(P-1) q > q + t.
    let (num, den) = binom_le_fraction(points - 1, dim - 1);
    let rhs_log2 = 1.0 + big_log2(&num) - big_log2(&den);
    let holds = if packing_size == 0 {
        false
    } else {
        (den << (packing_size as usize - 1)) > num
    };
    Ok(report(rhs_log2, holds, true))
}

/// Whether `2^P > 2 C(2^n - 1, <= C(n, <= d) - 1)` for the greedy packing
/// `P = |greedy_packing(n, m)|`.
pub fn guarantee_check(n: usize, m: usize, d: usize) -> Result<GuaranteeReport> {
    let p = greedy_packing(n, m)?.len() as u64;
    guarantee_from_packing(n, m, d, p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FrontierRow {
    pub n: usize,
    pub m: usize,
    pub packing_size: u64,
    /// Largest `d` in `1..=n/2` at which the certificate holds, 0 if none.
    pub max_certified_d: usize,
}

/// The certificate over `n <= max_n`, `1 <= m <= n/4`, `1 <= d <= n/2`.
pub fn guarantee_frontier(max_n: usize) -> Result<Vec<FrontierRow>> {
    let mut rows = Vec::new();
    for n in 4..=max_n {
        for m in 1..=n / 4 {
            let p = greedy_packing(n, m)?.len() as u64;
            let mut max_certified_d = 0;
            // The bound grows with d, so stop at the first failure.
            for d in 1..=n / 2 {
                if !guarantee_from_packing(n, m, d, p)?.holds {
                    break;
                }
                max_certified_d = d;
            }
            rows.push(FrontierRow {
                n,
                m,
                packing_size: p,
                max_certified_d,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct CensusReport {
    pub n: usize,
    pub d: usize,
    pub total: u64,
    pub hard_count: u64,
    pub fraction: f64,
}

/// Largest `n` for [`ptf_census`]: `2^(2^n)` linear programs.
pub const MAX_CENSUS_N: usize = 4;

/// `+-1` function number `index`: bit `x` of the index set means `f(x) = -1`.
pub fn boolean_from_index(n: usize, index: u64) -> Result<CubeFunction> {
    CubeFunction::from_fn(n, |x| if index >> x & 1 == 1 { -1.0 } else { 1.0 })
}

/// Counts the `+-1` functions on `n` bits with `E_d >= 1 - CENSUS_MARGIN`.
pub fn ptf_census(n: usize, d: usize) -> Result<CensusReport> {
    check_dim(n)?;
    if n > MAX_CENSUS_N {
        return Err(HcjError::Resource(format!(
            "census over 2^(2^{n}) functions exceeds the limit n <= {MAX_CENSUS_N}"
        )));
    }
    if d > n {
        return Err(HcjError::Parameter(format!("degree {d} exceeds n = {n}")));
    }
    let total = 1u64 << (1 << n);
    const BLOCK: u64 = 256;
    let hard_count = (0..total.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| -> Result<u64> {
            let mut c = 0;
            for index in b * BLOCK..((b + 1) * BLOCK).min(total) {
                let f = boolean_from_index(n, index)?;
                if ed_n(&f, d)? >= 1.0 - CENSUS_MARGIN {
                    c += 1;
                }
            }
            Ok(c)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(CensusReport {
        n,
        d,
        total,
        hard_count,
        fraction: hard_count as f64 / total as f64,
    })
}

/// `2^n / C(n, <= 2m)`, the volume lower bound on a maximal packing.
pub fn packing_volume_bound(n: usize, m: usize) -> f64 {
    let vol = binom_le_big(n as u64, 2 * m as u64);
    2f64.powi(n as i32) / vol.to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::sensitivity;
    use num_traits::One;

    #[test]
    fn hat_examples() {
        let h = hat(HatSpec {
            n: 3,
            center: 0,
            m: 2,
        })
        .unwrap();
        assert_eq!(h.values(), &[1.0, 0.5, 0.5, 0.0, 0.5, 0.0, 0.0, 0.0]);
        assert_eq!(sensitivity(&h).value, 1.5);
        let spike = hat(HatSpec {
            n: 5,
            center: 9,
            m: 1,
        })
        .unwrap();
        assert_eq!(sensitivity(&spike).value, 5.0);
        let base = hat(HatSpec {
            n: 5,
            center: 0,
            m: 3,
        })
        .unwrap();
        assert_eq!(
            hat(HatSpec {
                n: 5,
                center: 22,
                m: 3
            })
            .unwrap(),
            base.translate(22)
        );
    }

    #[test]
    fn packing_examples() {
        assert_eq!(greedy_packing(3, 1).unwrap(), vec![0, 7]);
        assert_eq!(greedy_packing(2, 1).unwrap(), vec![0]);
        assert!(greedy_packing(3, 2).is_err());
    }

    #[test]
    fn family_examples() {
        let p = PackingFamily {
            n: 3,
            m: 1,
            centers: vec![0, 7],
            signs: vec![1, -1],
        };
        let f = family_member(&p).unwrap();
        assert_eq!(f.values(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0]);
        assert_eq!(sensitivity(&f).value, 3.0);
        let bad = PackingFamily {
            n: 3,
            m: 1,
            centers: vec![0, 3],
            signs: vec![1, 1],
        };
        assert!(matches!(family_member(&bad), Err(HcjError::Validation(_))));
    }

    #[test]
    fn schlafli_examples() {
        assert_eq!(schlafli_regions(4, 3).unwrap(), BigUint::from(14u32));
        assert_eq!(schlafli_regions(5, 9).unwrap(), BigUint::from(32u32));
        // With m >= p every sign pattern is realized.
        assert_eq!(schlafli_regions(16, 16).unwrap(), BigUint::one() << 16);
        assert_eq!(schlafli_regions(16, 20).unwrap(), BigUint::one() << 16);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(binary_entropy(0.5), 1.0);
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
    }

    #[test]
    fn guarantee_is_trivially_false_at_full_degree() {
        let r = guarantee_check(8, 2, 8).unwrap();
        assert!(!r.holds && r.exact);
    }

    #[test]
    fn census_small() {
        let r = ptf_census(2, 1).unwrap();
        assert_eq!((r.total, r.hard_count, r.fraction), (16, 2, 0.125));
        assert_eq!(ptf_census(3, 3).unwrap().hard_count, 0);
        assert!(ptf_census(5, 1).is_err());
    }
}
