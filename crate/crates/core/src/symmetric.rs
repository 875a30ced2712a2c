//! Symmetric functions and their univariate profiles.
//!
//! A symmetric `f` is determined by `phi(k)`, its value on Hamming level
//! `k`, and its degree-`d` minimax error equals the univariate minimax error
//! of `phi` on `{0, ..., n}` by polynomials of degree `d`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cube::{check_dim, CubeFunction};
use crate::error::{HcjError, Result};
use crate::minimax::{minimax_points, MinimaxResult};

/// Largest spread tolerated on one Hamming level by [`profile_of`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Largest `d` accepted by [`lorenz_witness`]; the search visits `2^(d+2)`
/// sign vectors.
pub const MAX_WITNESS_DEGREE: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetricProfile {
    n: usize,
    phi: Vec<f64>,
}

impl SymmetricProfile {
    /// Builds the profile of dimension `phi.len() - 1`.
    pub fn new(phi: Vec<f64>) -> Result<Self> {
        if phi.is_empty() {
            return Err(HcjError::Parameter(
                "profile needs at least one level".into(),
            ));
        }
        let n = phi.len() - 1;
        check_dim(n)?;
        if let Some(index) = phi.iter().position(|v| !v.is_finite()) {
            return Err(HcjError::NonFinite { index });
        }
        Ok(Self { n, phi })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// `max_k |phi(k) - phi(k-1)|`.
    pub fn max_jump(&self) -> f64 {
        self.phi
            .windows(2)
            .fold(0.0f64, |m, w| m.max((w[1] - w[0]).abs()))
    }

    pub fn is_lipschitz(&self) -> bool {
        self.max_jump() <= 1.0
    }
}

/// Reads the level values of a symmetric function.
pub fn profile_of(f: &CubeFunction) -> Result<SymmetricProfile> {
    let n = f.n();
    let mut lo = vec![f64::INFINITY; n + 1];
    let mut hi = vec![f64::NEG_INFINITY; n + 1];
    for (x, &v) in f.values().iter().enumerate() {
        let k = x.count_ones() as usize;
        lo[k] = lo[k].min(v);
        hi[k] = hi[k].max(v);
    }
    for k in 0..=n {
        let spread = hi[k] - lo[k];
        if spread > SYMMETRY_TOLERANCE {
            return Err(HcjError::NotSymmetric { level: k, spread });
        }
    }
    // The value at the lowest index of each level, so that lifting and
    // reading back is exact.
    let phi = (0..=n).map(|k| f.value((1usize << k) - 1)).collect();
    SymmetricProfile::new(phi)
}

pub fn lift_profile(p: &SymmetricProfile) -> CubeFunction {
    CubeFunction::from_fn(p.n, |x| p.phi[x.count_ones() as usize])
        .expect("profile dimension was validated")
}

/// Values of `T_0, ..., T_d` at `2k/n - 1` for `k = 0..=n`.
fn chebyshev_columns(n: usize, d: usize) -> Vec<Vec<f64>> {
    let t: Vec<f64> = (0..=n).map(|k| 2.0 * k as f64 / n as f64 - 1.0).collect();
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    cols.push(vec![1.0; n + 1]);
    if d >= 1 {
        cols.push(t.clone());
    }
    for j in 2..=d {
        let next = (0..=n)
            .map(|k| 2.0 * t[k] * cols[j - 1][k] - cols[j - 2][k])
            .collect();
        cols.push(next);
    }
    cols
}

/// Univariate minimax fit of `phi` on `{0..n}` by degree `d` polynomials.
///
/// Coefficients refer to the Chebyshev basis `T_j(2k/n - 1)`, which spans
/// the same space as `1, k, ..., k^d` with far better conditioning.
pub fn symmetric_fit(p: &SymmetricProfile, d: usize) -> Result<MinimaxResult> {
    if d > p.n {
        return Err(HcjError::Parameter(format!(
            "degree {d} exceeds n = {}",
            p.n
        )));
    }
    let cols = chebyshev_columns(p.n, d);
    let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
    minimax_points(&p.phi, &refs)
}

/// `inf_{deg h <= d} max_k |phi(k) - h(k)|`.
pub fn symmetric_ed(p: &SymmetricProfile, d: usize) -> Result<f64> {
    if d > p.n {
        return Err(HcjError::Parameter(format!(
            "degree {d} exceeds n = {}",
            p.n
        )));
    }
    if d == p.n {
        return Ok(0.0);
    }
    Ok(symmetric_fit(p, d)?.error)
}

/// `((n/2) J, n J)` with `J` the largest jump of the profile. The
/// sensitivity of the lifted function lies between the two.
///
/// Both bounds are accumulated one jump at a time, the same way the
/// sensitivity sum is, so `lower <= s <= upper` also holds in floating point.
pub fn profile_sensitivity_bounds(p: &SymmetricProfile) -> (f64, f64) {
    let jump = p.max_jump();
    let repeat = |times: usize| (0..times).fold(0.0, |acc, _| acc + jump);
    let half = if p.n % 2 == 1 { 0.5 * jump } else { 0.0 };
    (repeat(p.n / 2) + half, repeat(p.n))
}

/// Exact sensitivity of the lifted function, computed on the profile: a
/// point of weight `k` has `k` neighbours one level down and `n - k` one
/// level up.
pub fn profile_sensitivity(p: &SymmetricProfile) -> f64 {
    let n = p.n;
    (0..=n)
        .map(|k| {
            let down = if k > 0 {
                k as f64 * (p.phi[k] - p.phi[k - 1]).abs()
            } else {
                0.0
            };
            let up = if k < n {
                (n - k) as f64 * (p.phi[k + 1] - p.phi[k]).abs()
            } else {
                0.0
            };
            down + up
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct LorenzWitness {
    pub profile: SymmetricProfile,
    pub sign_vector: Vec<i8>,
    pub error: f64,
    pub guarantee: f64,
    /// Spacing `floor(n / (d + 2))` of the tooth centres.
    pub spacing: usize,
    /// Number of sign vectors tried, including the successful one.
    pub tried: usize,
}

/// Profile built from `d + 2` signed teeth of half-width and height `a/2`
/// centred at `0, a, ..., (d+1) a`.
fn teeth_profile(n: usize, a: usize, signs: &[i8]) -> Vec<f64> {
    let half = a as f64 / 2.0;
    (0..=n)
        .map(|k| {
            signs
                .iter()
                .enumerate()
                .map(|(i, &e)| {
                    let dist = (k as f64 - (i * a) as f64).abs();
                    e as f64 * (half - dist).max(0.0)
                })
                .sum()
        })
        .collect()
}

/// Sign vector number `index` in lexicographic order with `+1 < -1` and the
/// first tooth most significant.
fn sign_vector(index: usize, teeth: usize) -> Vec<i8> {
    (0..teeth)
        .map(|t| {
            if index >> (teeth - 1 - t) & 1 == 1 {
                -1
            } else {
                1
            }
        })
        .collect()
}

/// Finds a 1-Lipschitz symmetric profile whose degree-`d` error is at least
/// `a/4`, `a = floor(n / (d+2))`, by exhaustive search over tooth signs.
///
/// Returns the lexicographically first success however the search is
/// scheduled.
pub fn lorenz_witness(n: usize, d: usize) -> Result<LorenzWitness> {
    check_dim(n)?;
    if d == 0 || d > n {
        return Err(HcjError::Parameter(format!(
            "need 1 <= d <= n, got d = {d}, n = {n}"
        )));
    }
    if d > MAX_WITNESS_DEGREE {
        return Err(HcjError::Resource(format!(
            "witness search over 2^{} sign vectors exceeds the budget (d <= {MAX_WITNESS_DEGREE})",
            d + 2
        )));
    }
    let teeth = d + 2;
    let a = n / teeth;
    if a == 0 {
        return Err(HcjError::Parameter(format!(
            "{teeth} teeth do not fit on 0..={n}"
        )));
    }
    let guarantee = a as f64 / 4.0;
    let found = (0..1usize << teeth)
        .into_par_iter()
        .map(
            |index| -> Result<Option<(usize, Vec<i8>, SymmetricProfile, f64)>> {
                let signs = sign_vector(index, teeth);
                let profile = SymmetricProfile::new(teeth_profile(n, a, &signs))?;
                let error = symmetric_ed(&profile, d)?;
                Ok((error >= guarantee).then_some((index, signs, profile, error)))
            },
        )
        .find_first(|r| !matches!(r, Ok(None)));
    let (index, sign_vector, profile, error) = match found {
        Some(r) => r?.expect("filtered to successes"),
        None => {
            return Err(HcjError::Numerical(format!(
                "no sign vector reaches {guarantee} at n = {n}, d = {d}"
            )))
        }
    };
    if !profile.is_lipschitz() {
        return Err(HcjError::Validation(format!(
            "witness profile has jump {} > 1",
            profile.max_jump()
        )));
    }
    Ok(LorenzWitness {
        profile,
        sign_vector,
        error,
        guarantee,
        spacing: a,
        tried: index + 1,
    })
}

/// A random 1-Lipschitz profile: `phi(0) = 0` and i.i.d. uniform steps in
/// `[-1, 1]`.
pub fn random_lipschitz_profile<R: Rng>(n: usize, rng: &mut R) -> SymmetricProfile {
    let mut phi = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    phi.push(acc);
    for _ in 0..n {
        acc += rng.gen_range(-1.0..=1.0);
        phi.push(acc);
    }
    SymmetricProfile::new(phi).expect("finite profile")
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RatioRow {
    pub n: usize,
    pub d: usize,
    /// Largest `E_d(f) d / s(f)` over the sampled profiles.
    pub max_ratio: f64,
}

/// Samples `trials` random 1-Lipschitz profiles for every `1 <= d <= n <=
/// max_n` and records the largest value of `E_d d / s` per pair. Profile
/// `t` of dimension `n` is drawn from stream `n * 2^32 + t` of `seed`, so the
/// table does not depend on scheduling.
pub fn lipschitz_ratio_sweep(max_n: usize, trials: usize, seed: u64) -> Result<Vec<RatioRow>> {
    check_dim(max_n)?;
    let pairs: Vec<(usize, usize)> = (1..=max_n)
        .flat_map(|n| (1..=n).map(move |d| (n, d)))
        .collect();
    pairs
        .into_par_iter()
        .map(|(n, d)| {
            let mut max_ratio = 0.0f64;
            for t in 0..trials {
                let mut rng = ChaCha20Rng::seed_from_u64(seed);
                rng.set_stream(((n as u64) << 32) | t as u64);
                let p = random_lipschitz_profile(n, &mut rng);
                let s = profile_sensitivity(&p);
                if s > 0.0 {
                    max_ratio = max_ratio.max(symmetric_ed(&p, d)? * d as f64 / s);
                }
            }
            Ok(RatioRow { n, d, max_ratio })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::sensitivity;

    fn prof(v: &[f64]) -> SymmetricProfile {
        SymmetricProfile::new(v.to_vec()).unwrap()
    }

    #[test]
    fn profile_examples() {
        let and = CubeFunction::new(2, vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(profile_of(&and).unwrap().phi(), &[0.0, 0.0, 1.0]);
        let maj = CubeFunction::from_fn(3, |x| (x.count_ones() >= 2) as u8 as f64).unwrap();
        assert_eq!(profile_of(&maj).unwrap().phi(), &[0.0, 0.0, 1.0, 1.0]);
        let dict = CubeFunction::new(2, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(
            profile_of(&dict),
            Err(HcjError::NotSymmetric {
                level: 1,
                spread: 1.0
            })
        );
        assert_eq!(
            lift_profile(&prof(&[0.0, 1.0, 0.0])).values(),
            &[0.0, 1.0, 1.0, 0.0]
        );
    }

    #[test]
    fn univariate_examples() {
        let e = symmetric_ed(&prof(&[0.0, 0.0, 1.0]), 1).unwrap();
        assert!((e - 0.25).abs() < 1e-12);
        assert_eq!(symmetric_ed(&prof(&[3.0, -1.0, 2.0]), 2).unwrap(), 0.0);
        let linear = prof(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        for d in 1..5 {
            assert!(symmetric_ed(&linear, d).unwrap() < 1e-12);
        }
    }

    #[test]
    fn sensitivity_examples() {
        assert_eq!(
            profile_sensitivity_bounds(&prof(&[0.0, 0.0, 1.0])),
            (1.0, 2.0)
        );
        assert_eq!(profile_sensitivity_bounds(&prof(&[2.0; 5])), (0.0, 0.0));
        let ramp = prof(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(profile_sensitivity_bounds(&ramp), (2.0, 4.0));
        assert_eq!(profile_sensitivity(&ramp), 4.0);
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for n in 1..=9 {
            let p = random_lipschitz_profile(n, &mut rng);
            let s = sensitivity(&lift_profile(&p)).value;
            assert!((s - profile_sensitivity(&p)).abs() <= 1e-12 * s.max(1.0));
        }
    }

    #[test]
    fn witness_examples() {
        let w = lorenz_witness(8, 1).unwrap();
        assert_eq!((w.spacing, w.guarantee), (2, 0.5));
        assert!(w.error >= 0.5 && w.tried <= 8);
        let w = lorenz_witness(16, 2).unwrap();
        assert_eq!(w.guarantee, 1.0);
        assert!(w.error >= 1.0 && w.profile.is_lipschitz());
        assert!(lorenz_witness(3, 2).is_err());
    }

    #[test]
    fn sign_order_is_lexicographic() {
        assert_eq!(sign_vector(0, 3), vec![1, 1, 1]);
        assert_eq!(sign_vector(1, 3), vec![1, 1, -1]);
        assert_eq!(sign_vector(4, 3), vec![-1, 1, 1]);
    }
}
