//! Random `+-1` functions, tail-norm concentration trials, and the
//! `||f||_1 / ||Delta f||_1` probe on tail spaces.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::binomial::binom_gt;
use crate::cube::{check_dim, laplacian, truncate, wht_forward, wht_inverse, CubeFunction};
use crate::error::{HcjError, Result};

/// Identifies the generator in run manifests.
pub const RNG_ID: &str =
    "chacha20 (rand_chacha 0.3): key seed_from_u64(seed), one stream per trial or case; sign i from bit i%32 of word i/32";

/// Largest `n` accepted by [`tail_experiment`].
pub const MAX_TRIAL_N: usize = 22;

/// `+-1` values from ChaCha20 keyed by `seed` on stream `stream`: value `i`
/// is bit `i % 32` of word `i / 32`, so any entry is computable on its own.
pub fn random_boolean_stream(n: usize, seed: u64, stream: u64) -> Result<CubeFunction> {
    check_dim(n)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let len = 1usize << n;
    let mut values = Vec::with_capacity(len);
    while values.len() < len {
        let w = rng.next_u32();
        let take = (len - values.len()).min(32);
        values.extend((0..take).map(|b| if w >> b & 1 == 1 { -1.0 } else { 1.0 }));
    }
    CubeFunction::new(n, values)
}

pub fn random_boolean(n: usize, seed: u64) -> Result<CubeFunction> {
    random_boolean_stream(n, seed, 0)
}

/// Values uniform in `[-1, 1]`, drawn in index order from the same keyed
/// generator as [`random_boolean_stream`].
pub fn random_uniform_stream(n: usize, seed: u64, stream: u64) -> Result<CubeFunction> {
    check_dim(n)?;
    CubeFunction::new(n, uniform_values(1 << n, seed, stream))
}

/// `len` values uniform in `[-1, 1]` from stream `stream` of `seed`.
pub fn uniform_values(len: usize, seed: u64, stream: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..len).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

/// `K sqrt(2^-n C(n, > d) n)`.
pub fn hoeffding_bound(n: usize, d: usize, k: f64) -> f64 {
    let tail = binom_gt(n as u64, d as u64) as f64;
    k * (tail * n as f64 / 2f64.powi(n as i32)).sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialStats {
    pub n: usize,
    pub d: usize,
    pub trials: usize,
    pub seed: u64,
    pub k: f64,
    /// `||f_{>d}||_inf` per trial, in trial order.
    pub max_tail_norms: Vec<f64>,
    /// `sum_{|S| > d} f^(S)^2` per trial.
    pub tail_energies: Vec<f64>,
    pub bound: f64,
    pub exceed_count: usize,
}

impl TrialStats {
    pub fn exceed_rate(&self) -> f64 {
        self.exceed_count as f64 / self.trials.max(1) as f64
    }

    pub fn mean_tail_energy(&self) -> f64 {
        self.tail_energies.iter().sum::<f64>() / self.trials.max(1) as f64
    }

    /// `C(n, > d) / 2^n`, the expected tail energy of a random function.
    pub fn expected_tail_energy(&self) -> f64 {
        binom_gt(self.n as u64, self.d as u64) as f64 / 2f64.powi(self.n as i32)
    }
}

/// Trial `t` uses `random_boolean_stream(n, seed, t)`.
pub fn tail_experiment(n: usize, d: usize, trials: usize, seed: u64, k: f64) -> Result<TrialStats> {
    check_dim(n)?;
    if n > MAX_TRIAL_N {
        return Err(HcjError::Resource(format!(
            "tail trials limited to n <= {MAX_TRIAL_N}"
        )));
    }
    if d > n {
        return Err(HcjError::Parameter(format!("degree {d} exceeds n = {n}")));
    }
    if !(k.is_finite() && k > 0.0) {
        return Err(HcjError::Parameter(format!(
            "bound constant K = {k} must be positive"
        )));
    }
    let per_trial: Vec<(f64, f64)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| -> Result<(f64, f64)> {
            let f = random_boolean_stream(n, seed, t)?;
            let spectrum = wht_forward(&f);
            let energy = spectrum.tail_energy(d);
            let (_, tail) = truncate(&spectrum, d)?;
            Ok((wht_inverse(&tail).max_abs(), energy))
        })
        .collect::<Result<_>>()?;
    let bound = hoeffding_bound(n, d, k);
    let (max_tail_norms, tail_energies): (Vec<f64>, Vec<f64>) = per_trial.into_iter().unzip();
    let exceed_count = max_tail_norms.iter().filter(|&&v| v > bound).count();
    Ok(TrialStats {
        n,
        d,
        trials,
        seed,
        k,
        max_tail_norms,
        tail_energies,
        bound,
        exceed_count,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioProbe {
    pub n: usize,
    pub d: usize,
    pub l1: f64,
    pub laplacian_l1: f64,
    /// `||f||_1 / ||Delta f||_1` under the uniform measure.
    pub ratio: f64,
}

/// The reverse Bernstein ratio of `f`, which must have no spectrum on
/// levels `0..=d`.
pub fn ratio_probe(f: &CubeFunction, d: usize) -> Result<RatioProbe> {
    let spectrum = wht_forward(f);
    let top = spectrum.max_abs();
    if top == 0.0 {
        return Err(HcjError::Validation(
            "ratio undefined for the zero function".into(),
        ));
    }
    let low = spectrum
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(s, _)| s.count_ones() as usize <= d)
        .fold(0.0f64, |m, (_, c)| m.max(c.abs()));
    if low > 1e-9 * top {
        return Err(HcjError::Validation(format!(
            "function has spectrum {low:e} at level <= {d}; expected a tail-space member"
        )));
    }
    let len = f.len() as f64;
    let l1 = f.l1_norm() / len;
    let laplacian_l1 = laplacian(f).l1_norm() / len;
    Ok(RatioProbe {
        n: f.n(),
        d,
        l1,
        laplacian_l1,
        ratio: l1 / laplacian_l1,
    })
}
