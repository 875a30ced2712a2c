//! The reproduction suite: every finite inequality behind the results,
//! checked at configurable sizes with a pass/fail line per claim.
//!
//! Random inputs come from `(seed, stream)` pairs with the stream derived
//! from the claim and the case number, and parallel loops collect in case
//! order, so a table depends on the seed and the configuration alone.

use std::path::Path;

use hcj_core::binomial::binom_le;
use hcj_core::{
    ed_at_most, ed_n, explicit_h, family_member, gauss_binomial_quadrature, greedy_packing,
    guarantee_frontier, hat, jackson_bounds, kernel_apply, kernel_constant,
    kravchuk::binomial_moments_f64, laplacian, lift_profile, lorenz_witness,
    odd_harmonic_dimension, odd_harmonic_project, packing::guarantee_from_packing,
    profile_sensitivity_bounds, ptf_census, random_boolean_stream, random_uniform_stream,
    ratio_probe, sensitivity, smallest_positive_root, symmetric_ed, tail_experiment,
    uniform_values, wht_forward, wht_inverse, CensusReport, CubeFunction, FrontierRow, HatSpec,
    PackingFamily, SymmetricProfile,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::output::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Claim {
    Wht,
    Wagner,
    Symmetric,
    Lorenz,
    Kernel,
    Jackson,
    Quadrature,
    Harmonic,
    Packing,
    Census,
    RandomTail,
    Laplacian,
}

impl Claim {
    pub const ALL: [Claim; 12] = [
        Claim::Wht,
        Claim::Wagner,
        Claim::Symmetric,
        Claim::Lorenz,
        Claim::Kernel,
        Claim::Jackson,
        Claim::Quadrature,
        Claim::Harmonic,
        Claim::Packing,
        Claim::Census,
        Claim::RandomTail,
        Claim::Laplacian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Claim::Wht => "wht",
            Claim::Wagner => "wagner",
            Claim::Symmetric => "symmetric",
            Claim::Lorenz => "lorenz",
            Claim::Kernel => "kernel",
            Claim::Jackson => "jackson",
            Claim::Quadrature => "quadrature",
            Claim::Harmonic => "harmonic",
            Claim::Packing => "packing",
            Claim::Census => "census",
            Claim::RandomTail => "random-tail",
            Claim::Laplacian => "laplacian",
        }
    }

    /// Position in the acceptance matrix, 1 to 12.
    pub fn number(self) -> usize {
        Claim::ALL.iter().position(|&c| c == self).unwrap() + 1
    }

    /// A claim by name or by number.
    pub fn parse(s: &str) -> CliResult<Claim> {
        let s = s.trim();
        Claim::ALL
            .into_iter()
            .find(|c| c.name() == s || c.number().to_string() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Claim::ALL.iter().map(|c| c.name()).collect();
                CliError::Input(format!("unknown claim {s:?}; known: {}", names.join(", ")))
            })
    }

    fn tag(self) -> u64 {
        (self.number() as u64) << 40
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReproConfig {
    pub seed: u64,
    /// Claim names or numbers; empty runs all of them.
    pub claims: Vec<String>,
    pub wht: WhtConfig,
    pub wagner: WagnerConfig,
    pub symmetric: SymmetricConfig,
    pub lorenz: LorenzConfig,
    pub kernel: KernelConfig,
    pub jackson: KernelConfig,
    pub quadrature: QuadratureConfig,
    pub harmonic: HarmonicConfig,
    pub packing: PackingConfig,
    pub census: CensusConfig,
    pub random_tail: RandomTailConfig,
    pub laplacian: LaplacianConfig,
}

impl Default for ReproConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            claims: Vec::new(),
            wht: WhtConfig::default(),
            wagner: WagnerConfig::default(),
            symmetric: SymmetricConfig::default(),
            lorenz: LorenzConfig::default(),
            kernel: KernelConfig::default(),
            jackson: KernelConfig::default(),
            quadrature: QuadratureConfig::default(),
            harmonic: HarmonicConfig::default(),
            packing: PackingConfig::default(),
            census: CensusConfig::default(),
            random_tail: RandomTailConfig::default(),
            laplacian: LaplacianConfig::default(),
        }
    }
}

macro_rules! config {
    ($name:ident { $($field:ident : $ty:ty = $default:expr),* $(,)? }) => {
        #[derive(Debug, Clone, Serialize, Deserialize)]
        #[serde(default, deny_unknown_fields)]
        pub struct $name { $(pub $field: $ty),* }
        impl Default for $name {
            fn default() -> Self { Self { $($field: $default),* } }
        }
    };
}

config!(WhtConfig {
    functions: usize = 1000,
    max_n: usize = 16
});
config!(WagnerConfig {
    functions: usize = 1000,
    max_n: usize = 10
});
config!(SymmetricConfig {
    profiles: usize = 200,
    max_n: usize = 12
});
config!(LorenzConfig {
    max_n: usize = 16,
    max_d: usize = 4,
    cube_check_max_n: usize = 10
});
config!(KernelConfig {
    functions: usize = 200,
    max_n: usize = 12
});
config!(QuadratureConfig { max_n: usize = 30 });
config!(HarmonicConfig {
    functions: usize = 1000,
    max_n: usize = 14,
    rank_max_n: usize = 10
});
config!(PackingConfig {
    max_n: usize = 12,
    family_signs: usize = 4,
    frontier_max_n: usize = 24
});
config!(CensusConfig {
    include_n4: bool = true
});
config!(RandomTailConfig {
    n: usize = 16,
    degrees: Vec<usize> = vec![8, 10, 12],
    trials: usize = 200,
    k: f64 = 3.0,
    max_exceed_rate: f64 = 0.01,
    energy_tolerance: f64 = 0.05,
});
config!(LaplacianConfig { max_n: usize = 12 });

impl ReproConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.display().to_string(),
            source,
        })?;
        let is_json = path.extension().is_some_and(|e| e == "json");
        if is_json {
            serde_json::from_str(&text).map_err(|e| CliError::Input(format!("config: {e}")))
        } else {
            toml::from_str(&text).map_err(|e| CliError::Input(format!("config: {e}")))
        }
    }

    pub fn selected(&self) -> CliResult<Vec<Claim>> {
        if self.claims.is_empty() {
            return Ok(Claim::ALL.to_vec());
        }
        let mut out: Vec<Claim> = self
            .claims
            .iter()
            .map(|s| Claim::parse(s))
            .collect::<CliResult<_>>()?;
        out.sort_by_key(|c| c.number());
        out.dedup();
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct ClaimOutcome {
    pub claim: Claim,
    pub passed: bool,
    pub cases: u64,
    pub violations: u64,
    /// The measured statistic the claim is judged on.
    pub worst: f64,
    /// The limit `worst` is compared against.
    pub limit: f64,
    pub detail: String,
    /// The certificate sweep, kept for regression comparison.
    pub frontier: Option<Vec<FrontierRow>>,
    /// Census results, kept for cross-checking.
    pub census: Vec<CensusReport>,
}

impl ClaimOutcome {
    fn new(
        claim: Claim,
        cases: u64,
        violations: u64,
        worst: f64,
        limit: f64,
        detail: String,
    ) -> Self {
        Self {
            claim,
            passed: violations == 0,
            cases,
            violations,
            worst,
            limit,
            detail,
            frontier: None,
            census: Vec::new(),
        }
    }
}

pub fn run_claim(claim: Claim, cfg: &ReproConfig) -> CliResult<ClaimOutcome> {
    let seed = cfg.seed;
    match claim {
        Claim::Wht => wht(&cfg.wht, seed),
        Claim::Wagner => wagner(&cfg.wagner, seed),
        Claim::Symmetric => symmetric(&cfg.symmetric, seed),
        Claim::Lorenz => lorenz(&cfg.lorenz),
        Claim::Kernel => kernel(&cfg.kernel, seed),
        Claim::Jackson => jackson(&cfg.jackson, seed),
        Claim::Quadrature => quadrature(&cfg.quadrature),
        Claim::Harmonic => harmonic(&cfg.harmonic, seed),
        Claim::Packing => packing(&cfg.packing, seed),
        Claim::Census => census(&cfg.census),
        Claim::RandomTail => random_tail(&cfg.random_tail, seed),
        Claim::Laplacian => laplacian_claim(&cfg.laplacian),
    }
}

pub fn run_suite(cfg: &ReproConfig) -> CliResult<Vec<ClaimOutcome>> {
    cfg.selected()?
        .into_iter()
        .map(|c| run_claim(c, cfg))
        .collect()
}

pub fn outcome_table(outcomes: &[ClaimOutcome]) -> Table {
    let mut t = Table::new(&[
        "criterion",
        "claim",
        "status",
        "cases",
        "violations",
        "worst",
        "limit",
        "detail",
    ]);
    for o in outcomes {
        t.push(vec![
            o.claim.number().into(),
            o.claim.name().into(),
            Cell::from(if o.passed { "pass" } else { "fail" }),
            o.cases.into(),
            o.violations.into(),
            o.worst.into(),
            o.limit.into(),
            o.detail.clone().into(),
        ]);
    }
    t
}

/// Case `i` alternates between `+-1` and uniform tables.
fn mixed_function(n: usize, seed: u64, stream: u64, i: usize) -> CliResult<CubeFunction> {
    Ok(if i % 2 == 0 {
        random_boolean_stream(n, seed, stream)?
    } else {
        random_uniform_stream(n, seed, stream)?
    })
}

fn wht(cfg: &WhtConfig, seed: u64) -> CliResult<ClaimOutcome> {
    const LIMIT: f64 = 1e-10;
    let errs: Vec<f64> = (0..cfg.functions)
        .into_par_iter()
        .map(|i| -> CliResult<f64> {
            let n = 1 + i % cfg.max_n;
            let f = random_uniform_stream(n, seed, Claim::Wht.tag() | i as u64)?;
            let s = wht_forward(&f);
            let back = wht_inverse(&s);
            let roundtrip = f.sup_distance(&back) / f.max_abs();
            let mean_sq = f.values().iter().map(|v| v * v).sum::<f64>() / f.len() as f64;
            let parseval = (s.energy() - mean_sq).abs() / mean_sq;
            Ok(roundtrip.max(parseval))
        })
        .collect::<CliResult<_>>()?;
    let worst = errs.iter().copied().fold(0.0, f64::max);
    let bad = errs.iter().filter(|&&e| !(e <= LIMIT)).count() as u64;
    Ok(ClaimOutcome::new(
        Claim::Wht,
        errs.len() as u64,
        bad,
        worst,
        LIMIT,
        format!(
            "roundtrip and Parseval relative error, n in 1..={}",
            cfg.max_n
        ),
    ))
}

fn wagner(cfg: &WagnerConfig, seed: u64) -> CliResult<ClaimOutcome> {
    const TOL: f64 = 1e-9;
    let rows: Vec<(bool, f64)> = (0..cfg.functions)
        .into_par_iter()
        .map(|i| -> CliResult<(bool, f64)> {
            let n = 1 + i % cfg.max_n;
            let f = mixed_function(n, seed, Claim::Wagner.tag() | i as u64, i)?;
            let e0 = ed_n(&f, 0)?;
            let spread = (f.max() - f.min()) / 2.0;
            let s = sensitivity(&f).value;
            let ok = (e0 - spread).abs() <= TOL && e0 <= s + TOL;
            let ratio = if s > 0.0 { e0 / s } else { 0.0 };
            Ok((ok, ratio))
        })
        .collect::<CliResult<_>>()?;
    let bad = rows.iter().filter(|r| !r.0).count() as u64;
    let worst = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(ClaimOutcome::new(
        Claim::Wagner,
        rows.len() as u64,
        bad,
        worst,
        1.0,
        format!(
            "max E_0/s; E_0 = (max-min)/2 and E_0 <= s + {TOL:e}, n in 1..={}",
            cfg.max_n
        ),
    ))
}

fn symmetric(cfg: &SymmetricConfig, seed: u64) -> CliResult<ClaimOutcome> {
    const TOL: f64 = 1e-8;
    let per_profile: Vec<(u64, u64, f64)> = (0..cfg.profiles)
        .into_par_iter()
        .map(|i| -> CliResult<(u64, u64, f64)> {
            let n = 1 + i % cfg.max_n;
            let phi = uniform_values(n + 1, seed, Claim::Symmetric.tag() | i as u64);
            let p = SymmetricProfile::new(phi)?;
            let f = lift_profile(&p);
            let (lower, upper) = profile_sensitivity_bounds(&p);
            let s = sensitivity(&f).value;
            let mut bad = u64::from(!(lower <= s && s <= upper));
            let mut worst = 0.0f64;
            for d in 0..=n {
                let gap = (symmetric_ed(&p, d)? - ed_n(&f, d)?).abs();
                worst = worst.max(gap);
                bad += u64::from(!(gap <= TOL));
            }
            Ok((n as u64 + 1, bad, worst))
        })
        .collect::<CliResult<_>>()?;
    let cases = per_profile.iter().map(|r| r.0).sum();
    let bad = per_profile.iter().map(|r| r.1).sum();
    let worst = per_profile.iter().map(|r| r.2).fold(0.0, f64::max);
    Ok(ClaimOutcome::new(
        Claim::Symmetric,
        cases,
        bad,
        worst,
        TOL,
        format!(
            "|symmetric_ed - ed_n(lift)| over {} profiles and all d, sandwich checked per profile",
            cfg.profiles
        ),
    ))
}

fn max_jump(phi: &[f64]) -> f64 {
    phi.windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max)
}

fn lorenz(cfg: &LorenzConfig) -> CliResult<ClaimOutcome> {
    let pairs: Vec<(usize, usize)> = (1..=cfg.max_n)
        .flat_map(|n| (1..=cfg.max_d).map(move |d| (n, d)))
        .filter(|&(n, d)| n >= d + 2)
        .collect();
    struct Case {
        n: usize,
        d: usize,
        witness_ok: bool,
        ratio: f64,
    }
    let cases: Vec<Case> = pairs
        .par_iter()
        .map(|&(n, d)| -> CliResult<Case> {
            let w = lorenz_witness(n, d)?;
            let phi = w.profile.phi();
            let a = n / (d + 2);
            let guarantee = a as f64 / 4.0;
            // Recheck what the search reported instead of trusting it.
            let error = symmetric_ed(&w.profile, d)?;
            let f = lift_profile(&w.profile);
            let mut witness_ok = max_jump(phi) <= 1.0 && error >= guarantee;
            if n <= cfg.cube_check_max_n {
                witness_ok &= (ed_n(&f, d)? - error).abs() <= 1e-8;
            }
            let s = sensitivity(&f).value;
            witness_ok &= s <= n as f64;
            Ok(Case {
                n,
                d,
                witness_ok,
                ratio: error * 8.0 * d as f64 / s,
            })
        })
        .collect::<CliResult<_>>()?;
    let witness_bad = cases.iter().filter(|c| !c.witness_ok).count();
    let clause_bad: Vec<&Case> = cases.iter().filter(|c| !(c.ratio >= 1.0)).collect();
    let worst = cases.iter().map(|c| c.ratio).fold(f64::INFINITY, f64::min);
    let mut detail = format!(
        "min 8d E_d / s over witnesses; {} of {} witnesses valid (1-Lipschitz, E_d >= floor(n/(d+2))/4, s <= n)",
        cases.len() - witness_bad,
        cases.len()
    );
    if let Some(first) = clause_bad.first() {
        detail.push_str(&format!(
            "; E_d >= s/(8d) fails in {} cases, first at n={} d={}",
            clause_bad.len(),
            first.n,
            first.d
        ));
    }
    Ok(ClaimOutcome::new(
        Claim::Lorenz,
        cases.len() as u64,
        (witness_bad + clause_bad.len()) as u64,
        worst,
        1.0,
        detail,
    ))
}

/// Cases `(n, d, i)` for every `n <= max_n`, `d <= n` and `i < per`.
fn sweep(max_n: usize, per: usize) -> Vec<(usize, usize, usize)> {
    (1..=max_n)
        .flat_map(|n| (0..=n).flat_map(move |d| (0..per).map(move |i| (n, d, i))))
        .collect()
}

fn case_stream(claim: Claim, n: usize, d: usize, i: usize) -> u64 {
    claim.tag() | (n as u64) << 32 | (d as u64) << 24 | i as u64
}

fn kernel(cfg: &KernelConfig, seed: u64) -> CliResult<ClaimOutcome> {
    let cases = sweep(cfg.max_n, cfg.functions);
    let rows: Vec<(bool, f64)> = cases
        .par_iter()
        .map(|&(n, d, i)| -> CliResult<(bool, f64)> {
            let f = mixed_function(n, seed, case_stream(Claim::Kernel, n, d, i), i)?;
            let h = explicit_h(n, d)?;
            let err = f.sup_distance(&kernel_apply(&f, &h)?);
            let s = sensitivity(&f).value;
            let bound = 3.0 * s / n as f64 * kernel_constant(n, &h);
            let ratio = if bound > 0.0 { err / bound } else { 0.0 };
            Ok((err <= bound + 1e-9 * s, ratio))
        })
        .collect::<CliResult<_>>()?;
    let bad = rows.iter().filter(|r| !r.0).count() as u64;
    let worst = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(ClaimOutcome::new(
        Claim::Kernel,
        rows.len() as u64,
        bad,
        worst,
        1.0,
        format!(
            "max ||f - K_h f|| / (3 (s/n) E|h|), h = explicit_h, {} functions per (n, d), n <= {}",
            cfg.functions, cfg.max_n
        ),
    ))
}

fn jackson(cfg: &KernelConfig, seed: u64) -> CliResult<ClaimOutcome> {
    const SPOT_TOL: f64 = 1e-9;
    let cases = sweep(cfg.max_n, cfg.functions);
    let multipliers: Vec<Vec<(f64, f64)>> = (1..=cfg.max_n)
        .map(|n| {
            (0..=n)
                .map(|d| {
                    let k = smallest_positive_root(n, d / 2 + 1)?;
                    Ok((3.0 * k / n as f64, 3.0 * (1.0 - d as f64 / n as f64)))
                })
                .collect::<CliResult<_>>()
        })
        .collect::<CliResult<_>>()?;
    let rows: Vec<(u64, f64)> = cases
        .par_iter()
        .map(|&(n, d, i)| -> CliResult<(u64, f64)> {
            let f = mixed_function(n, seed, case_stream(Claim::Jackson, n, d, i), i)?;
            let s = sensitivity(&f).value;
            let (kj, pj) = multipliers[n - 1][d];
            let mut bad = 0;
            let mut ratio = 0.0f64;
            for j in [kj, pj] {
                let dec = ed_at_most(&f, d, j * s + 1e-9 * s)?;
                bad += u64::from(!dec.holds);
                if j * s > 0.0 {
                    ratio = ratio.max(dec.upper / (j * s));
                }
            }
            Ok((bad, ratio))
        })
        .collect::<CliResult<_>>()?;
    let mut bad: u64 = rows.iter().map(|r| r.0).sum();
    let worst = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let k42 = smallest_positive_root(4, 2)?;
    let combined = jackson_bounds(4, 2)?.combined;
    let spots_ok = (k42 - 1.0).abs() <= SPOT_TOL && (combined - 0.75).abs() <= SPOT_TOL;
    bad += u64::from(!spots_ok);
    Ok(ClaimOutcome::new(
        Claim::Jackson,
        2 * rows.len() as u64 + 1,
        bad,
        worst,
        1.0,
        format!(
            "max certified E_d / (J s) for J = 3 k_(n,d/2+1)/n and 3 (1-d/n); k_(4,2) = {k42:?}, combined(4,2) = {combined:?}"
        ),
    ))
}

fn quadrature(cfg: &QuadratureConfig) -> CliResult<ClaimOutcome> {
    const MOMENT_TOL: f64 = 1e-9;
    const SUM_TOL: f64 = 1e-12;
    let pairs: Vec<(usize, usize)> = (1..=cfg.max_n)
        .flat_map(|n| (0..n).map(move |p| (n, p)))
        .collect();
    let rows: Vec<(bool, f64)> = pairs
        .par_iter()
        .map(|&(n, p)| -> CliResult<(bool, f64)> {
            let rule = gauss_binomial_quadrature(n, p)?;
            let exact = binomial_moments_f64(n, 2 * p + 1);
            let mut worst = 0.0f64;
            for (j, m) in exact.iter().enumerate() {
                let got = rule.integrate(|x| x.powi(j as i32));
                worst = worst.max((got - m).abs() / m.abs());
            }
            let positive = rule.weights.iter().all(|&w| w > 0.0);
            let sum: f64 = rule.weights.iter().sum();
            Ok((
                positive && (sum - 1.0).abs() <= SUM_TOL && worst <= MOMENT_TOL,
                worst,
            ))
        })
        .collect::<CliResult<_>>()?;
    let bad = rows.iter().filter(|r| !r.0).count() as u64;
    let worst = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(ClaimOutcome::new(
        Claim::Quadrature,
        rows.len() as u64,
        bad,
        worst,
        MOMENT_TOL,
        format!(
            "max relative moment error through degree 2p+1, n <= {}; weights positive, sum within {SUM_TOL:e}",
            cfg.max_n
        ),
    ))
}

fn harmonic(cfg: &HarmonicConfig, seed: u64) -> CliResult<ClaimOutcome> {
    // Averaging rounds once per neighbour; the bound is exact otherwise.
    const REL: f64 = 1e-12;
    let rows: Vec<(bool, f64)> = (0..cfg.functions)
        .into_par_iter()
        .map(|i| -> CliResult<(bool, f64)> {
            let n = 1 + i % cfg.max_n;
            let f = mixed_function(n, seed, Claim::Harmonic.tag() | i as u64, i)?;
            let r = odd_harmonic_project(&f);
            let ratio = if r.bound > 0.0 {
                r.error / r.bound
            } else {
                0.0
            };
            Ok((r.error <= r.bound * (1.0 + REL), ratio))
        })
        .collect::<CliResult<_>>()?;
    let mut bad = rows.iter().filter(|r| !r.0).count() as u64;
    let worst = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let mut extra = 0;
    for n in 1..=cfg.max_n {
        let parity =
            CubeFunction::from_fn(n, |x| if x.count_ones() % 2 == 1 { -1.0 } else { 1.0 })?;
        let r = odd_harmonic_project(&parity);
        bad += u64::from(!(r.error == 2.0 && r.bound == 2.0));
        extra += 1;
    }
    for n in 1..=cfg.rank_max_n {
        bad += u64::from(odd_harmonic_dimension(n)? != 1 << (n - 1));
        extra += 1;
    }
    Ok(ClaimOutcome::new(
        Claim::Harmonic,
        rows.len() as u64 + extra,
        bad,
        worst,
        1.0,
        format!(
            "max error / (s/n) over {} functions; parity error = s/n = 2 for n <= {}; dim = 2^(n-1) by rank for n <= {}",
            cfg.functions, cfg.max_n, cfg.rank_max_n
        ),
    ))
}

/// `m s(f)` from the integer numerators `m f(x)`, or `None` if some value
/// is not a multiple of `1/m`.
fn scaled_sensitivity(f: &CubeFunction, m: usize) -> Option<i64> {
    let num: Vec<i64> = f
        .values()
        .iter()
        .map(|v| (v * m as f64).round() as i64)
        .collect();
    let exact = f
        .values()
        .iter()
        .zip(&num)
        .all(|(v, k)| (v * m as f64 - *k as f64).abs() < 1e-9);
    exact.then(|| {
        (0..num.len())
            .map(|x| {
                (0..f.n())
                    .map(|j| (num[x] - num[x ^ (1 << j)]).abs())
                    .sum::<i64>()
            })
            .max()
            .unwrap_or(0)
    })
}

/// `s(f) = n/m` on the numerators, and within a few ulps in floating point.
fn is_n_over_m(f: &CubeFunction, n: usize, m: usize) -> bool {
    let target = n as f64 / m as f64;
    let s = sensitivity(f).value;
    scaled_sensitivity(f, m) == Some(n as i64)
        && (s - target).abs() <= 4.0 * n as f64 * f64::EPSILON * target
}

fn packing(cfg: &PackingConfig, seed: u64) -> CliResult<ClaimOutcome> {
    let mut cases = 0u64;
    let mut bad = 0u64;
    let mut worst = f64::INFINITY;
    for n in 1..=cfg.max_n {
        for m in 1..=n {
            for center in [0, (1usize << n) - 1, 0b1010_1010_1010 & ((1 << n) - 1)] {
                cases += 1;
                bad += u64::from(!is_n_over_m(&hat(HatSpec { n, center, m })?, n, m));
            }
        }
        for m in (1..).take_while(|m| 2 * m <= n) {
            let centers = greedy_packing(n, m)?;
            // |P| >= 2^n / C(n, <= 2m), compared in integers.
            let need = binom_le(n as u64, 2 * m as u64);
            cases += 1;
            bad += u64::from((centers.len() as u128) * need < 1u128 << n);
            worst = worst.min(centers.len() as f64 * need as f64 / 2f64.powi(n as i32));
            for k in 0..cfg.family_signs {
                let stream = case_stream(Claim::Packing, n, m, k);
                let signs = uniform_values(centers.len(), seed, stream)
                    .into_iter()
                    .map(|v| if v < 0.0 { -1 } else { 1 })
                    .collect();
                let member = family_member(&PackingFamily {
                    n,
                    m,
                    centers: centers.clone(),
                    signs,
                })?;
                cases += 1;
                bad += u64::from(!is_n_over_m(&member, n, m));
            }
        }
    }
    let frontier = guarantee_frontier(cfg.frontier_max_n)?;
    let certified = frontier.iter().filter(|r| r.max_certified_d > 0).count();
    // Every decision the sweep made, the first failing degree included,
    // must have come from integer arithmetic.
    for r in &frontier {
        for d in 1..=(r.max_certified_d + 1).min(r.n / 2) {
            let g = guarantee_from_packing(r.n, r.m, d, r.packing_size)?;
            cases += 1;
            bad += u64::from(!g.exact || g.holds != (d <= r.max_certified_d));
        }
    }
    let mut out = ClaimOutcome::new(
        Claim::Packing,
        cases,
        bad,
        worst,
        1.0,
        format!(
            "min |P| C(n,<=2m) / 2^n for n <= {}; hats and family members have s = n/m; exact certificate sweep to n = {}: {} of {} (n, m) certify some d",
            cfg.max_n,
            cfg.frontier_max_n,
            certified,
            frontier.len()
        ),
    );
    out.frontier = Some(frontier);
    Ok(out)
}

fn census(cfg: &CensusConfig) -> CliResult<ClaimOutcome> {
    let mut reports = vec![ptf_census(2, 1)?, ptf_census(3, 1)?];
    if cfg.include_n4 {
        reports.push(ptf_census(4, 1)?);
    }
    let bad = u64::from(reports[0].fraction != 0.125)
        + reports[1..].iter().filter(|r| !(r.fraction >= 0.5)).count() as u64;
    let counts: Vec<String> = reports
        .iter()
        .map(|r| format!("n={} {}/{}", r.n, r.hard_count, r.total))
        .collect();
    let mut out = ClaimOutcome::new(
        Claim::Census,
        reports.iter().map(|r| r.total).sum(),
        bad,
        reports[1..].iter().map(|r| r.fraction).fold(1.0, f64::min),
        0.5,
        format!(
            "functions with E_1 >= 1: {}; n=2 must give 1/8, larger n at least 1/2",
            counts.join(", ")
        ),
    );
    out.census = reports;
    Ok(out)
}

fn random_tail(cfg: &RandomTailConfig, seed: u64) -> CliResult<ClaimOutcome> {
    let mut bad = 0;
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for &d in &cfg.degrees {
        let t = tail_experiment(cfg.n, d, cfg.trials, seed ^ Claim::RandomTail.tag(), cfg.k)?;
        let rel =
            (t.mean_tail_energy() - t.expected_tail_energy()).abs() / t.expected_tail_energy();
        bad += u64::from(!(t.exceed_rate() <= cfg.max_exceed_rate && rel <= cfg.energy_tolerance));
        worst = worst.max(t.exceed_rate());
        parts.push(format!(
            "d={d} exceed {} energy off {:.4}",
            t.exceed_count, rel
        ));
    }
    Ok(ClaimOutcome::new(
        Claim::RandomTail,
        cfg.degrees.len() as u64,
        bad,
        worst,
        cfg.max_exceed_rate,
        format!(
            "max exceed rate of K={} bound at n={}, {} trials; {}",
            cfg.k,
            cfg.n,
            cfg.trials,
            parts.join(", ")
        ),
    ))
}

fn laplacian_claim(cfg: &LaplacianConfig) -> CliResult<ClaimOutcome> {
    const TOL: f64 = 1e-12;
    let pairs: Vec<(usize, usize)> = (1..=cfg.max_n)
        .flat_map(|n| (0..1usize << n).map(move |s| (n, s)))
        .collect();
    let rows: Vec<(bool, f64)> = pairs
        .par_iter()
        .map(|&(n, s)| -> CliResult<(bool, f64)> {
            let w = CubeFunction::character(n, s)?;
            let k = s.count_ones() as usize;
            let lw = laplacian(&w);
            let eigen = lw
                .values()
                .iter()
                .zip(w.values())
                .all(|(a, b)| *a == 2.0 * k as f64 * b);
            if k == 0 {
                return Ok((eigen, 0.0));
            }
            let gap = (ratio_probe(&w, k - 1)?.ratio - 1.0 / (2 * k) as f64).abs();
            Ok((eigen && gap <= TOL, gap))
        })
        .collect::<CliResult<_>>()?;
    let bad = rows.iter().filter(|r| !r.0).count() as u64;
    let worst = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(ClaimOutcome::new(
        Claim::Laplacian,
        rows.len() as u64,
        bad,
        worst,
        TOL,
        format!(
            "Delta W_S = 2|S| W_S exactly for every S, n <= {}; max |ratio - 1/(2|S|)|",
            cfg.max_n
        ),
    ))
}
