//! Dense functions on `{0,1}^n` and their Fourier–Walsh spectra.
//!
//! A table index `i` encodes the point `x` with `x_{j+1}` equal to bit `j`
//! of `i`, so `x_1` is the least significant bit. Spectra use the same
//! encoding for subsets: bit `j` of a mask is set when `j + 1` belongs to
//! the subset. Flipping coordinate `j` is `i ^ (1 << j)`.

use serde::Serialize;

use crate::error::{HcjError, Result};

/// Largest supported dimension: a dense table of `2^26` doubles is 512 MiB.
pub const MAX_DIM: usize = 26;

pub(crate) fn check_dim(n: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(HcjError::Dimension { n, max: MAX_DIM })
    }
}

/// `(-1)^{|mask & x|}`, the Walsh character `W_mask` evaluated at `x`.
#[inline]
pub fn walsh(mask: usize, x: usize) -> f64 {
    if (mask & x).count_ones() & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Unnormalized in-place Walsh–Hadamard butterfly.
///
/// Maps `a` to `x -> sum_S a[S] W_S(x)`. Applying it twice multiplies by
/// `a.len()`.
pub fn butterfly(a: &mut [f64]) {
    let len = a.len();
    debug_assert!(len.is_power_of_two());
    let mut half = 1;
    while half < len {
        for block in a.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (p, q) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, v) = (*p, *q);
                *p = u + v;
                *q = u - v;
            }
        }
        half *= 2;
    }
}

/// A real-valued function on the hypercube stored as a dense table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CubeFunction {
    n: usize,
    values: Vec<f64>,
}

impl CubeFunction {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        check_dim(n)?;
        let expected = 1usize << n;
        if values.len() != expected {
            return Err(HcjError::Length {
                n,
                expected,
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(HcjError::NonFinite { index });
        }
        Ok(Self { n, values })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize) -> f64) -> Result<Self> {
        check_dim(n)?;
        Self::new(n, (0..1usize << n).map(&mut f).collect())
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::from_fn(n, |_| c)
    }

    /// The character `W_S`.
    pub fn character(n: usize, mask: usize) -> Result<Self> {
        if mask >> n != 0 {
            return Err(HcjError::Parameter(format!(
                "subset mask {mask:#b} does not fit in n = {n}"
            )));
        }
        Self::from_fn(n, |x| walsh(mask, x))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn value(&self, x: usize) -> f64 {
        self.values[x]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    /// `||f - g||_inf`.
    pub fn sup_distance(&self, other: &CubeFunction) -> f64 {
        assert_eq!(self.n, other.n, "dimension mismatch");
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// `x -> f(x XOR shift)`.
    pub fn translate(&self, shift: usize) -> CubeFunction {
        let mask = self.len() - 1;
        let values = (0..self.len())
            .map(|x| self.values[(x ^ shift) & mask])
            .collect();
        CubeFunction { n: self.n, values }
    }

    /// `x -> alpha f(x) + beta`.
    pub fn affine(&self, alpha: f64, beta: f64) -> CubeFunction {
        CubeFunction {
            n: self.n,
            values: self.values.iter().map(|v| alpha * v + beta).collect(),
        }
    }

    /// Mean of `|f|` under the uniform measure.
    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() / self.len() as f64
    }
}

/// Fourier–Walsh coefficients indexed by subset bitmask.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    n: usize,
    coeffs: Vec<f64>,
}

impl Spectrum {
    pub fn new(n: usize, coeffs: Vec<f64>) -> Result<Self> {
        check_dim(n)?;
        let expected = 1usize << n;
        if coeffs.len() != expected {
            return Err(HcjError::Length {
                n,
                expected,
                got: coeffs.len(),
            });
        }
        if let Some(index) = coeffs.iter().position(|v| !v.is_finite()) {
            return Err(HcjError::NonFinite { index });
        }
        Ok(Self { n, coeffs })
    }

    pub fn zero(n: usize) -> Result<Self> {
        check_dim(n)?;
        Self::new(n, vec![0.0; 1 << n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, mask: usize) -> f64 {
        self.coeffs[mask]
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `sum_S fhat(S)^2`, which equals `E f^2`.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// Energy carried by subsets of size greater than `d`.
    pub fn tail_energy(&self, d: usize) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(s, _)| s.count_ones() as usize > d)
            .map(|(_, c)| c * c)
            .sum()
    }

    /// Default threshold used by [`degree`] callers that have no better
    /// information.
    pub fn default_tolerance(&self) -> f64 {
        1e-9 * self.max_abs()
    }
}

impl std::ops::Add for &Spectrum {
    type Output = Spectrum;

    fn add(self, rhs: &Spectrum) -> Spectrum {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        Spectrum {
            n: self.n,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

/// Maximizing point and value of the sensitivity `s(f)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SensitivityReport {
    pub value: f64,
    pub argmax_point: usize,
}

pub fn wht_forward(f: &CubeFunction) -> Spectrum {
    let mut coeffs = f.values.clone();
    butterfly(&mut coeffs);
    let scale = (f.len() as f64).recip();
    coeffs.iter_mut().for_each(|c| *c *= scale);
    Spectrum { n: f.n, coeffs }
}

pub fn wht_inverse(s: &Spectrum) -> CubeFunction {
    let mut values = s.coeffs.clone();
    butterfly(&mut values);
    CubeFunction { n: s.n, values }
}

/// Largest `|S|` whose coefficient exceeds `tol` in magnitude.
pub fn degree(s: &Spectrum, tol: f64) -> usize {
    s.coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.abs() > tol)
        .map(|(mask, _)| mask.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

/// Splits the spectrum into the part with `|S| <= d` and the rest.
pub fn truncate(s: &Spectrum, d: usize) -> Result<(Spectrum, Spectrum)> {
    if d > s.n {
        return Err(HcjError::Parameter(format!(
            "degree {d} exceeds n = {}",
            s.n
        )));
    }
    let mut low = s.coeffs.clone();
    let mut tail = s.coeffs.clone();
    for (mask, (l, t)) in low.iter_mut().zip(tail.iter_mut()).enumerate() {
        if mask.count_ones() as usize <= d {
            *t = 0.0;
        } else {
            *l = 0.0;
        }
    }
    Ok((
        Spectrum {
            n: s.n,
            coeffs: low,
        },
        Spectrum {
            n: s.n,
            coeffs: tail,
        },
    ))
}

/// Local sensitivity `sum_j |f(x) - f(x^j)|` at one point.
pub fn local_sensitivity(f: &CubeFunction, x: usize) -> f64 {
    let fx = f.values[x];
    (0..f.n).map(|j| (fx - f.values[x ^ (1 << j)]).abs()).sum()
}

pub fn sensitivity(f: &CubeFunction) -> SensitivityReport {
    let mut best = SensitivityReport {
        value: 0.0,
        argmax_point: 0,
    };
    for x in 0..f.len() {
        let s = local_sensitivity(f, x);
        if s > best.value {
            best = SensitivityReport {
                value: s,
                argmax_point: x,
            };
        }
    }
    best
}

/// `Delta f(x) = sum_j (f(x) - f(x^j))`.
pub fn laplacian(f: &CubeFunction) -> CubeFunction {
    let values = (0..f.len())
        .map(|x| {
            let fx = f.values[x];
            (0..f.n).map(|j| fx - f.values[x ^ (1 << j)]).sum()
        })
        .collect();
    CubeFunction { n: f.n, values }
}

/// `||f_{>d}||_inf` via forward transform, truncation and inverse.
pub fn tail_inf_norm(f: &CubeFunction, d: usize) -> Result<f64> {
    let (_, tail) = truncate(&wht_forward(f), d)?;
    Ok(wht_inverse(&tail).max_abs())
}
