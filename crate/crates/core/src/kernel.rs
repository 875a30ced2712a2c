//! Radial convolution kernels `g(x) = E_y f(y) h(|x xor y|)` and the
//! Jackson-type multipliers they produce.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::binomial::{binom_big, binom_f64};
use crate::cube::{check_dim, sensitivity, wht_forward, wht_inverse, CubeFunction, Spectrum};
use crate::error::{HcjError, Result};
use crate::kravchuk::{kravchuk_roots, smallest_positive_root};
use crate::poly::UnivariatePoly;

/// Accepted deviation of `E h(X)` from one.
pub const KERNEL_MEAN_TOLERANCE: f64 = 1e-9;

/// Largest `n` for the quadratic-time reference convolution.
pub const DIRECT_KERNEL_MAX_N: usize = 12;

/// `E g(X)` for `X ~ Bin(n, 1/2)`.
pub fn binomial_expectation(n: usize, mut g: impl FnMut(usize) -> f64) -> f64 {
    let scale = 0.5f64.powi(n as i32);
    (0..=n)
        .map(|k| binom_f64(n as u64, k as u64) * scale * g(k))
        .sum()
}

/// `E h(X)`.
pub fn kernel_mean(n: usize, h: &UnivariatePoly) -> f64 {
    binomial_expectation(n, |k| h.eval(k as f64))
}

/// `E X |h(X)|`, the constant in the convolution error bound.
pub fn kernel_constant(n: usize, h: &UnivariatePoly) -> f64 {
    binomial_expectation(n, |k| k as f64 * h.eval(k as f64).abs())
}

/// `3 (s(f) / n) E X |h(X)|`, an upper bound on `||f - kernel_apply(f, h)||`.
pub fn convolution_bound(f: &CubeFunction, h: &UnivariatePoly) -> f64 {
    3.0 * sensitivity(f).value / f.n() as f64 * kernel_constant(f.n(), h)
}

/// `h(x) = prod_{k=n-d+1}^{n} (k - x) / E[...]`: nonnegative on `{0..n}`,
/// zero on the top `d` levels, mean one.
pub fn explicit_h(n: usize, d: usize) -> Result<UnivariatePoly> {
    check_dim(n)?;
    if d > n {
        return Err(HcjError::Parameter(format!("degree {d} exceeds n = {n}")));
    }
    let mut coeffs = vec![BigInt::one()];
    for k in n - d + 1..=n {
        let mut next = vec![BigInt::zero(); coeffs.len() + 1];
        for (i, c) in coeffs.iter().enumerate() {
            next[i] += c * BigInt::from(k);
            next[i + 1] -= c;
        }
        coeffs = next;
    }
    // 2^n E h~(X) = sum_j C(n, j) (n-j)! / (n-d-j)!.
    let mut total = BigInt::zero();
    for j in 0..=n - d {
        let mut falling = BigInt::one();
        for t in 0..d {
            falling *= BigInt::from(n - j - t);
        }
        total += BigInt::from(binom_big(n as u64, j as u64)) * falling;
    }
    let scale = BigInt::one() << n;
    let to_f64 = |c: BigInt| {
        BigRational::new(c * &scale, total.clone())
            .to_f64()
            .unwrap_or(f64::NAN)
    };
    let lead = if d % 2 == 0 {
        BigInt::one()
    } else {
        -BigInt::one()
    };
    let factor = to_f64(lead);
    let poly = UnivariatePoly::new(coeffs.into_iter().map(to_f64).collect())?;
    let roots = (n - d + 1..=n).map(|k| k as f64).collect();
    Ok(poly.with_factors(roots, factor))
}

/// The kernel from the Gauss rule: `h = Q^2 / E Q^2` with `Q` vanishing on
/// every node of the `p + 1` point rule except the smallest, `p = d / 2`.
/// Then `deg h = 2p <= d` and `E X h(X) = k_{n, p+1}`.
pub fn quadrature_h(n: usize, d: usize) -> Result<UnivariatePoly> {
    check_dim(n)?;
    if d > n {
        return Err(HcjError::Parameter(format!("degree {d} exceeds n = {n}")));
    }
    let p = d / 2;
    let nodes = kravchuk_roots(n, p + 1)?;
    let q = UnivariatePoly::from_roots(&nodes[1..], 1.0)?;
    let q2 = q.mul(&q);
    let mean = kernel_mean(n, &q2);
    Ok(q2.scaled(1.0 / mean))
}

fn kernel_levels(n: usize, h: &UnivariatePoly) -> Result<Vec<f64>> {
    if h.degree() > n {
        return Err(HcjError::Parameter(format!(
            "kernel degree {} exceeds n = {n}",
            h.degree()
        )));
    }
    let mean = kernel_mean(n, h);
    if (mean - 1.0).abs() > KERNEL_MEAN_TOLERANCE {
        return Err(HcjError::Validation(format!(
            "kernel mean E h(X) = {mean}, expected 1"
        )));
    }
    Ok((0..=n).map(|k| h.eval(k as f64)).collect())
}

/// The convolution `g(x) = 2^-n sum_y f(y) h(|x xor y|)`, computed through
/// the spectrum: characters are eigenfunctions with eigenvalue `H^(S)`,
/// which depends on `|S|` only.
pub fn kernel_apply(f: &CubeFunction, h: &UnivariatePoly) -> Result<CubeFunction> {
    let n = f.n();
    let levels = kernel_levels(n, h)?;
    let big_h = CubeFunction::from_fn(n, |z| levels[z.count_ones() as usize])?;
    let hs = wht_forward(&big_h);
    let mut eig: Vec<f64> = (0..=n).map(|j| hs.coeff((1usize << j) - 1)).collect();
    // A radial kernel of degree r has no spectrum above level r.
    let top = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (j, e) in eig.iter_mut().enumerate().skip(h.degree() + 1) {
        if e.abs() > 1e-9 * top {
            return Err(HcjError::Numerical(format!(
                "kernel eigenvalue {e:e} at level {j} above degree {}",
                h.degree()
            )));
        }
        *e = 0.0;
    }
    let fs = wht_forward(f);
    let coeffs = fs
        .coeffs()
        .iter()
        .enumerate()
        .map(|(s, c)| c * eig[s.count_ones() as usize])
        .collect();
    Ok(wht_inverse(&Spectrum::new(n, coeffs)?))
}

/// The same convolution summed directly, for cross-checking.
pub fn kernel_apply_direct(f: &CubeFunction, h: &UnivariatePoly) -> Result<CubeFunction> {
    let n = f.n();
    if n > DIRECT_KERNEL_MAX_N {
        return Err(HcjError::Resource(format!(
            "direct convolution limited to n <= {DIRECT_KERNEL_MAX_N}"
        )));
    }
    let levels = kernel_levels(n, h)?;
    let scale = 0.5f64.powi(n as i32);
    CubeFunction::from_fn(n, |x| {
        f.values()
            .iter()
            .enumerate()
            .map(|(y, v)| v * levels[(x ^ y).count_ones() as usize])
            .sum::<f64>()
            * scale
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub d: usize,
    pub delta: f64,
    /// `3 delta`.
    pub pr_bound: f64,
    /// `3 k_{n, d/2 + 1} / n`.
    pub k_bound: f64,
    pub combined: f64,
    /// `E X |h(X)|` of the kernel the report was built with.
    pub kernel_constant: f64,
}

/// Both multipliers `J` with `E_d(f) <= J s(f)`, using `explicit_h(n, d)`
/// for the kernel constant.
pub fn jackson_bounds(n: usize, d: usize) -> Result<BoundReport> {
    let h = explicit_h(n, d)?;
    jackson_bounds_with(n, d, &h)
}

pub fn jackson_bounds_with(n: usize, d: usize, h: &UnivariatePoly) -> Result<BoundReport> {
    check_dim(n)?;
    if d > n {
        return Err(HcjError::Parameter(format!("degree {d} exceeds n = {n}")));
    }
    let delta = 1.0 - d as f64 / n as f64;
    let pr_bound = 3.0 * delta;
    let k_bound = 3.0 * smallest_positive_root(n, d / 2 + 1)? / n as f64;
    Ok(BoundReport {
        n,
        d,
        delta,
        pr_bound,
        k_bound,
        combined: pr_bound.min(k_bound),
        kernel_constant: kernel_constant(n, h),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn and2() -> CubeFunction {
        CubeFunction::new(2, vec![0.0, 0.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn explicit_examples() {
        assert_eq!(explicit_h(5, 0).unwrap().coeffs(), &[1.0]);
        let h = explicit_h(2, 1).unwrap();
        assert_eq!(h.coeffs(), &[2.0, -1.0]);
        assert_eq!(kernel_constant(2, &h), 0.5);
        let h = explicit_h(4, 4).unwrap();
        assert!((h.eval(0.0) - 16.0).abs() < 1e-13);
        for k in 1..=4 {
            assert!(h.eval(k as f64).abs() < 1e-13);
        }
    }

    #[test]
    fn kernel_examples() {
        let f = CubeFunction::from_fn(4, |x| (x * 7 % 5) as f64).unwrap();
        let g = kernel_apply(&f, &explicit_h(4, 4).unwrap()).unwrap();
        assert!(g.sup_distance(&f) < 1e-12);
        let g = kernel_apply(&f, &UnivariatePoly::constant(1.0)).unwrap();
        assert!(g.values().iter().all(|v| (v - f.mean()).abs() < 1e-12));
        let h = explicit_h(2, 1).unwrap();
        let g = kernel_apply(&and2(), &h).unwrap();
        assert_eq!(crate::cube::degree(&wht_forward(&g), 1e-12), 1);
        assert!(g.sup_distance(&and2()) <= convolution_bound(&and2(), &h));
        assert_eq!(convolution_bound(&and2(), &h), 1.5);
    }

    #[test]
    fn unnormalized_kernel_rejected() {
        let h = UnivariatePoly::constant(2.0);
        assert!(matches!(
            kernel_apply(&and2(), &h),
            Err(HcjError::Validation(_))
        ));
    }

    #[test]
    fn bound_examples() {
        let r = jackson_bounds(4, 2).unwrap();
        assert_eq!((r.pr_bound, r.k_bound, r.combined), (1.5, 0.75, 0.75));
        let r = jackson_bounds(9, 9).unwrap();
        assert_eq!(r.pr_bound, 0.0);
        let r = jackson_bounds(9, 0).unwrap();
        assert_eq!((r.pr_bound, r.k_bound), (3.0, 1.5));
    }

    #[test]
    fn quadrature_kernel_constant_is_the_root() {
        for n in 1..=12 {
            for d in 0..=n {
                let h = quadrature_h(n, d).unwrap();
                assert!(h.degree() <= d);
                let k = smallest_positive_root(n, d / 2 + 1).unwrap();
                assert!(
                    (kernel_constant(n, &h) - k).abs() < 1e-9 * n as f64,
                    "n={n} d={d}"
                );
            }
        }
    }
}
