//! Kravchuk polynomials for `Bin(n, 1/2)`, their roots, and the Gauss
//! quadrature rule they generate.
//!
//! The recurrence coefficients are computed by the Stieltjes procedure in
//! exact rational arithmetic on the measure `C(n, x) / 2^n`, so signs at
//! the integers, which drive root bracketing, are exact. Floating point is
//! used only inside a bracket.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::binomial::binom_big;
use crate::error::{HcjError, Result};
use crate::poly::UnivariatePoly;

/// Largest `n` accepted here; exact arithmetic costs grow like `n^3`.
pub const MAX_KRAVCHUK_N: usize = 512;

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_KRAVCHUK_N {
        return Err(HcjError::Parameter(format!(
            "binomial parameter {n} outside 1..={MAX_KRAVCHUK_N}"
        )));
    }
    Ok(())
}

fn ratio_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact moments `E X^i`, `i = 0..=upto`, of `X ~ Bin(n, 1/2)`.
///
/// Uses `E X^i = sum_j S(i, j) n^(j) / 2^j` with Stirling numbers of the
/// second kind and falling factorials, all in integers.
pub fn binomial_moments(n: usize, upto: usize) -> Vec<BigRational> {
    let mut falling = vec![BigUint::one()];
    for j in 0..upto {
        let next = &falling[j] * BigUint::from(n.saturating_sub(j));
        falling.push(next);
    }
    let mut stirling = vec![BigUint::one()];
    let mut out = Vec::with_capacity(upto + 1);
    for i in 0..=upto {
        if i > 0 {
            let mut next = vec![BigUint::zero(); i + 1];
            for j in 1..=i {
                let keep = if j < i {
                    &stirling[j] * BigUint::from(j)
                } else {
                    BigUint::zero()
                };
                next[j] = keep + &stirling[j - 1];
            }
            stirling = next;
        }
        // Common denominator 2^i.
        let mut num = BigUint::zero();
        for (j, s) in stirling.iter().enumerate() {
            num += (s * &falling[j]) << (i - j);
        }
        out.push(BigRational::new(BigInt::from(num), BigInt::one() << i));
    }
    out
}

pub fn binomial_moments_f64(n: usize, upto: usize) -> Vec<f64> {
    binomial_moments(n, upto).iter().map(ratio_f64).collect()
}

/// Three-term recurrence `p_{k+1} = (x - alpha_k) p_k - beta_k p_{k-1}` for
/// the monic orthogonal polynomials of `Bin(n, 1/2)` up to degree `ell`,
/// with exact values at the support points.
struct Stieltjes {
    alpha: Vec<BigRational>,
    beta: Vec<BigRational>,
    /// `E p_k(X)^2`.
    norms: Vec<BigRational>,
    /// `p_ell(j)` for `j = 0..=n`.
    values: Vec<BigRational>,
}

fn stieltjes(n: usize, ell: usize) -> Stieltjes {
    let weight: Vec<BigRational> = (0..=n)
        .map(|x| {
            BigRational::new(
                BigInt::from(binom_big(n as u64, x as u64)),
                BigInt::one() << n,
            )
        })
        .collect();
    let xs: Vec<BigRational> = (0..=n)
        .map(|x| BigRational::from_integer(x.into()))
        .collect();
    let mut prev = vec![BigRational::zero(); n + 1];
    let mut cur = vec![BigRational::one(); n + 1];
    let mut alpha = Vec::with_capacity(ell);
    let mut beta = Vec::with_capacity(ell);
    let mut norms = vec![BigRational::one()];
    for k in 0..ell {
        let mut xnorm = BigRational::zero();
        for j in 0..=n {
            xnorm += &weight[j] * &xs[j] * &cur[j] * &cur[j];
        }
        let a = xnorm / &norms[k];
        let b = if k == 0 {
            BigRational::zero()
        } else {
            &norms[k] / &norms[k - 1]
        };
        let next: Vec<BigRational> = (0..=n)
            .map(|j| (&xs[j] - &a) * &cur[j] - &b * &prev[j])
            .collect();
        let mut norm = BigRational::zero();
        for j in 0..=n {
            norm += &weight[j] * &next[j] * &next[j];
        }
        alpha.push(a);
        beta.push(b);
        norms.push(norm);
        prev = std::mem::replace(&mut cur, next);
    }
    Stieltjes {
        alpha,
        beta,
        norms,
        values: cur,
    }
}

/// Recurrence data in floating point for evaluation off the integers.
#[derive(Debug, Clone)]
pub struct KravchukFamily {
    n: usize,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    norms: Vec<f64>,
}

impl KravchukFamily {
    /// Degrees `0..=max_degree`.
    pub fn new(n: usize, max_degree: usize) -> Result<Self> {
        check_n(n)?;
        if max_degree > n {
            return Err(HcjError::Parameter(format!(
                "degree {max_degree} exceeds n = {n}"
            )));
        }
        let st = stieltjes(n, max_degree);
        Ok(Self {
            n,
            alpha: st.alpha.iter().map(ratio_f64).collect(),
            beta: st.beta.iter().map(ratio_f64).collect(),
            norms: st.norms.iter().map(ratio_f64).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_degree(&self) -> usize {
        self.alpha.len()
    }

    /// `E p_k(X)^2`.
    pub fn norm(&self, k: usize) -> f64 {
        self.norms[k]
    }

    /// `p_0(x), ..., p_{max_degree}(x)` by the recurrence.
    pub fn eval_all(&self, x: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.alpha.len() + 1);
        out.push(1.0);
        let (mut prev, mut cur) = (0.0, 1.0);
        for (a, b) in self.alpha.iter().zip(&self.beta) {
            let next = (x - a) * cur - b * prev;
            out.push(next);
            prev = cur;
            cur = next;
        }
        out
    }

    pub fn eval(&self, x: f64) -> f64 {
        *self.eval_all(x).last().unwrap()
    }
}

/// Monic Kravchuk polynomial of degree `ell` in the monomial basis.
pub fn kravchuk(n: usize, ell: usize) -> Result<UnivariatePoly> {
    check_n(n)?;
    if ell > n {
        return Err(HcjError::Parameter(format!("degree {ell} exceeds n = {n}")));
    }
    let st = stieltjes(n, ell);
    let mut prev: Vec<BigRational> = Vec::new();
    let mut cur = vec![BigRational::one()];
    for (a, b) in st.alpha.iter().zip(&st.beta) {
        let mut next = vec![BigRational::zero(); cur.len() + 1];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= a * c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= b * c;
        }
        prev = std::mem::replace(&mut cur, next);
    }
    // The monomial coefficients grow like (n/2)^ell, so the leading one may
    // fall under the relative trim; the factored form keeps the degree and
    // makes evaluation accurate.
    let mut coeffs: Vec<f64> = cur.iter().map(ratio_f64).collect();
    if ell > 0 {
        let roots = kravchuk_roots(n, ell)?;
        coeffs[ell] = 1.0;
        return Ok(UnivariatePoly::exact(coeffs)?.with_factors(roots, 1.0));
    }
    UnivariatePoly::new(coeffs)
}

/// All roots of the degree-`ell` Kravchuk polynomial, increasing.
///
/// Signs at the integers are exact, and every unit interval holds at most
/// one root (zeros of discrete orthogonal polynomials are separated by the
/// support points), so exact zeros are reported as they are and each strict
/// sign change brackets one root. Inside a bracket the root is refined by
/// bisection on a Sturm count of the Jacobi matrix, which stays reliable at
/// high degree where plain evaluation of the recurrence loses its sign.
pub fn kravchuk_roots(n: usize, ell: usize) -> Result<Vec<f64>> {
    check_n(n)?;
    if ell == 0 || ell > n {
        return Err(HcjError::Parameter(format!(
            "need 1 <= ell <= n, got ell = {ell}, n = {n}"
        )));
    }
    let st = stieltjes(n, ell);
    let alpha: Vec<f64> = st.alpha.iter().map(ratio_f64).collect();
    let beta: Vec<f64> = st.beta.iter().map(ratio_f64).collect();
    let signs: Vec<i8> = st
        .values
        .iter()
        .map(|v| {
            if v.is_zero() {
                0
            } else if v.is_positive() {
                1
            } else {
                -1
            }
        })
        .collect();
    let mut roots = Vec::with_capacity(ell);
    for j in 0..=n {
        if signs[j] == 0 {
            roots.push(j as f64);
        } else if j < n && signs[j + 1] == -signs[j] {
            let index = roots.len();
            roots.push(bisect(&alpha, &beta, index, j as f64, (j + 1) as f64));
        }
    }
    if roots.len() != ell || roots.iter().any(|&r| r <= 0.0 || r >= n as f64) {
        return Err(HcjError::Numerical(format!(
            "found {} roots in (0, {n}) for degree {ell}",
            roots.len()
        )));
    }
    Ok(roots)
}

/// Number of eigenvalues of the Jacobi matrix below `x`, i.e. the number
/// of negative pivots in the `LDL^T` factorization of `J - x I`.
fn count_below(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0f64;
    for (k, a) in alpha.iter().enumerate() {
        q = if k == 0 { a - x } else { (a - x) - beta[k] / q };
        if q == 0.0 {
            q = -f64::EPSILON * (a.abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Root number `index` (from zero), known to lie in `(lo, hi)` with
/// `0 <= lo < hi`. The result stays strictly inside the bracket even when
/// the root is closer to an end than one ulp.
fn bisect(alpha: &[f64], beta: &[f64], index: usize, mut lo: f64, mut hi: f64) -> f64 {
    let inside = (
        f64::from_bits(lo.to_bits() + 1),
        f64::from_bits(hi.to_bits() - 1),
    );
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid.clamp(inside.0, inside.1);
        }
        if count_below(alpha, beta, mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

/// `k_{n, ell}`, the smallest root of the degree-`ell` Kravchuk polynomial.
pub fn smallest_positive_root(n: usize, ell: usize) -> Result<f64> {
    Ok(kravchuk_roots(n, ell)?[0])
}

#[derive(Debug, Clone, Serialize)]
pub struct QuadratureRule {
    pub n: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }
}

/// Tolerances checked before a rule is returned.
const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;
const MOMENT_TOLERANCE: f64 = 1e-9;

/// `p + 1` point Gauss rule for `Bin(n, 1/2)`, exact through degree `2p+1`.
///
/// The nodes are the roots of the degree `p + 1` Kravchuk polynomial. The
/// weights solve the moment equations `sum_k w_k p_j(t_k) = E p_j(X)` for
/// `j <= p`; in the orthogonal basis their solution is
/// `w_k = 1 / sum_j p_j(t_k)^2 / E p_j^2`, a sum of positive terms that keeps
/// tiny weights accurate to full relative precision. The rule is verified
/// against exact moments before it is returned.
pub fn gauss_binomial_quadrature(n: usize, p: usize) -> Result<QuadratureRule> {
    if p + 1 > n {
        return Err(HcjError::Parameter(format!(
            "need p + 1 <= n, got p = {p}, n = {n}"
        )));
    }
    let nodes = kravchuk_roots(n, p + 1)?;
    let family = KravchukFamily::new(n, p)?;
    let weights: Vec<f64> = nodes
        .iter()
        .map(|&t| {
            let vals = family.eval_all(t);
            let s: f64 = vals
                .iter()
                .enumerate()
                .map(|(j, v)| v * v / family.norm(j))
                .sum();
            1.0 / s
        })
        .collect();
    let rule = QuadratureRule { n, nodes, weights };
    verify_rule(&rule, p, &family)?;
    Ok(rule)
}

fn verify_rule(rule: &QuadratureRule, p: usize, family: &KravchukFamily) -> Result<()> {
    let sum: f64 = rule.weights.iter().sum();
    let moments = binomial_moments_f64(rule.n, 2 * p + 1);
    let mut worst = (0usize, 0.0f64);
    for (i, m) in moments.iter().enumerate() {
        let q = rule.integrate(|t| t.powi(i as i32));
        let rel = (q - m).abs() / m.abs();
        if rel > worst.1 {
            worst = (i, rel);
        }
    }
    let single = rule.weights.len() == 1;
    let positive = rule.weights.iter().all(|&w| w > 0.0 && (w < 1.0 || single));
    if (sum - 1.0).abs() <= WEIGHT_SUM_TOLERANCE && worst.1 <= MOMENT_TOLERANCE && positive {
        return Ok(());
    }
    Err(HcjError::Numerical(format!(
        "quadrature n = {}, p = {p}: weight sum off by {:e}, worst moment error {:e} at degree {}, \
         weights in [{:e}, {:e}], moment system condition {:e}",
        rule.n,
        sum - 1.0,
        worst.1,
        worst.0,
        rule.weights.iter().cloned().fold(f64::INFINITY, f64::min),
        rule.weights.iter().cloned().fold(0.0, f64::max),
        moment_condition(rule, family)
    )))
}

/// Infinity-norm condition of the normalized system `p_j(t_k) / ||p_j||`.
fn moment_condition(rule: &QuadratureRule, family: &KravchukFamily) -> f64 {
    use faer::solvers::SolverCore;
    let m = rule.nodes.len();
    let cols: Vec<Vec<f64>> = rule.nodes.iter().map(|&t| family.eval_all(t)).collect();
    let a = faer::Mat::<f64>::from_fn(m, m, |j, k| cols[k][j] / family.norm(j).sqrt());
    let inv = a.partial_piv_lu().inverse();
    let norm_inf = |x: &faer::Mat<f64>| {
        (0..m)
            .map(|r| (0..m).map(|c| x.read(r, c).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    norm_inf(&a) * norm_inf(&inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_examples() {
        assert_eq!(kravchuk(7, 0).unwrap().coeffs(), &[1.0]);
        assert_eq!(kravchuk(7, 1).unwrap().coeffs(), &[-3.5, 1.0]);
        assert_eq!(kravchuk(4, 2).unwrap().coeffs(), &[3.0, -4.0, 1.0]);
    }

    #[test]
    fn moments_small() {
        let m = binomial_moments_f64(4, 3);
        assert_eq!(m, vec![1.0, 2.0, 5.0, 14.0]);
    }

    #[test]
    fn root_examples() {
        assert_eq!(smallest_positive_root(2, 1).unwrap(), 1.0);
        assert_eq!(kravchuk_roots(4, 2).unwrap(), vec![1.0, 3.0]);
        for n in 1..40 {
            assert_eq!(smallest_positive_root(n, 1).unwrap(), n as f64 / 2.0);
        }
    }

    #[test]
    fn quadrature_examples() {
        let r = gauss_binomial_quadrature(9, 0).unwrap();
        assert_eq!((r.nodes.clone(), r.weights.clone()), (vec![4.5], vec![1.0]));
        let r = gauss_binomial_quadrature(4, 1).unwrap();
        assert_eq!(r.nodes, vec![1.0, 3.0]);
        assert!(r.weights.iter().all(|w| (w - 0.5).abs() < 1e-15));
        assert!((r.integrate(|t| t * t) - 5.0).abs() < 1e-14);
    }
}
