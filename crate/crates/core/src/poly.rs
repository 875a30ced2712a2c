use serde::Serialize;

use crate::error::{HcjError, Result};

/// Relative size below which trailing coefficients are dropped.
const TRIM: f64 = 1e-12;

/// Real polynomial in the monomial basis, `coeffs[i]` multiplying `x^i`.
///
/// Polynomials built from their roots also keep the factored form
/// `scale * prod (x - r)` and evaluate through it. Kernels such as
/// `prod (k - x)` have large, alternating monomial coefficients, and their
/// rounded expansion loses many digits at the integers where they are used.
#[derive(Debug, Clone, Serialize)]
pub struct UnivariatePoly {
    coeffs: Vec<f64>,
    #[serde(skip)]
    factored: Option<Factored>,
}

#[derive(Debug, Clone)]
struct Factored {
    scale: f64,
    roots: Vec<f64>,
}

/// Equality of the monomial coefficients.
impl PartialEq for UnivariatePoly {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl UnivariatePoly {
    pub fn new(mut coeffs: Vec<f64>) -> Result<Self> {
        if let Some(index) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(HcjError::NonFinite { index });
        }
        let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        while coeffs.len() > 1 && coeffs.last().unwrap().abs() <= TRIM * scale {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Ok(Self {
            coeffs,
            factored: None,
        })
    }

    /// Keeps every coefficient up to the last nonzero one.
    pub(crate) fn exact(mut coeffs: Vec<f64>) -> Result<Self> {
        if let Some(index) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(HcjError::NonFinite { index });
        }
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Ok(Self {
            coeffs,
            factored: None,
        })
    }

    pub fn constant(c: f64) -> Self {
        Self {
            coeffs: vec![c],
            factored: None,
        }
    }

    /// `scale * prod (x - r)`.
    pub fn from_roots(roots: &[f64], scale: f64) -> Result<Self> {
        let mut c = vec![scale];
        for &r in roots {
            let mut next = vec![0.0; c.len() + 1];
            for (i, &ci) in c.iter().enumerate() {
                next[i + 1] += ci;
                next[i] -= r * ci;
            }
            c = next;
        }
        Ok(Self::new(c)?.with_factors(roots.to_vec(), scale))
    }

    /// Attaches the factored form `scale * prod (x - r)`, which must agree
    /// with the coefficients.
    pub(crate) fn with_factors(mut self, roots: Vec<f64>, scale: f64) -> Self {
        if scale != 0.0 && roots.iter().all(|r| r.is_finite()) && scale.is_finite() {
            self.factored = Some(Factored { scale, roots });
        }
        self
    }

    /// Roots of the factored form, when the polynomial has one.
    pub fn roots(&self) -> Option<&[f64]> {
        self.factored.as_ref().map(|f| f.roots.as_slice())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs == [0.0]
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut c = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        let out = Self::new(c).expect("product of finite polynomials");
        match (&self.factored, &other.factored) {
            (Some(a), Some(b)) => {
                let roots = a.roots.iter().chain(&b.roots).copied().collect();
                out.with_factors(roots, a.scale * b.scale)
            }
            _ => out,
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let out = Self::new(self.coeffs.iter().map(|c| c * s).collect()).expect("finite scale");
        match &self.factored {
            Some(f) => out.with_factors(f.roots.clone(), f.scale * s),
            None => out,
        }
    }

    /// Evaluates through the factored form when there is one, otherwise by
    /// compensated Horner, which is as accurate as plain Horner in twice
    /// the working precision.
    pub fn eval(&self, x: f64) -> f64 {
        if let Some(f) = &self.factored {
            return f.roots.iter().fold(f.scale, |acc, r| acc * (x - r));
        }
        let mut it = self.coeffs.iter().rev();
        let mut s = *it.next().unwrap();
        let mut c = 0.0f64;
        for &a in it {
            let p = s * x;
            let pe = s.mul_add(x, -p);
            let t = p + a;
            let z = t - p;
            let te = (p - (t - z)) + (a - z);
            s = t;
            c = c.mul_add(x, pe + te);
        }
        s + c
    }
}
