//! Primal-dual interior point method with Mehrotra's predictor-corrector.
//!
//! Solves `max c.x  s.t.  A x = b,  0 <= x <= u` (entries of `u` may be
//! infinite). The constraint matrix is reachable only through products and
//! a normal-matrix oracle `A diag(theta) A^T`, which for character matrices
//! costs one fast transform plus an `m x m` gather. The dense normal system
//! is factored with a Cholesky decomposition every iteration.

use faer::solvers::SpSolver;
use faer::{Col, Mat, Side};

use crate::error::{HcjError, Result};

pub(crate) trait NormalOperator {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    /// `out = A x`.
    fn mul(&self, x: &[f64], out: &mut [f64]);
    /// `out = A^T y`.
    fn tmul(&self, y: &[f64], out: &mut [f64]);
    /// `out = A diag(theta) A^T`, lower triangle at least.
    fn normal(&self, theta: &[f64], out: &mut Mat<f64>);
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct IpmOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for IpmOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-13,
            max_iterations: 200,
        }
    }
}

pub(crate) struct IpmSpec<'a, A: NormalOperator> {
    pub op: &'a A,
    pub cost: Vec<f64>,
    pub rhs: Vec<f64>,
    pub upper: Vec<f64>,
    /// Strictly interior starting point.
    pub start: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct IpmSolution {
    pub x: Vec<f64>,
    /// Duals of the maximization problem.
    pub y: Vec<f64>,
    pub iterations: usize,
    #[cfg_attr(not(test), allow(dead_code))]
    pub converged: bool,
}

/// Called with the primal iterate and the maximization duals before each
/// step; returning `true` stops the run.
pub(crate) type Monitor<'m> = &'m mut dyn FnMut(&[f64], &[f64]) -> bool;

struct Direction {
    dx: Vec<f64>,
    dw: Vec<f64>,
    dy: Vec<f64>,
    ds: Vec<f64>,
    dv: Vec<f64>,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Largest `alpha <= 1` keeping `z + alpha dz >= 0` over the given indices.
fn max_step(z: &[f64], dz: &[f64], mask: Option<&[bool]>) -> f64 {
    let mut alpha = 1.0f64;
    for j in 0..z.len() {
        if mask.map_or(true, |m| m[j]) && dz[j] < 0.0 {
            alpha = alpha.min(-z[j] / dz[j]);
        }
    }
    alpha
}

struct Factor {
    chol: faer::solvers::Cholesky<f64>,
}

fn factor(mut mat: Mat<f64>) -> Result<Factor> {
    let m = mat.nrows();
    let max_diag = (0..m).fold(0.0f64, |a, i| a.max(mat.read(i, i)));
    let mut reg = 0.0;
    for _ in 0..8 {
        if let Ok(chol) = mat.cholesky(Side::Lower) {
            return Ok(Factor { chol });
        }
        let next = if reg == 0.0 {
            1e-14 * max_diag.max(1e-300)
        } else {
            reg * 100.0
        };
        for i in 0..m {
            mat.write(i, i, mat.read(i, i) + next - reg);
        }
        reg = next;
    }
    Err(HcjError::Numerical(
        "interior point normal matrix is not positive definite".into(),
    ))
}

pub(crate) fn solve<A: NormalOperator>(
    spec: IpmSpec<'_, A>,
    opts: IpmOptions,
    mut monitor: Option<Monitor<'_>>,
) -> Result<IpmSolution> {
    let op = spec.op;
    let m = op.rows();
    let nv = op.cols();
    // Internally minimize -c.x.
    let c: Vec<f64> = spec.cost.iter().map(|v| -v).collect();
    let b = spec.rhs;
    let u = spec.upper;
    let bounded: Vec<bool> = u.iter().map(|v| v.is_finite()).collect();
    let n_bounded = bounded.iter().filter(|&&f| f).count();

    let mut x = spec.start;
    let mut w: Vec<f64> = (0..nv)
        .map(|j| if bounded[j] { u[j] - x[j] } else { 0.0 })
        .collect();
    let mut y = vec![0.0; m];
    let mut s: Vec<f64> = c.iter().map(|v| v.abs().max(1.0)).collect();
    let mut v: Vec<f64> = (0..nv)
        .map(|j| if bounded[j] { s[j] } else { 0.0 })
        .collect();

    let b_norm = 1.0 + inf_norm(&b);
    let c_norm = 1.0 + inf_norm(&c);
    let u_norm = 1.0
        + u.iter()
            .filter(|v| v.is_finite())
            .fold(0.0f64, |a, v| a.max(v.abs()));
    let count = (nv + n_bounded) as f64;

    let mut ax = vec![0.0; m];
    let mut aty = vec![0.0; nv];
    let mut scratch_m = vec![0.0; m];
    let mut scratch_n = vec![0.0; nv];
    let mut normal = Mat::<f64>::zeros(m, m);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iterations {
        op.mul(&x, &mut ax);
        op.tmul(&y, &mut aty);
        let rp: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let ru: Vec<f64> = (0..nv)
            .map(|j| if bounded[j] { u[j] - x[j] - w[j] } else { 0.0 })
            .collect();
        let rd: Vec<f64> = (0..nv).map(|j| c[j] - aty[j] - s[j] + v[j]).collect();

        let comp: f64 = x.iter().zip(&s).map(|(a, b)| a * b).sum::<f64>()
            + w.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
        let mu = comp / count;
        let pobj: f64 = c.iter().zip(&x).map(|(a, b)| a * b).sum();
        let dobj: f64 = b.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>()
            - (0..nv)
                .filter(|&j| bounded[j])
                .map(|j| u[j] * v[j])
                .sum::<f64>();
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs());
        let pinf = (inf_norm(&rp) / b_norm).max(inf_norm(&ru) / u_norm);
        let dinf = inf_norm(&rd) / c_norm;

        if let Some(mon) = monitor.as_mut() {
            let y_max: Vec<f64> = y.iter().map(|v| -v).collect();
            if mon(&x, &y_max) {
                break;
            }
        }
        if pinf < opts.tolerance && dinf < opts.tolerance && gap < opts.tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        let theta: Vec<f64> = (0..nv)
            .map(|j| {
                let mut d = s[j] / x[j];
                if bounded[j] {
                    d += v[j] / w[j];
                }
                1.0 / d
            })
            .collect();
        op.normal(&theta, &mut normal);
        let fac = factor(normal.clone())?;

        let mut direction = |rxs: &[f64], rwv: &[f64]| -> Direction {
            let rho: Vec<f64> = (0..nv)
                .map(|j| {
                    let mut r = rd[j] - rxs[j] / x[j];
                    if bounded[j] {
                        r += (rwv[j] - v[j] * ru[j]) / w[j];
                    }
                    r
                })
                .collect();
            for j in 0..nv {
                scratch_n[j] = theta[j] * rho[j];
            }
            op.mul(&scratch_n, &mut scratch_m);
            let rhs = Col::<f64>::from_fn(m, |i| rp[i] + scratch_m[i]);
            let mut sol = rhs.clone();
            fac.chol.solve_in_place(sol.as_mut());
            // One step of iterative refinement against the unregularized matrix.
            let mut resid = &rhs - &normal * &sol;
            fac.chol.solve_in_place(resid.as_mut());
            sol += &resid;
            let dy: Vec<f64> = (0..m).map(|i| sol.read(i)).collect();
            op.tmul(&dy, &mut scratch_n);
            let dx: Vec<f64> = (0..nv)
                .map(|j| theta[j] * (scratch_n[j] - rho[j]))
                .collect();
            let ds: Vec<f64> = (0..nv).map(|j| (rxs[j] - s[j] * dx[j]) / x[j]).collect();
            let dw: Vec<f64> = (0..nv)
                .map(|j| if bounded[j] { ru[j] - dx[j] } else { 0.0 })
                .collect();
            let dv: Vec<f64> = (0..nv)
                .map(|j| {
                    if bounded[j] {
                        (rwv[j] - v[j] * dw[j]) / w[j]
                    } else {
                        0.0
                    }
                })
                .collect();
            Direction { dx, dw, dy, ds, dv }
        };

        // Predictor.
        let rxs: Vec<f64> = x.iter().zip(&s).map(|(a, b)| -a * b).collect();
        let rwv: Vec<f64> = w.iter().zip(&v).map(|(a, b)| -a * b).collect();
        let aff = direction(&rxs, &rwv);
        let ap = max_step(&x, &aff.dx, None).min(max_step(&w, &aff.dw, Some(&bounded)));
        let ad = max_step(&s, &aff.ds, None).min(max_step(&v, &aff.dv, Some(&bounded)));
        let mut comp_aff = 0.0;
        for j in 0..nv {
            comp_aff += (x[j] + ap * aff.dx[j]) * (s[j] + ad * aff.ds[j]);
            if bounded[j] {
                comp_aff += (w[j] + ap * aff.dw[j]) * (v[j] + ad * aff.dv[j]);
            }
        }
        let mu_aff = comp_aff / count;
        let sigma = (mu_aff / mu).powi(3).min(1.0);

        // Corrector.
        let target = sigma * mu;
        let rxs: Vec<f64> = (0..nv)
            .map(|j| target - x[j] * s[j] - aff.dx[j] * aff.ds[j])
            .collect();
        let rwv: Vec<f64> = (0..nv)
            .map(|j| {
                if bounded[j] {
                    target - w[j] * v[j] - aff.dw[j] * aff.dv[j]
                } else {
                    0.0
                }
            })
            .collect();
        let dir = direction(&rxs, &rwv);
        let eta = 0.9995f64.max(1.0 - mu).min(0.99999);
        let eta = if iterations < 3 { 0.995 } else { eta };
        let ap =
            (eta * max_step(&x, &dir.dx, None).min(max_step(&w, &dir.dw, Some(&bounded)))).min(1.0);
        let ad =
            (eta * max_step(&s, &dir.ds, None).min(max_step(&v, &dir.dv, Some(&bounded)))).min(1.0);
        for j in 0..nv {
            x[j] += ap * dir.dx[j];
            s[j] += ad * dir.ds[j];
            if bounded[j] {
                w[j] += ap * dir.dw[j];
                v[j] += ad * dir.dv[j];
            }
        }
        for i in 0..m {
            y[i] += ad * dir.dy[i];
        }
    }

    Ok(IpmSolution {
        x,
        y: y.iter().map(|v| -v).collect(),
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Dense {
        rows: usize,
        cols: usize,
        a: Vec<f64>,
    }

    impl NormalOperator for Dense {
        fn rows(&self) -> usize {
            self.rows
        }
        fn cols(&self) -> usize {
            self.cols
        }
        fn mul(&self, x: &[f64], out: &mut [f64]) {
            for i in 0..self.rows {
                out[i] = (0..self.cols)
                    .map(|j| self.a[i * self.cols + j] * x[j])
                    .sum();
            }
        }
        fn tmul(&self, y: &[f64], out: &mut [f64]) {
            for j in 0..self.cols {
                out[j] = (0..self.rows)
                    .map(|i| self.a[i * self.cols + j] * y[i])
                    .sum();
            }
        }
        fn normal(&self, theta: &[f64], out: &mut Mat<f64>) {
            for i in 0..self.rows {
                for k in 0..self.rows {
                    let v = (0..self.cols)
                        .map(|j| self.a[i * self.cols + j] * theta[j] * self.a[k * self.cols + j])
                        .sum();
                    out.write(i, k, v);
                }
            }
        }
    }

    #[test]
    fn textbook_lp_with_slacks() {
        // max 3a + 5b  s.t. a + s1 = 4, 2b + s2 = 12, 3a + 2b + s3 = 18.
        let a = vec![
            1.0, 0.0, 1.0, 0.0, 0.0, //
            0.0, 2.0, 0.0, 1.0, 0.0, //
            3.0, 2.0, 0.0, 0.0, 1.0,
        ];
        let op = Dense {
            rows: 3,
            cols: 5,
            a,
        };
        let sol = solve(
            IpmSpec {
                op: &op,
                cost: vec![3.0, 5.0, 0.0, 0.0, 0.0],
                rhs: vec![4.0, 12.0, 18.0],
                upper: vec![f64::INFINITY; 5],
                start: vec![1.0; 5],
            },
            IpmOptions::default(),
            None,
        )
        .unwrap();
        assert!(sol.converged);
        assert!((sol.x[0] - 2.0).abs() < 1e-8 && (sol.x[1] - 6.0).abs() < 1e-8);
        let expected = [0.0, 1.5, 1.0];
        for (got, want) in sol.y.iter().zip(expected) {
            assert!((got - want).abs() < 1e-8, "{:?}", sol.y);
        }
    }

    #[test]
    fn box_constraints() {
        // max x0 + 2 x1  s.t. x0 + x1 + s = 1.5, 0 <= x <= 1.
        let op = Dense {
            rows: 1,
            cols: 3,
            a: vec![1.0, 1.0, 1.0],
        };
        let sol = solve(
            IpmSpec {
                op: &op,
                cost: vec![1.0, 2.0, 0.0],
                rhs: vec![1.5],
                upper: vec![1.0, 1.0, f64::INFINITY],
                start: vec![0.5, 0.5, 0.5],
            },
            IpmOptions::default(),
            None,
        )
        .unwrap();
        assert!(sol.converged);
        assert!((sol.x[0] - 0.5).abs() < 1e-8);
        assert!((sol.x[1] - 1.0).abs() < 1e-8);
    }
}
