//! Dense bounded-variable revised simplex.
//!
//! Solves `max c.x  s.t.  A x (=|<=) b,  l <= x <= u` where the constraint
//! matrix is only reachable through a [`Columns`] oracle. Pricing is done
//! in one batch call so structured matrices (Walsh characters) can price
//! all columns with a fast transform instead of a dense product.
//!
//! The basis inverse is kept explicitly and updated by Gauss–Jordan pivots,
//! with periodic reinversion. Each row receives a logical column: a slack
//! with bounds `[0, inf)` for `<=` rows and a fixed `[0, 0]` artificial for
//! equality rows. The starting point is therefore required to satisfy the
//! equality rows exactly; callers arrange this by choosing suitable
//! nonbasic starting values.

use crate::error::{HcjError, Result};

pub(crate) trait Columns {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn column(&self, j: usize, out: &mut [f64]);
    /// `out[j] = y . A_j` for every structural column `j`.
    fn price(&self, y: &[f64], out: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RowKind {
    Eq,
    Le,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LpStatus {
    Optimal,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SimplexOptions {
    pub feas_tol: f64,
    pub opt_tol: f64,
    pub pivot_tol: f64,
    pub max_iterations: usize,
    /// Consecutive degenerate pivots tolerated before switching to Bland's rule.
    pub degenerate_limit: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-10,
            opt_tol: 1e-11,
            pivot_tol: 1e-9,
            max_iterations: 1_000_000,
            degenerate_limit: 64,
        }
    }
}

pub(crate) struct LpSpec<'a, C: Columns> {
    pub matrix: &'a C,
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rhs: Vec<f64>,
    pub kinds: Vec<RowKind>,
    /// Starting values of the structural variables, each at a finite bound.
    pub start: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub duals: Vec<f64>,
    pub iterations: usize,
}

struct State<'a, C: Columns> {
    a: &'a C,
    m: usize,
    ns: usize,
    cost: Vec<f64>,
    lo: Vec<f64>,
    up: Vec<f64>,
    rhs: Vec<f64>,
    x: Vec<f64>,
    at_upper: Vec<bool>,
    basis: Vec<usize>,
    basic_row: Vec<usize>,
    binv: Vec<f64>,
    y: Vec<f64>,
    /// Devex reference weights, one per column.
    weights: Vec<f64>,
    pending: Option<usize>,
    pending_alpha: Vec<f64>,
    opts: SimplexOptions,
}

const NONBASIC: usize = usize::MAX;
/// Devex weights above this restart the reference framework.
const DEVEX_RESET: f64 = 1e8;

impl<'a, C: Columns> State<'a, C> {
    fn column(&self, j: usize, out: &mut [f64]) {
        if j < self.ns {
            self.a.column(j, out);
        } else {
            out.iter_mut().for_each(|v| *v = 0.0);
            out[j - self.ns] = 1.0;
        }
    }

    /// `rhs - sum over nonbasic columns of A_j x_j`.
    fn nonbasic_residual(&self) -> Vec<f64> {
        let mut r = self.rhs.clone();
        let mut col = vec![0.0; self.m];
        for j in 0..self.ns + self.m {
            if self.basic_row[j] == NONBASIC && self.x[j] != 0.0 {
                self.column(j, &mut col);
                let xj = self.x[j];
                r.iter_mut().zip(&col).for_each(|(ri, ci)| *ri -= ci * xj);
            }
        }
        r
    }

    fn recompute_duals(&mut self) {
        let m = self.m;
        self.y.iter_mut().for_each(|v| *v = 0.0);
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = self.cost[b];
            if cb != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                self.y.iter_mut().zip(row).for_each(|(yv, r)| *yv += cb * r);
            }
        }
    }

    /// Rebuilds the basis inverse from scratch and re-derives basic values.
    fn reinvert(&mut self) -> Result<()> {
        let m = self.m;
        let mut mat = vec![0.0; m * m];
        let mut col = vec![0.0; m];
        for (k, &b) in self.basis.iter().enumerate() {
            self.column(b, &mut col);
            for i in 0..m {
                mat[i * m + k] = col[i];
            }
        }
        self.binv = invert(mat, m)?;
        self.pending = None;
        let r = self.nonbasic_residual();
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            self.x[self.basis[i]] = row.iter().zip(&r).map(|(a, b)| a * b).sum();
        }
        self.recompute_duals();
        Ok(())
    }

    fn reduced_costs(&self, prices: &mut [f64], d: &mut [f64]) {
        self.a.price(&self.y, prices);
        for j in 0..self.ns {
            d[j] = self.cost[j] - prices[j];
        }
        for i in 0..self.m {
            d[self.ns + i] = -self.y[i];
        }
    }

    /// Returns the entering column and the direction of travel.
    fn choose_entering(&self, d: &[f64], bland: bool) -> Option<(usize, f64)> {
        let tol = self.opts.opt_tol;
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for (j, &dj) in d.iter().enumerate() {
            if self.basic_row[j] != NONBASIC || self.lo[j] == self.up[j] {
                continue;
            }
            let dir = if !self.at_upper[j] && dj > tol && self.x[j] < self.up[j] {
                1.0
            } else if self.at_upper[j] && dj < -tol {
                -1.0
            } else {
                continue;
            };
            if bland {
                return Some((j, dir));
            }
            let score = dj * dj / self.weights[j];
            if best.is_none() || score > best_score {
                best_score = score;
                best = Some((j, dir));
            }
        }
        best
    }

    /// Devex weight update. Must run after [`Self::pivot`]: the new row `r`
    /// of the inverse is the old one divided by the pivot element, which
    /// makes the priced row equal to `alpha_r^j / alpha_r^q`.
    fn update_devex(
        &mut self,
        r: usize,
        q: usize,
        leaving: usize,
        pivot: f64,
        scratch: &mut [f64],
        row: &mut [f64],
    ) {
        let m = self.m;
        let rho = &self.binv[r * m..(r + 1) * m];
        self.a.price(rho, scratch);
        row[..self.ns].copy_from_slice(scratch);
        row[self.ns..].copy_from_slice(rho);
        let wq = self.weights[q];
        for j in 0..self.ns + m {
            if self.basic_row[j] == NONBASIC {
                let ratio = row[j];
                if ratio != 0.0 {
                    let cand = ratio * ratio * wq;
                    if cand > self.weights[j] {
                        self.weights[j] = cand;
                    }
                }
            }
        }
        self.weights[leaving] = (wq / (pivot * pivot)).max(1.0);
        self.weights[q] = 1.0;
        if self.weights.iter().any(|&w| w > DEVEX_RESET) {
            self.weights.iter_mut().for_each(|w| *w = 1.0);
        }
    }

    /// Starts a basis change at row `r`. Only row `r` of the inverse is
    /// updated here; the remaining rows are brought up to date lazily by the
    /// next [`Self::ftran`], which touches every row anyway.
    fn pivot(&mut self, r: usize, alpha: &[f64]) {
        let m = self.m;
        let piv = alpha[r];
        self.binv[r * m..(r + 1) * m]
            .iter_mut()
            .for_each(|v| *v /= piv);
        self.pending_alpha.copy_from_slice(alpha);
        self.pending = Some(r);
    }

    /// `out = B^-1 col`, folding in any pending row eliminations.
    fn ftran(&mut self, col: &[f64], out: &mut [f64]) {
        let m = self.m;
        let Some(r) = self.pending.take() else {
            for (o, row) in out.iter_mut().zip(self.binv.chunks_exact(m)) {
                *o = dot(row, col);
            }
            return;
        };
        let (before, rest) = self.binv.split_at_mut(r * m);
        let (row_r, after) = rest.split_at_mut(m);
        out[r] = dot(row_r, col);
        let alpha = &self.pending_alpha;
        let mut sweep = |chunk: &mut [f64], offset: usize| {
            for (k, row) in chunk.chunks_exact_mut(m).enumerate() {
                let a = alpha[offset + k];
                out[offset + k] = if a != 0.0 {
                    eliminate_dot(row, row_r, a, col)
                } else {
                    dot(row, col)
                };
            }
        };
        sweep(before, 0);
        sweep(after, r + 1);
    }
}

const LANES: usize = 8;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; LANES];
    let (ac, at) = a.split_at(a.len() - a.len() % LANES);
    let (bc, bt) = b.split_at(ac.len());
    for (x, y) in ac.chunks_exact(LANES).zip(bc.chunks_exact(LANES)) {
        for l in 0..LANES {
            acc[l] += x[l] * y[l];
        }
    }
    let tail: f64 = at.iter().zip(bt).map(|(x, y)| x * y).sum();
    acc.iter().sum::<f64>() + tail
}

/// `row -= a * pivot_row`, returning the updated `row . col`.
fn eliminate_dot(row: &mut [f64], pivot_row: &[f64], a: f64, col: &[f64]) -> f64 {
    let mut acc = [0.0f64; LANES];
    let split = row.len() - row.len() % LANES;
    let (rc, rt) = row.split_at_mut(split);
    for ((x, p), c) in rc
        .chunks_exact_mut(LANES)
        .zip(pivot_row.chunks_exact(LANES))
        .zip(col.chunks_exact(LANES))
    {
        for l in 0..LANES {
            x[l] -= a * p[l];
            acc[l] += x[l] * c[l];
        }
    }
    let mut tail = 0.0;
    for ((x, p), c) in rt.iter_mut().zip(&pivot_row[split..]).zip(&col[split..]) {
        *x -= a * p;
        tail += *x * c;
    }
    acc.iter().sum::<f64>() + tail
}

/// Inverse of the row-major `m x m` matrix `mat`, by LU with partial
/// pivoting. Singular or badly conditioned bases are reported as numerical
/// failures.
pub(crate) fn invert(mat: Vec<f64>, m: usize) -> Result<Vec<f64>> {
    use faer::solvers::SolverCore;
    let a = faer::Mat::<f64>::from_fn(m, m, |i, j| mat[i * m + j]);
    let inv = a.partial_piv_lu().inverse();
    let mut out = vec![0.0; m * m];
    for j in 0..m {
        for (i, v) in inv.col_as_slice(j).iter().enumerate() {
            out[i * m + j] = *v;
        }
    }
    // Probe with the all-ones vector: B (B^-1 e) should return e.
    let z: Vec<f64> = out.chunks_exact(m).map(|row| row.iter().sum()).collect();
    let worst = mat
        .chunks_exact(m)
        .map(|row| (dot(row, &z) - 1.0).abs())
        .fold(
            0.0f64,
            |a, r| if r.is_nan() { f64::INFINITY } else { a.max(r) },
        );
    if out.iter().any(|v| !v.is_finite()) || !(worst <= 1e-6) {
        return Err(HcjError::Numerical(format!(
            "singular basis during reinversion (probe residual {worst:e})"
        )));
    }
    Ok(out)
}

pub(crate) fn solve<C: Columns>(spec: LpSpec<'_, C>, opts: SimplexOptions) -> Result<LpSolution> {
    let m = spec.matrix.rows();
    let ns = spec.matrix.cols();
    assert_eq!(spec.cost.len(), ns);
    assert_eq!(spec.lower.len(), ns);
    assert_eq!(spec.upper.len(), ns);
    assert_eq!(spec.start.len(), ns);
    assert_eq!(spec.rhs.len(), m);
    assert_eq!(spec.kinds.len(), m);

    let total = ns + m;
    let mut lo = spec.lower;
    let mut up = spec.upper;
    let mut cost = spec.cost;
    let mut x = spec.start;
    let mut at_upper: Vec<bool> = x
        .iter()
        .zip(lo.iter().zip(&up))
        .map(|(&v, (&l, &u))| {
            debug_assert!(v == l || v == u, "start value must sit at a bound");
            v == u && v != l
        })
        .collect();
    for kind in &spec.kinds {
        lo.push(0.0);
        up.push(match kind {
            RowKind::Eq => 0.0,
            RowKind::Le => f64::INFINITY,
        });
        cost.push(0.0);
        x.push(0.0);
        at_upper.push(false);
    }
    let mut st = State {
        a: spec.matrix,
        m,
        ns,
        cost,
        lo,
        up,
        rhs: spec.rhs,
        x,
        at_upper,
        basis: (ns..total).collect(),
        basic_row: (0..total)
            .map(|j| if j >= ns { j - ns } else { NONBASIC })
            .collect(),
        binv: Vec::new(),
        y: vec![0.0; m],
        weights: vec![1.0; total],
        pending: None,
        pending_alpha: vec![0.0; m],
        opts,
    };
    st.binv = vec![0.0; m * m];
    for i in 0..m {
        st.binv[i * m + i] = 1.0;
    }
    let resid = st.nonbasic_residual();
    let scale = resid.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    for (i, r) in resid.iter().enumerate() {
        let ok = match spec.kinds[i] {
            RowKind::Eq => r.abs() <= 1e-9 * scale,
            RowKind::Le => *r >= -1e-9 * scale,
        };
        if !ok {
            return Err(HcjError::Numerical(format!(
                "starting point violates row {i} (residual {r:e})"
            )));
        }
        st.x[ns + i] = if spec.kinds[i] == RowKind::Eq {
            0.0
        } else {
            r.max(0.0)
        };
    }

    let refactor_every = (2 * m).max(200);
    let mut prices = vec![0.0; ns];
    let mut d = vec![0.0; total];
    let mut alpha = vec![0.0; m];
    let mut col = vec![0.0; m];
    let mut pivot_row = vec![0.0; total];
    let mut iterations = 0usize;
    let mut since_reinvert = 0usize;
    let mut degenerate_run = 0usize;
    let mut verified = false;

    let status = loop {
        if iterations >= opts.max_iterations {
            break LpStatus::IterationLimit;
        }
        if since_reinvert >= refactor_every {
            st.reinvert()?;
            since_reinvert = 0;
        }
        st.reduced_costs(&mut prices, &mut d);
        let bland = degenerate_run > opts.degenerate_limit;
        let Some((q, dir)) = st.choose_entering(&d, bland) else {
            if verified || since_reinvert == 0 {
                break LpStatus::Optimal;
            }
            // Confirm optimality against a fresh factorization.
            st.reinvert()?;
            since_reinvert = 0;
            verified = true;
            continue;
        };
        verified = false;

        st.column(q, &mut col);
        st.ftran(&col, &mut alpha);

        // Harris two-pass ratio test.
        let ptol = opts.pivot_tol;
        let ftol = opts.feas_tol;
        let mut theta_max = f64::INFINITY;
        for i in 0..m {
            let delta = dir * alpha[i];
            if delta.abs() <= ptol {
                continue;
            }
            let b = st.basis[i];
            let room = if delta > 0.0 {
                st.x[b] - st.lo[b]
            } else {
                st.up[b] - st.x[b]
            };
            if room.is_finite() {
                theta_max = theta_max.min((room.max(0.0) + ftol) / delta.abs());
            }
        }
        let flip_room = st.up[q] - st.lo[q];
        let mut leave: Option<usize> = None;
        if theta_max.is_finite() {
            let mut best = 0.0;
            for i in 0..m {
                let delta = dir * alpha[i];
                if delta.abs() <= ptol {
                    continue;
                }
                let b = st.basis[i];
                let room = if delta > 0.0 {
                    st.x[b] - st.lo[b]
                } else {
                    st.up[b] - st.x[b]
                };
                if !room.is_finite() || room.max(0.0) / delta.abs() > theta_max {
                    continue;
                }
                let better = if bland {
                    leave.map_or(true, |r: usize| b < st.basis[r])
                } else {
                    delta.abs() > best
                };
                if better {
                    best = delta.abs();
                    leave = Some(i);
                }
            }
        }
        let theta_leave = leave.map(|r| {
            let b = st.basis[r];
            let delta = dir * alpha[r];
            let room = if delta > 0.0 {
                st.x[b] - st.lo[b]
            } else {
                st.up[b] - st.x[b]
            };
            room.max(0.0) / delta.abs()
        });

        iterations += 1;
        since_reinvert += 1;

        match theta_leave {
            Some(theta) if theta <= flip_room => {
                let r = leave.unwrap();
                let b = st.basis[r];
                let delta_r = dir * alpha[r];
                for i in 0..m {
                    let bi = st.basis[i];
                    st.x[bi] -= theta * dir * alpha[i];
                }
                // The leaving variable lands exactly on the bound it hit.
                if delta_r > 0.0 {
                    st.x[b] = st.lo[b];
                    st.at_upper[b] = false;
                } else {
                    st.x[b] = st.up[b];
                    st.at_upper[b] = true;
                }
                st.x[q] += dir * theta;
                st.at_upper[q] = false;
                st.basic_row[b] = NONBASIC;
                st.basic_row[q] = r;
                st.basis[r] = q;
                st.pivot(r, &alpha);
                st.update_devex(r, q, b, alpha[r], &mut prices, &mut pivot_row);
                let dq = d[q];
                let row_r = &st.binv[r * m..(r + 1) * m];
                st.y.iter_mut().zip(row_r).for_each(|(yv, p)| *yv += dq * p);

                let fixed_leaver = st.lo[b] == st.up[b];
                if theta * dq.abs() <= 1e-14 && !fixed_leaver {
                    degenerate_run += 1;
                } else {
                    degenerate_run = 0;
                }
            }
            _ if flip_room.is_finite() => {
                let theta = flip_room;
                for i in 0..m {
                    let bi = st.basis[i];
                    st.x[bi] -= theta * dir * alpha[i];
                }
                if dir > 0.0 {
                    st.x[q] = st.up[q];
                    st.at_upper[q] = true;
                } else {
                    st.x[q] = st.lo[q];
                    st.at_upper[q] = false;
                }
                degenerate_run = 0;
            }
            _ => break LpStatus::Unbounded,
        }
    };

    st.x.truncate(ns);
    Ok(LpSolution {
        status,
        x: st.x,
        duals: st.y,
        iterations,
    })
}
