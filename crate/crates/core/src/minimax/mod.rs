//! Exact discrete minimax approximation on the hypercube.
//!
//! `E(f, V) = min_{g in V} ||f - g||_inf` is a linear program. We never
//! solve the primal `min t, -t <= f - Bc <= t` directly; instead one of two
//! equivalent dual forms is used, whichever has fewer rows:
//!
//! * **measure form** (`dim V + 1` rows): maximize `<f, mu>` over signed
//!   measures `mu` orthogonal to `V` with `||mu||_1 <= 1`. The dual
//!   multipliers are the coefficients of the best approximation and the
//!   multiplier of the mass row is the optimal error.
//! * **tail form** (`codim V` rows, degree bases only): maximize `lambda`
//!   such that `lambda * tail(f)` is the tail of some `rho` with
//!   `||rho||_inf <= 1`. Then `E = 1 / lambda` and `f - rho / lambda` is an
//!   optimal approximation.
//!
//! Small programs go to a bounded-variable simplex. Larger degree-basis
//! programs go to a Mehrotra interior point method whose normal matrices
//! are Gram matrices of characters, assembled from one transform per
//! iteration; the simplex remains as a fallback.
//!
//! Every route returns an upper bound (the sup-norm residual of an explicit
//! approximant) and a lower bound (`<f, mu> / ||mu||_1` for an explicit,
//! exactly orthogonal measure). The reported error is the upper bound; the
//! solve is rejected when the two disagree by more than [`GAP_TOLERANCE`].

mod ipm;
pub(crate) mod simplex;

use serde::Serialize;

use crate::binomial::binom_le;
use crate::cube::{butterfly, walsh, wht_forward, wht_inverse, CubeFunction, Spectrum};
use crate::error::{HcjError, Result};
use faer::solvers::SpSolverLstsq;
use faer::Mat;
use ipm::{IpmOptions, IpmSpec, NormalOperator};
use simplex::{Columns, LpSpec, LpStatus, RowKind, SimplexOptions};

/// Largest accepted duality gap, relative to `max |f|`.
pub const GAP_TOLERANCE: f64 = 1e-9;

/// Census decision margin: a `+-1` function is counted as hard when the
/// optimal error is at least `1 - CENSUS_MARGIN`.
pub const CENSUS_MARGIN: f64 = 1e-6;

/// The approximating subspace.
#[derive(Debug, Clone)]
pub enum BasisSpec {
    /// All characters `W_S` with `|S| <= d`, ordered by increasing mask.
    Degree { n: usize, d: usize },
    /// An explicit list of vectors (not necessarily independent).
    Vectors {
        n: usize,
        elements: Vec<CubeFunction>,
    },
}

impl BasisSpec {
    pub fn degree(n: usize, d: usize) -> Result<Self> {
        crate::cube::check_dim(n)?;
        if d > n {
            return Err(HcjError::Parameter(format!("degree {d} exceeds n = {n}")));
        }
        Ok(BasisSpec::Degree { n, d })
    }

    pub fn vectors(elements: Vec<CubeFunction>) -> Result<Self> {
        let Some(first) = elements.first() else {
            return Err(HcjError::Parameter(
                "basis must have at least one element".into(),
            ));
        };
        let n = first.n();
        if let Some(bad) = elements.iter().position(|e| e.n() != n) {
            return Err(HcjError::Parameter(format!(
                "basis element {bad} has dimension {} but element 0 has {n}",
                elements[bad].n()
            )));
        }
        Ok(BasisSpec::Vectors { n, elements })
    }

    pub fn n(&self) -> usize {
        match self {
            BasisSpec::Degree { n, .. } | BasisSpec::Vectors { n, .. } => *n,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            BasisSpec::Degree { n, d } => degree_dim(*n, *d),
            BasisSpec::Vectors { elements, .. } => elements.len(),
        }
    }

    /// Masks of the characters in a degree basis, in coefficient order.
    pub fn masks(&self) -> Option<Vec<usize>> {
        match self {
            BasisSpec::Degree { n, d } => Some(low_masks(*n, *d)),
            BasisSpec::Vectors { .. } => None,
        }
    }
}

/// `C(n, <= d)` as a machine integer.
pub fn degree_dim(n: usize, d: usize) -> usize {
    let v = binom_le(n as u64, d as u64);
    usize::try_from(v).unwrap_or(usize::MAX)
}

fn low_masks(n: usize, d: usize) -> Vec<usize> {
    (0..1usize << n)
        .filter(|s| s.count_ones() as usize <= d)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    IterationLimit,
}

#[derive(Debug, Clone, Serialize)]
pub struct MinimaxResult {
    /// `max_x |f(x) - g(x)|` for the returned approximant.
    pub error: f64,
    /// Certified lower bound from the dual measure.
    pub lower_bound: f64,
    /// Coefficients of the approximant, one per basis element.
    pub coefficients: Vec<f64>,
    pub status: SolveStatus,
    pub iterations: usize,
}

/// Which linear programming engine solves degree-basis problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LpMethod {
    /// Simplex for small programs, interior point above
    /// [`IPM_ROW_THRESHOLD`] rows with a simplex fallback.
    #[default]
    Auto,
    Simplex,
    InteriorPoint,
}

/// Certificate gap, relative to `max(1, max |f|)`, at which interior point
/// runs stop.
const IPM_TARGET_GAP: f64 = 1e-11;

/// Row count above which [`LpMethod::Auto`] prefers the interior point method.
pub const IPM_ROW_THRESHOLD: usize = 64;

#[derive(Debug, Clone, Copy)]
pub struct LpOptions {
    /// Cap on `dim + 1`, the number of primal variables.
    pub max_variables: usize,
    /// Cap on the dense `rows x rows` matrices, in entries.
    pub max_basis_cells: usize,
    pub max_iterations: usize,
    pub max_ipm_iterations: usize,
    pub method: LpMethod,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            max_variables: 20_000,
            max_basis_cells: 64 << 20,
            max_iterations: 2_000_000,
            max_ipm_iterations: 200,
            method: LpMethod::Auto,
        }
    }
}

/// Measure form over the characters of a degree basis.
struct CharacterMeasure<'a> {
    n: usize,
    masks: &'a [usize],
}

impl Columns for CharacterMeasure<'_> {
    fn rows(&self) -> usize {
        self.masks.len() + 1
    }
    fn cols(&self) -> usize {
        2 << self.n
    }
    fn column(&self, j: usize, out: &mut [f64]) {
        let npts = 1usize << self.n;
        let (x, sign) = if j < npts { (j, 1.0) } else { (j - npts, -1.0) };
        for (o, &s) in out.iter_mut().zip(self.masks) {
            *o = sign * walsh(s, x);
        }
        out[self.masks.len()] = 1.0;
    }
    fn price(&self, y: &[f64], out: &mut [f64]) {
        let npts = 1usize << self.n;
        let mut p = vec![0.0; npts];
        for (&s, &v) in self.masks.iter().zip(y) {
            p[s] = v;
        }
        butterfly(&mut p);
        let mass = y[self.masks.len()];
        let (u, v) = out.split_at_mut(npts);
        for ((pu, pv), px) in u.iter_mut().zip(v.iter_mut()).zip(&p) {
            *pu = px + mass;
            *pv = mass - px;
        }
    }
}

/// Measure form over explicit basis vectors sampled at `npts` points.
struct DenseMeasure<'a> {
    npts: usize,
    elements: &'a [&'a [f64]],
}

impl Columns for DenseMeasure<'_> {
    fn rows(&self) -> usize {
        self.elements.len() + 1
    }
    fn cols(&self) -> usize {
        2 * self.npts
    }
    fn column(&self, j: usize, out: &mut [f64]) {
        let (x, sign) = if j < self.npts {
            (j, 1.0)
        } else {
            (j - self.npts, -1.0)
        };
        for (o, e) in out.iter_mut().zip(self.elements) {
            *o = sign * e[x];
        }
        out[self.elements.len()] = 1.0;
    }
    fn price(&self, y: &[f64], out: &mut [f64]) {
        let mut p = vec![0.0; self.npts];
        for (e, &c) in self.elements.iter().zip(y) {
            if c != 0.0 {
                p.iter_mut()
                    .zip(e.iter())
                    .for_each(|(pv, ev)| *pv += c * ev);
            }
        }
        let mass = y[self.elements.len()];
        let (u, v) = out.split_at_mut(self.npts);
        for ((pu, pv), px) in u.iter_mut().zip(v.iter_mut()).zip(&p) {
            *pu = px + mass;
            *pv = mass - px;
        }
    }
}

/// Tail form: columns `rho_x` (tail characters at `x`) followed by the
/// `lambda` column `-b`.
struct TailForm<'a> {
    n: usize,
    masks: &'a [usize],
    b: &'a [f64],
}

impl Columns for TailForm<'_> {
    fn rows(&self) -> usize {
        self.masks.len()
    }
    fn cols(&self) -> usize {
        (1 << self.n) + 1
    }
    fn column(&self, j: usize, out: &mut [f64]) {
        if j == 1 << self.n {
            out.iter_mut().zip(self.b).for_each(|(o, b)| *o = -b);
        } else {
            for (o, &s) in out.iter_mut().zip(self.masks) {
                *o = walsh(s, j);
            }
        }
    }
    fn price(&self, y: &[f64], out: &mut [f64]) {
        let npts = 1usize << self.n;
        let mut p = vec![0.0; npts];
        for (&s, &v) in self.masks.iter().zip(y) {
            p[s] = v;
        }
        butterfly(&mut p);
        out[..npts].copy_from_slice(&p);
        out[npts] = -y.iter().zip(self.b).map(|(a, b)| a * b).sum::<f64>();
    }
}

fn simplex_options(limits: &LpOptions) -> SimplexOptions {
    SimplexOptions {
        max_iterations: limits.max_iterations,
        ..SimplexOptions::default()
    }
}

fn status_of(s: LpStatus) -> Result<SolveStatus> {
    match s {
        LpStatus::Optimal => Ok(SolveStatus::Optimal),
        LpStatus::IterationLimit => Ok(SolveStatus::IterationLimit),
        LpStatus::Unbounded => Err(HcjError::Numerical(
            "minimax dual reported unbounded".into(),
        )),
    }
}

fn measure_lower_bound(values: &[f64], mu: &[f64]) -> f64 {
    let mass: f64 = mu.iter().map(|m| m.abs()).sum();
    // Optimal measures have unit mass unless the optimum is zero, so a
    // near-empty measure is round-off and only certifies the trivial bound.
    if mass <= 1e-9 {
        return 0.0;
    }
    values.iter().zip(mu).map(|(a, b)| a * b).sum::<f64>() / mass
}

/// Runs the measure form for any basis described by `matrix`.
fn solve_measure<C: Columns>(
    values: &[f64],
    scale: f64,
    matrix: &C,
    limits: &LpOptions,
) -> Result<(Vec<f64>, Vec<f64>, SolveStatus, usize)> {
    let npts = values.len();
    let dim = matrix.rows() - 1;
    let mut cost = Vec::with_capacity(2 * npts);
    cost.extend(values.iter().map(|v| v / scale));
    cost.extend(values.iter().map(|v| -v / scale));
    let mut rhs = vec![0.0; dim + 1];
    rhs[dim] = 1.0;
    let mut kinds = vec![RowKind::Eq; dim + 1];
    kinds[dim] = RowKind::Le;
    let sol = simplex::solve(
        LpSpec {
            matrix,
            cost,
            lower: vec![0.0; 2 * npts],
            upper: vec![f64::INFINITY; 2 * npts],
            rhs,
            kinds,
            start: vec![0.0; 2 * npts],
        },
        simplex_options(limits),
    )?;
    let status = status_of(sol.status)?;
    let mu: Vec<f64> = (0..npts).map(|x| sol.x[x] - sol.x[npts + x]).collect();
    let coeffs = sol.duals[..dim].iter().map(|c| c * scale).collect();
    Ok((coeffs, mu, status, sol.iterations))
}

fn check_limits(dim: usize, rows: usize, limits: &LpOptions) -> Result<()> {
    if dim.saturating_add(1) > limits.max_variables {
        return Err(HcjError::Resource(format!(
            "minimax LP with {} variables exceeds the limit of {}",
            dim.saturating_add(1),
            limits.max_variables
        )));
    }
    if rows.saturating_mul(rows) > limits.max_basis_cells {
        return Err(HcjError::Resource(format!(
            "minimax LP basis of order {rows} exceeds the cell limit {}",
            limits.max_basis_cells
        )));
    }
    Ok(())
}

pub fn minimax_fit(f: &CubeFunction, basis: &BasisSpec) -> Result<MinimaxResult> {
    minimax_fit_with(f, basis, &LpOptions::default())
}

pub fn minimax_fit_with(
    f: &CubeFunction,
    basis: &BasisSpec,
    limits: &LpOptions,
) -> Result<MinimaxResult> {
    if basis.n() != f.n() {
        return Err(HcjError::Parameter(format!(
            "basis dimension n = {} does not match function n = {}",
            basis.n(),
            f.n()
        )));
    }
    match basis {
        BasisSpec::Degree { d, .. } => fit_degree(f, *d, limits),
        BasisSpec::Vectors { elements, .. } => fit_vectors(f, elements, limits),
    }
}

fn fit_vectors(
    f: &CubeFunction,
    elements: &[CubeFunction],
    limits: &LpOptions,
) -> Result<MinimaxResult> {
    let columns: Vec<&[f64]> = elements.iter().map(|e| e.values()).collect();
    minimax_points_with(f.values(), &columns, limits)
}

/// Minimax fit of `target` by the span of `elements` over a finite point
/// set; every element holds one value per point.
pub fn minimax_points(target: &[f64], elements: &[&[f64]]) -> Result<MinimaxResult> {
    minimax_points_with(target, elements, &LpOptions::default())
}

pub fn minimax_points_with(
    target: &[f64],
    elements: &[&[f64]],
    limits: &LpOptions,
) -> Result<MinimaxResult> {
    if let Some(bad) = elements.iter().find(|e| e.len() != target.len()) {
        return Err(HcjError::Parameter(format!(
            "basis element has {} values for {} points",
            bad.len(),
            target.len()
        )));
    }
    if let Some(index) = target.iter().position(|v| !v.is_finite()) {
        return Err(HcjError::NonFinite { index });
    }
    let dim = elements.len();
    check_limits(dim, dim + 1, limits)?;
    let scale = max_abs(target);
    if scale == 0.0 {
        return Ok(MinimaxResult {
            error: 0.0,
            lower_bound: 0.0,
            coefficients: vec![0.0; dim],
            status: SolveStatus::Optimal,
            iterations: 0,
        });
    }
    let matrix = DenseMeasure {
        npts: target.len(),
        elements,
    };
    let (coefficients, mu, status, iterations) = solve_measure(target, scale, &matrix, limits)?;
    let mut g = vec![0.0; target.len()];
    for (e, &c) in elements.iter().zip(&coefficients) {
        g.iter_mut()
            .zip(e.iter())
            .for_each(|(gv, ev)| *gv += c * ev);
    }
    let error = target
        .iter()
        .zip(&g)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let lower = measure_lower_bound(target, &mu);
    finish(scale, error, lower, coefficients, status, iterations)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn finish(
    scale: f64,
    error: f64,
    lower_bound: f64,
    coefficients: Vec<f64>,
    status: SolveStatus,
    iterations: usize,
) -> Result<MinimaxResult> {
    let gap = error - lower_bound;
    if status == SolveStatus::Optimal && gap > GAP_TOLERANCE * scale.max(1.0) {
        return Err(HcjError::Numerical(format!(
            "minimax duality gap {gap:e} (upper {error}, lower {lower_bound})"
        )));
    }
    Ok(MinimaxResult {
        error,
        lower_bound: lower_bound.min(error),
        coefficients,
        status,
        iterations,
    })
}

/// Normal-matrix oracle for the measure form over characters.
struct CharacterMeasureNormal<'a> {
    n: usize,
    masks: &'a [usize],
}

impl NormalOperator for CharacterMeasureNormal<'_> {
    fn rows(&self) -> usize {
        self.masks.len() + 1
    }
    fn cols(&self) -> usize {
        2 << self.n
    }
    fn mul(&self, x: &[f64], out: &mut [f64]) {
        let npts = 1usize << self.n;
        let (u, v) = x.split_at(npts);
        let mut p: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
        butterfly(&mut p);
        for (o, &s) in out.iter_mut().zip(self.masks) {
            *o = p[s];
        }
        out[self.masks.len()] = x.iter().sum();
    }
    fn tmul(&self, y: &[f64], out: &mut [f64]) {
        CharacterMeasure {
            n: self.n,
            masks: self.masks,
        }
        .price(y, out);
    }
    fn normal(&self, theta: &[f64], out: &mut Mat<f64>) {
        let npts = 1usize << self.n;
        let (tu, tv) = theta.split_at(npts);
        let mut plus: Vec<f64> = tu.iter().zip(tv).map(|(a, b)| a + b).collect();
        let mut minus: Vec<f64> = tu.iter().zip(tv).map(|(a, b)| a - b).collect();
        butterfly(&mut plus);
        butterfly(&mut minus);
        gram_gather(out, self.masks, &plus);
        let dim = self.masks.len();
        for (i, &s) in self.masks.iter().enumerate() {
            out.write(dim, i, minus[s]);
            out.write(i, dim, minus[s]);
        }
        out.write(dim, dim, plus[0]);
    }
}

/// Normal-matrix oracle for the tail form; columns are `rho_x` then `lambda`.
struct TailNormal<'a> {
    n: usize,
    masks: &'a [usize],
    b: &'a [f64],
}

impl NormalOperator for TailNormal<'_> {
    fn rows(&self) -> usize {
        self.masks.len()
    }
    fn cols(&self) -> usize {
        (1 << self.n) + 1
    }
    fn mul(&self, x: &[f64], out: &mut [f64]) {
        let npts = 1usize << self.n;
        let mut p = x[..npts].to_vec();
        butterfly(&mut p);
        let lambda = x[npts];
        for ((o, &s), b) in out.iter_mut().zip(self.masks).zip(self.b) {
            *o = p[s] - lambda * b;
        }
    }
    fn tmul(&self, y: &[f64], out: &mut [f64]) {
        TailForm {
            n: self.n,
            masks: self.masks,
            b: self.b,
        }
        .price(y, out);
    }
    fn normal(&self, theta: &[f64], out: &mut Mat<f64>) {
        let npts = 1usize << self.n;
        let mut p = theta[..npts].to_vec();
        butterfly(&mut p);
        gram_gather(out, self.masks, &p);
        let tl = theta[npts];
        let m = self.masks.len();
        for j in 0..m {
            let bj = tl * self.b[j];
            let col = out
                .as_mut()
                .col_mut(j)
                .try_as_slice_mut()
                .expect("contiguous column");
            for (o, bi) in col.iter_mut().zip(self.b) {
                *o += bi * bj;
            }
        }
    }
}

/// `out[i][j] = p[masks[i] ^ masks[j]]`: the Gram matrix of characters
/// under a weight whose unnormalized transform is `p`.
fn gram_gather(out: &mut Mat<f64>, masks: &[usize], p: &[f64]) {
    for (j, &t) in masks.iter().enumerate() {
        let col = out
            .as_mut()
            .col_mut(j)
            .try_as_slice_mut()
            .expect("contiguous column");
        for (o, &s) in col.iter_mut().zip(masks) {
            *o = p[s ^ t];
        }
    }
}

/// Zeroes the degree `<= d` part of `mu`, making it exactly orthogonal to
/// the approximating space.
fn strip_low(mut mu: Vec<f64>, d: usize) -> Vec<f64> {
    let npts = mu.len();
    butterfly(&mut mu);
    for (s, v) in mu.iter_mut().enumerate() {
        if s.count_ones() as usize <= d {
            *v = 0.0;
        }
    }
    butterfly(&mut mu);
    mu.iter_mut().for_each(|v| *v /= npts as f64);
    mu
}

fn sup_residual(f: &CubeFunction, g: &[f64]) -> f64 {
    f.values()
        .iter()
        .zip(g)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
}

/// A degree-`d` minimax problem with its precomputed spectral data.
struct DegreeProblem<'a> {
    f: &'a CubeFunction,
    n: usize,
    d: usize,
    masks: Vec<usize>,
    tail: Vec<usize>,
    spectrum: Spectrum,
    /// `max |f|`, used to normalize the measure form.
    scale: f64,
    /// `max |fhat(S)|` over the tail, used to normalize the tail form.
    tail_scale: f64,
    /// Normalized tail coefficients.
    b: Vec<f64>,
}

/// An approximant and a dual measure, both explicit.
struct Certificate {
    upper: f64,
    lower: f64,
    coefficients: Vec<f64>,
}

impl<'a> DegreeProblem<'a> {
    fn new(f: &'a CubeFunction, d: usize) -> Self {
        let n = f.n();
        let spectrum = wht_forward(f);
        let masks = low_masks(n, d);
        let tail: Vec<usize> = (0..f.len())
            .filter(|s| s.count_ones() as usize > d)
            .collect();
        let tail_scale = tail
            .iter()
            .fold(0.0f64, |m, &s| m.max(spectrum.coeff(s).abs()));
        let b = if tail_scale > 0.0 {
            tail.iter()
                .map(|&s| spectrum.coeff(s) / tail_scale)
                .collect()
        } else {
            vec![0.0; tail.len()]
        };
        Self {
            f,
            n,
            d,
            masks,
            tail,
            spectrum,
            scale: f.max_abs(),
            tail_scale,
            b,
        }
    }

    fn npts(&self) -> usize {
        1 << self.n
    }

    fn use_measure_form(&self) -> bool {
        self.masks.len() < self.tail.len()
    }

    fn rows(&self) -> usize {
        if self.use_measure_form() {
            self.masks.len() + 1
        } else {
            self.tail.len()
        }
    }

    fn low_coefficients(&self) -> Vec<f64> {
        self.masks.iter().map(|&m| self.spectrum.coeff(m)).collect()
    }

    fn polynomial(&self, coefficients: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.npts()];
        for (&s, &c) in self.masks.iter().zip(coefficients) {
            g[s] = c;
        }
        butterfly(&mut g);
        g
    }

    fn lower_from_measure(&self, mu: Vec<f64>) -> f64 {
        measure_lower_bound(self.f.values(), &strip_low(mu, self.d))
    }

    /// Upper bound from measure-form duals (scaled coefficients).
    fn upper_from_duals(&self, y: &[f64]) -> (f64, Vec<f64>) {
        let coefficients: Vec<f64> = y[..self.masks.len()]
            .iter()
            .map(|c| c * self.scale)
            .collect();
        let g = self.polynomial(&coefficients);
        (sup_residual(self.f, &g), coefficients)
    }

    /// Upper bound from a tail-form primal point `rho`, `lambda`.
    ///
    /// The rows read `2^n rhohat(S) = lambda fhat(S) / tail_scale`, so the
    /// residual with the tail of `f` is `rho * 2^n * tail_scale / lambda`.
    /// Projecting `f - residual` onto the low space absorbs any primal
    /// infeasibility left by the solver.
    fn upper_from_tail(&self, rho: &[f64], lambda: f64) -> Option<(f64, Vec<f64>)> {
        if !(lambda > 0.0) {
            return None;
        }
        let npts = self.npts();
        let r_scale = self.tail_scale * npts as f64 / lambda;
        let mut r: Vec<f64> = rho.iter().map(|v| v * r_scale).collect();
        butterfly(&mut r);
        let coefficients: Vec<f64> = self
            .masks
            .iter()
            .map(|&m| self.spectrum.coeff(m) - r[m] / npts as f64)
            .collect();
        let g = self.polynomial(&coefficients);
        Some((sup_residual(self.f, &g), coefficients))
    }

    fn lower_from_tail_duals(&self, y: &[f64]) -> f64 {
        let mut mu = vec![0.0; self.npts()];
        for (&s, &v) in self.tail.iter().zip(y) {
            mu[s] = v;
        }
        butterfly(&mut mu);
        measure_lower_bound(self.f.values(), &mu).abs()
    }

    fn tail_certificate(&self, rho: &[f64], lambda: f64, y: &[f64]) -> Result<Certificate> {
        let (upper, coefficients) = self
            .upper_from_tail(rho, lambda)
            .ok_or_else(|| HcjError::Numerical("tail form finished with lambda = 0".into()))?;
        Ok(Certificate {
            upper,
            lower: self.lower_from_tail_duals(y),
            coefficients,
        })
    }

    fn solve_simplex(&self, limits: &LpOptions) -> Result<(Certificate, SolveStatus, usize)> {
        let npts = self.npts();
        if self.use_measure_form() {
            let matrix = CharacterMeasure {
                n: self.n,
                masks: &self.masks,
            };
            let (coefficients, mu, status, iterations) =
                solve_measure(self.f.values(), self.scale, &matrix, limits)?;
            let g = self.polynomial(&coefficients);
            let cert = Certificate {
                upper: sup_residual(self.f, &g),
                lower: self.lower_from_measure(mu),
                coefficients,
            };
            return Ok((cert, status, iterations));
        }
        let matrix = TailForm {
            n: self.n,
            masks: &self.tail,
            b: &self.b,
        };
        let mut lower = vec![-1.0; npts + 1];
        let mut upper = vec![1.0; npts + 1];
        let mut start = vec![1.0; npts + 1];
        let mut cost = vec![0.0; npts + 1];
        lower[npts] = 0.0;
        upper[npts] = f64::INFINITY;
        start[npts] = 0.0;
        cost[npts] = 1.0;
        let sol = simplex::solve(
            LpSpec {
                matrix: &matrix,
                cost,
                lower,
                upper,
                rhs: vec![0.0; self.tail.len()],
                kinds: vec![RowKind::Eq; self.tail.len()],
                start,
            },
            simplex_options(limits),
        )?;
        let status = status_of(sol.status)?;
        let cert = self.tail_certificate(&sol.x[..npts], sol.x[npts], &sol.duals)?;
        Ok((cert, status, sol.iterations))
    }

    /// Purifies a near-optimal tail-form point: entries of `rho` within
    /// `PURIFY_TOL` of `+-1` are fixed there and the remaining entries,
    /// together with a fresh `lambda`, are recomputed from the equality rows
    /// (least squares, or minimum norm when the free set is large).
    fn polish_tail(&self, rho: &[f64]) -> Option<(f64, Vec<f64>)> {
        const PURIFY_TOL: f64 = 1e-7;
        let free: Vec<usize> = (0..rho.len())
            .filter(|&x| rho[x].abs() < 1.0 - PURIFY_TOL)
            .collect();
        let rows = self.tail.len();
        let cols = free.len() + 1;
        if cols > 2 * rows + 64 {
            return None;
        }
        let mut fixed: Vec<f64> = rho
            .iter()
            .map(|r| {
                if r.abs() < 1.0 - PURIFY_TOL {
                    0.0
                } else {
                    r.signum()
                }
            })
            .collect();
        butterfly(&mut fixed);
        let h = Mat::<f64>::from_fn(rows, 1, |i, _| -fixed[self.tail[i]]);
        let entry = |i: usize, k: usize| {
            if k < free.len() {
                walsh(self.tail[i], free[k])
            } else {
                -self.b[i]
            }
        };
        let z: Vec<f64> = if rows >= cols {
            let k = Mat::<f64>::from_fn(rows, cols, entry);
            let sol = k.qr().solve_lstsq(&h);
            (0..cols).map(|i| sol.read(i, 0)).collect()
        } else {
            // K^T = QR, so the minimum norm solution is Q R^-T h.
            let kt = Mat::<f64>::from_fn(cols, rows, |k, i| entry(i, k));
            let qr = kt.qr();
            let q = qr.compute_thin_q();
            let r = qr.compute_thin_r();
            let mut w = vec![0.0; rows];
            for i in 0..rows {
                let mut acc = h.read(i, 0);
                for j in 0..i {
                    acc -= r.read(j, i) * w[j];
                }
                let d = r.read(i, i);
                if d.abs() < 1e-13 {
                    return None;
                }
                w[i] = acc / d;
            }
            (0..cols)
                .map(|k| (0..rows).map(|i| q.read(k, i) * w[i]).sum())
                .collect()
        };
        let mut polished: Vec<f64> = rho.iter().map(|r| r.signum()).collect();
        for (k, &x) in free.iter().enumerate() {
            polished[x] = z[k].clamp(-1.0, 1.0);
        }
        self.upper_from_tail(&polished, z[cols - 1])
    }

    /// Interior point solve, driven by certificates.
    ///
    /// Every iterate yields a valid upper bound (its approximant, projected
    /// onto the low space) and a valid lower bound (its measure, made
    /// exactly orthogonal), so the best of each is kept across iterations.
    /// `stop` sees the running best pair and ends the run when it returns
    /// `true`.
    fn solve_ipm(
        &self,
        limits: &LpOptions,
        stop: &mut dyn FnMut(f64, f64) -> bool,
    ) -> Result<(Certificate, usize)> {
        let npts = self.npts();
        let opts = IpmOptions {
            max_iterations: limits.max_ipm_iterations,
            ..IpmOptions::default()
        };
        let mut best = Certificate {
            upper: f64::INFINITY,
            lower: 0.0,
            coefficients: Vec::new(),
        };
        let offer = |best: &mut Certificate, upper: Option<(f64, Vec<f64>)>, lower: f64| {
            let mut improved = false;
            if let Some((u, c)) = upper {
                if u < best.upper {
                    best.upper = u;
                    best.coefficients = c;
                    improved = true;
                }
            }
            if lower.is_finite() && lower > best.lower {
                best.lower = lower;
            }
            improved
        };
        // Iterations without halving the certificate gap before giving up;
        // late interior point iterates can lose primal accuracy.
        const STALL_LIMIT: usize = 6;
        let mut stall = (f64::INFINITY, 0usize);
        let mut stalled = move |best: &Certificate| {
            let gap = best.upper - best.lower;
            if gap < 0.5 * stall.0 {
                stall = (gap, 0);
            } else {
                stall.1 += 1;
            }
            stall.1 >= STALL_LIMIT
        };
        let mut best_primal: Option<Vec<f64>> = None;
        let iterations = if self.use_measure_form() {
            let op = CharacterMeasureNormal {
                n: self.n,
                masks: &self.masks,
            };
            let mut cost = Vec::with_capacity(2 * npts);
            cost.extend(self.f.values().iter().map(|v| v / self.scale));
            cost.extend(self.f.values().iter().map(|v| -v / self.scale));
            let mut rhs = vec![0.0; self.masks.len() + 1];
            rhs[self.masks.len()] = 1.0;
            let mut monitor = |x: &[f64], y: &[f64]| {
                let mu: Vec<f64> = (0..npts).map(|p| x[p] - x[npts + p]).collect();
                offer(
                    &mut best,
                    Some(self.upper_from_duals(y)),
                    self.lower_from_measure(mu),
                );
                stop(best.upper, best.lower) || stalled(&best)
            };
            let sol = ipm::solve(
                IpmSpec {
                    op: &op,
                    cost,
                    rhs,
                    upper: vec![f64::INFINITY; 2 * npts],
                    start: vec![0.5 / npts as f64; 2 * npts],
                },
                opts,
                Some(&mut monitor),
            )?;
            // The run may end on the iteration cap without showing the last
            // iterate to the monitor.
            monitor(&sol.x, &sol.y);
            sol.iterations
        } else {
            let op = TailNormal {
                n: self.n,
                masks: &self.tail,
                b: &self.b,
            };
            // Shift rho = w - 1 so that the box becomes 0 <= w <= 2. The
            // tail never contains the empty set, so the right-hand side
            // stays zero.
            let mut cost = vec![0.0; npts + 1];
            cost[npts] = 1.0;
            let mut upper = vec![2.0; npts + 1];
            upper[npts] = f64::INFINITY;
            let mut monitor = |x: &[f64], y: &[f64]| {
                let rho: Vec<f64> = x[..npts].iter().map(|w| w - 1.0).collect();
                let improved = offer(
                    &mut best,
                    self.upper_from_tail(&rho, x[npts]),
                    self.lower_from_tail_duals(y),
                );
                if improved {
                    best_primal = Some(rho);
                }
                stop(best.upper, best.lower) || stalled(&best)
            };
            let sol = ipm::solve(
                IpmSpec {
                    op: &op,
                    cost,
                    rhs: vec![0.0; self.tail.len()],
                    upper,
                    start: vec![1.0; npts + 1],
                },
                opts,
                Some(&mut monitor),
            )?;
            monitor(&sol.x, &sol.y);
            if let Some(rho) = best_primal.take() {
                let polished = self.polish_tail(&rho);
                offer(&mut best, polished, f64::NAN);
                stop(best.upper, best.lower);
            }
            sol.iterations
        };
        if best.coefficients.is_empty() {
            return Err(HcjError::Numerical(
                "interior point method produced no approximant".into(),
            ));
        }
        Ok((best, iterations))
    }
}

fn fit_degree(f: &CubeFunction, d: usize, limits: &LpOptions) -> Result<MinimaxResult> {
    let problem = DegreeProblem::new(f, d);
    if problem.tail.is_empty() || problem.tail_scale == 0.0 {
        return Ok(MinimaxResult {
            error: 0.0,
            lower_bound: 0.0,
            coefficients: problem.low_coefficients(),
            status: SolveStatus::Optimal,
            iterations: 0,
        });
    }
    let rows = problem.rows();
    check_limits(problem.masks.len(), rows, limits)?;
    let method = match limits.method {
        LpMethod::Auto if rows > IPM_ROW_THRESHOLD => LpMethod::InteriorPoint,
        LpMethod::Auto => LpMethod::Simplex,
        m => m,
    };
    if method == LpMethod::InteriorPoint {
        let target = IPM_TARGET_GAP * f.max_abs().max(1.0);
        let attempt = problem
            .solve_ipm(limits, &mut |upper, lower| upper - lower <= target)
            .and_then(|(c, it)| {
                let status = if c.upper - c.lower <= GAP_TOLERANCE * f.max_abs().max(1.0) {
                    SolveStatus::Optimal
                } else {
                    SolveStatus::IterationLimit
                };
                finish(f.max_abs(), c.upper, c.lower, c.coefficients, status, it)
            });
        match attempt {
            Ok(r) if r.status == SolveStatus::Optimal => return Ok(r),
            // An explicit request reports what the interior point method
            // achieved; the automatic choice falls back to the simplex.
            other if limits.method == LpMethod::InteriorPoint => return other,
            _ => {}
        }
    }
    let (c, status, iterations) = problem.solve_simplex(limits)?;
    finish(
        f.max_abs(),
        c.upper,
        c.lower,
        c.coefficients,
        status,
        iterations,
    )
}

/// Outcome of [`ed_at_most`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdDecision {
    /// Whether `E_d^n(f) <= bound` was certified.
    pub holds: bool,
    /// Certified upper bound on `E_d^n(f)` at the point of decision.
    pub upper: f64,
    /// Certified lower bound on `E_d^n(f)` at the point of decision.
    pub lower: f64,
}

/// Decides `E_d^n(f) <= bound` without necessarily solving to optimality.
///
/// The answer is backed by an explicit certificate: an approximant with
/// residual `upper <= bound`, or an orthogonal measure with
/// `lower > bound`. Cheap approximants (the mean, the truncation `f_{<=d}`)
/// are tried first; otherwise the interior point iterates are monitored and
/// the run stops as soon as either certificate appears. If the bound sits
/// within the solver gap of the optimum, the optimal certificates decide.
pub fn ed_at_most(f: &CubeFunction, d: usize, bound: f64) -> Result<EdDecision> {
    ed_at_most_with(f, d, bound, &LpOptions::default())
}

pub fn ed_at_most_with(
    f: &CubeFunction,
    d: usize,
    bound: f64,
    limits: &LpOptions,
) -> Result<EdDecision> {
    if d > f.n() {
        return Err(HcjError::Parameter(format!(
            "degree {d} exceeds n = {}",
            f.n()
        )));
    }
    let problem = DegreeProblem::new(f, d);
    let constant = (f.max() - f.min()) / 2.0;
    let truncation = {
        let g = problem.polynomial(&problem.low_coefficients());
        sup_residual(f, &g)
    };
    let cheap = constant.min(truncation);
    if cheap <= bound || problem.tail_scale == 0.0 {
        return Ok(EdDecision {
            holds: true,
            upper: if problem.tail_scale == 0.0 {
                0.0
            } else {
                cheap
            },
            lower: 0.0,
        });
    }
    check_limits(problem.masks.len(), problem.rows(), limits)?;
    let mut decided: Option<EdDecision> = None;
    let mut watch = |upper: f64, lower: f64| {
        if upper <= bound {
            decided = Some(EdDecision {
                holds: true,
                upper,
                lower,
            });
        } else if lower > bound {
            decided = Some(EdDecision {
                holds: false,
                upper,
                lower,
            });
        }
        decided.is_some()
    };
    let use_ipm = limits.method == LpMethod::InteriorPoint
        || (limits.method == LpMethod::Auto && problem.rows() > IPM_ROW_THRESHOLD);
    let cert = if use_ipm {
        problem.solve_ipm(limits, &mut watch)?.0
    } else {
        problem.solve_simplex(limits)?.0
    };
    if let Some(dec) = decided {
        return Ok(dec);
    }
    Ok(EdDecision {
        holds: cert.upper <= bound,
        upper: cert.upper,
        lower: cert.lower.min(cert.upper),
    })
}

/// `E_d^n(f)`, the best uniform error of a degree-`d` approximation.
pub fn ed_n(f: &CubeFunction, d: usize) -> Result<f64> {
    Ok(minimax_fit(f, &BasisSpec::degree(f.n(), d)?)?.error)
}

/// Smallest `l` with `E_l^n(f) <= threshold`.
pub fn approx_degree(f: &CubeFunction, threshold: f64) -> Result<usize> {
    if !(threshold > 0.0) {
        return Err(HcjError::Parameter(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    for l in 0..=f.n() {
        if ed_n(f, l)? <= threshold {
            return Ok(l);
        }
    }
    Ok(f.n())
}

/// The polynomial with the given degree-basis coefficients, as a table.
pub fn evaluate_degree_coefficients(
    n: usize,
    d: usize,
    coefficients: &[f64],
) -> Result<CubeFunction> {
    let masks = low_masks(n, d);
    if masks.len() != coefficients.len() {
        return Err(HcjError::Length {
            n,
            expected: masks.len(),
            got: coefficients.len(),
        });
    }
    let mut c = vec![0.0; 1 << n];
    for (&s, &v) in masks.iter().zip(coefficients) {
        c[s] = v;
    }
    Ok(wht_inverse(&Spectrum::new(n, c)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn and2() -> CubeFunction {
        CubeFunction::new(2, vec![0.0, 0.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn constant_basis_is_chebyshev_center() {
        let f = CubeFunction::new(3, vec![0.3, -1.0, 2.0, 0.5, 0.0, 1.5, -0.25, 0.75]).unwrap();
        let basis = BasisSpec::vectors(vec![CubeFunction::constant(3, 1.0).unwrap()]).unwrap();
        let r = minimax_fit(&f, &basis).unwrap();
        assert!((r.error - 1.5).abs() < 1e-12);
        assert!((r.coefficients[0] - 0.5).abs() < 1e-12);
        assert!((ed_n(&f, 0).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn and_degree_one() {
        let r = minimax_fit(&and2(), &BasisSpec::degree(2, 1).unwrap()).unwrap();
        assert!((r.error - 0.25).abs() < 1e-12);
        // Masks are ordered 0b00, 0b01, 0b10.
        let expect = [0.25, -0.25, -0.25];
        for (c, e) in r.coefficients.iter().zip(expect) {
            assert!((c - e).abs() < 1e-12, "{:?}", r.coefficients);
        }
        assert!((ed_n(&and2(), 0).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(ed_n(&and2(), 2).unwrap(), 0.0);
    }

    #[test]
    fn full_space_has_zero_error() {
        let n = 3;
        let f = CubeFunction::from_fn(n, |x| (x as f64).sin()).unwrap();
        let chars = (0..1 << n)
            .map(|s| CubeFunction::character(n, s).unwrap())
            .collect();
        let r = minimax_fit(&f, &BasisSpec::vectors(chars).unwrap()).unwrap();
        assert!(r.error < 1e-10);
    }

    #[test]
    fn approx_degree_examples() {
        assert_eq!(approx_degree(&and2(), 1.0 / 3.0).unwrap(), 1);
        assert_eq!(
            approx_degree(&CubeFunction::constant(4, 2.0).unwrap(), 1.0 / 3.0).unwrap(),
            0
        );
        for n in 3..=7 {
            let f = CubeFunction::from_fn(n, |x| walsh((1 << n) - 1, x) / n as f64).unwrap();
            assert_eq!(approx_degree(&f, 1.0 / 3.0).unwrap(), 0);
        }
        assert!(approx_degree(&and2(), 0.0).is_err());
    }

    #[test]
    fn both_forms_agree_on_parity() {
        // Parity is at distance 1 from every lower degree space.
        for n in 2..=6 {
            let p = CubeFunction::character(n, (1 << n) - 1).unwrap();
            for d in 0..n {
                assert!((ed_n(&p, d).unwrap() - 1.0).abs() < 1e-10, "n={n} d={d}");
            }
        }
    }

    #[test]
    fn interior_point_and_simplex_agree() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(7);
        let simplex = LpOptions {
            method: LpMethod::Simplex,
            ..LpOptions::default()
        };
        let ipm = LpOptions {
            method: LpMethod::InteriorPoint,
            ..LpOptions::default()
        };
        for n in 2..=8 {
            for kind in 0..3 {
                let profile: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let f = CubeFunction::from_fn(n, |x| match kind {
                    0 => rng.gen_range(-1.0..1.0),
                    1 => {
                        if rng.gen::<bool>() {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                    _ => profile[x.count_ones() as usize],
                })
                .unwrap();
                for d in 0..n {
                    let basis = BasisSpec::degree(n, d).unwrap();
                    let a = minimax_fit_with(&f, &basis, &simplex).unwrap();
                    let b = minimax_fit_with(&f, &basis, &ipm).unwrap();
                    assert_eq!(b.status, SolveStatus::Optimal, "n={n} kind={kind} d={d}");
                    assert!(
                        (a.error - b.error).abs() < 1e-9,
                        "n={n} kind={kind} d={d}: {} vs {}",
                        a.error,
                        b.error
                    );
                }
            }
        }
    }

    #[test]
    fn limits_are_enforced() {
        let f = CubeFunction::from_fn(6, |x| (x as f64).sin()).unwrap();
        let limits = LpOptions {
            max_variables: 10,
            ..LpOptions::default()
        };
        let e = minimax_fit_with(&f, &BasisSpec::degree(6, 2).unwrap(), &limits).unwrap_err();
        assert!(matches!(e, HcjError::Resource(_)));
    }

    #[test]
    fn rank_deficient_basis_is_fine() {
        let n = 3;
        let f = CubeFunction::from_fn(n, |x| (x * x) as f64 / 10.0).unwrap();
        let w1 = CubeFunction::character(n, 1).unwrap();
        let basis = BasisSpec::vectors(vec![
            CubeFunction::constant(n, 1.0).unwrap(),
            w1.clone(),
            w1.affine(2.0, 0.0),
        ])
        .unwrap();
        let a = minimax_fit(&f, &basis).unwrap();
        let b = minimax_fit(
            &f,
            &BasisSpec::vectors(vec![CubeFunction::constant(n, 1.0).unwrap(), w1]).unwrap(),
        )
        .unwrap();
        assert!((a.error - b.error).abs() < 1e-10);
    }
}
