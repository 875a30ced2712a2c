use std::path::PathBuf;

use clap::{Args, ValueEnum};
use hcj_core::{
    approx_degree, explicit_h, family_member, gauss_binomial_quadrature, greedy_packing,
    guarantee_frontier, harmonic_defect, jackson_bounds, kernel_apply, kernel_constant, kravchuk,
    kravchuk_roots, lift_profile, lorenz_witness, minimax::degree_dim, minimax_fit_with,
    odd_harmonic_dimension, odd_harmonic_project, odd_harmonic_residual,
    packing::guarantee_from_packing, packing_volume_bound, profile_of, profile_sensitivity_bounds,
    ptf_census, quadrature_h, random_boolean, random_uniform_stream, ratio_probe, sensitivity,
    symmetric_ed, tail_experiment, tail_inf_norm, wht_forward, wht_inverse, BasisSpec,
    CubeFunction, LpOptions, SolveStatus, Spectrum, SymmetricProfile, UnivariatePoly, RNG_ID,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::format::{self, FileFormat};
use crate::output::{Cell, Table};

/// A table plus what the manifest needs to know about how it was made.
pub struct Outcome {
    pub table: Table,
    pub seed: Option<u64>,
    pub random: bool,
}

impl Outcome {
    fn plain(table: Table) -> Self {
        Self {
            table,
            seed: None,
            random: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RandomKind {
    /// `+-1` values.
    #[default]
    Bool,
    /// Values uniform in `[-1, 1]`.
    Uniform,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct InputArgs {
    /// Function file, JSON or HCF1 binary; `-` reads standard input.
    #[arg(long = "in", value_name = "PATH", conflicts_with = "random")]
    pub input: Option<PathBuf>,
    /// Generate a random function on N bits instead of reading one.
    #[arg(long, value_name = "N", requires = "seed")]
    pub random: Option<usize>,
    #[arg(long, value_enum, default_value_t)]
    pub kind: RandomKind,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl InputArgs {
    pub fn load(&self) -> CliResult<CubeFunction> {
        match (&self.input, self.random) {
            (Some(path), _) => format::read_function(path),
            (None, Some(n)) => {
                let seed = self.seed.expect("clap enforces --seed with --random");
                Ok(match self.kind {
                    RandomKind::Bool => random_boolean(n, seed)?,
                    RandomKind::Uniform => random_uniform_stream(n, seed, 0)?,
                })
            }
            (None, None) => Err(CliError::Usage(
                "one of --in or --random is required".into(),
            )),
        }
    }

    fn outcome(&self, table: Table) -> Outcome {
        Outcome {
            table,
            seed: self.random.and(self.seed),
            random: self.random.is_some(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EmitFormat {
    #[default]
    Binary,
    Json,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EmitArgs {
    /// Also write the resulting table of 2^n values as a function file.
    #[arg(long, value_name = "PATH")]
    pub emit: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub emit_format: EmitFormat,
}

impl EmitArgs {
    fn write(&self, f: &CubeFunction) -> CliResult<()> {
        if let Some(path) = &self.emit {
            let fmt = match self.emit_format {
                EmitFormat::Binary => FileFormat::Binary,
                EmitFormat::Json => FileFormat::Json,
            };
            format::write_function(path, f, fmt)?;
        }
        Ok(())
    }
}

fn degrees_or_all(list: &[usize], n: usize) -> CliResult<Vec<usize>> {
    if list.is_empty() {
        return Ok((0..=n).collect());
    }
    if let Some(&d) = list.iter().find(|&&d| d > n) {
        return Err(hcj_core::HcjError::Parameter(format!("degree {d} exceeds n = {n}")).into());
    }
    Ok(list.to_vec())
}

// transform ---------------------------------------------------------------

#[derive(Debug, Clone, Args, Serialize)]
pub struct TransformArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Treat the input table as Walsh coefficients and synthesize values.
    #[arg(long)]
    pub inverse: bool,
    #[command(flatten)]
    pub emit: EmitArgs,
}

pub fn transform(a: &TransformArgs) -> CliResult<Outcome> {
    let f = a.input.load()?;
    let mut table;
    if a.inverse {
        let g = wht_inverse(&Spectrum::new(f.n(), f.into_values())?);
        table = Table::new(&["index", "value"]);
        for (x, v) in g.values().iter().enumerate() {
            table.push(vec![x.into(), (*v).into()]);
        }
        a.emit.write(&g)?;
    } else {
        let s = wht_forward(&f);
        table = Table::new(&["mask", "size", "coeff"]);
        for (mask, c) in s.coeffs().iter().enumerate() {
            table.push(vec![mask.into(), mask.count_ones().into(), (*c).into()]);
        }
        a.emit
            .write(&CubeFunction::new(s.n(), s.coeffs().to_vec())?)?;
    }
    Ok(a.input.outcome(table))
}

// sens --------------------------------------------------------------------

#[derive(Debug, Clone, Args, Serialize)]
pub struct SensArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Degree tolerance; defaults to 1e-9 times the largest coefficient.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Also report `||f||_1 / ||Delta f||_1`, requiring no spectrum at levels `<= D`.
    #[arg(long, value_name = "D")]
    pub ratio_d: Option<usize>,
}

pub fn sens(a: &SensArgs) -> CliResult<Outcome> {
    let f = a.input.load()?;
    let spectrum = wht_forward(&f);
    let tol = a.tol.unwrap_or_else(|| spectrum.default_tolerance());
    if !(tol >= 0.0) {
        return Err(CliError::Input(format!(
            "tolerance must be nonnegative, got {tol}"
        )));
    }
    let s = sensitivity(&f);
    let lap = hcj_core::laplacian(&f).max_abs();
    let mut cols = vec![
        "n",
        "sensitivity",
        "argmax_point",
        "degree",
        "laplacian_max",
    ];
    let mut row: Vec<Cell> = vec![
        f.n().into(),
        s.value.into(),
        s.argmax_point.into(),
        hcj_core::degree(&spectrum, tol).into(),
        lap.into(),
    ];
    if let Some(d) = a.ratio_d {
        let p = ratio_probe(&f, d)?;
        cols.extend(["ratio_d", "l1", "laplacian_l1", "ratio"]);
        row.extend([d.into(), p.l1.into(), p.laplacian_l1.into(), p.ratio.into()]);
    }
    let mut table = Table::new(&cols);
    table.push(row);
    Ok(a.input.outcome(table))
}

// ed ----------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Auto,
    Simplex,
    Ipm,
}

impl Method {
    fn options(self) -> LpOptions {
        let method = match self {
            Method::Auto => hcj_core::LpMethod::Auto,
            Method::Simplex => hcj_core::LpMethod::Simplex,
            Method::Ipm => hcj_core::LpMethod::InteriorPoint,
        };
        LpOptions {
            method,
            ..LpOptions::default()
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EdArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Degrees to fit, comma separated; all of `0..=n` when absent.
    #[arg(long, value_delimiter = ',')]
    pub d: Vec<usize>,
    /// Fit against the vectors in this JSON file, `{"n": n, "elements": [[...], ...]}`,
    /// instead of a degree basis.
    #[arg(long, value_name = "PATH", conflicts_with = "d")]
    pub basis: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub method: Method,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BasisFile {
    n: usize,
    elements: Vec<Vec<f64>>,
}

fn load_basis(path: &PathBuf, n: usize) -> CliResult<BasisSpec> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Read {
        path: path.display().to_string(),
        source,
    })?;
    let file: BasisFile = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Input(format!("malformed basis file: {e}")))?;
    if file.n != n {
        return Err(CliError::Input(format!(
            "basis is for n = {}, function has n = {n}",
            file.n
        )));
    }
    let elements = file
        .elements
        .into_iter()
        .map(|v| CubeFunction::new(n, v))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BasisSpec::vectors(elements)?)
}

fn status_text(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Optimal => "optimal",
        SolveStatus::IterationLimit => "iteration-limit",
    }
}

pub fn ed(a: &EdArgs) -> CliResult<Outcome> {
    let f = a.input.load()?;
    let opts = a.method.options();
    if let Some(path) = &a.basis {
        let basis = load_basis(path, f.n())?;
        let r = minimax_fit_with(&f, &basis, &opts)?;
        let mut table = Table::new(&["dim", "error", "lower_bound", "status", "iterations"]);
        table.push(vec![
            basis.dim().into(),
            r.error.into(),
            r.lower_bound.into(),
            status_text(r.status).into(),
            r.iterations.into(),
        ]);
        return Ok(a.input.outcome(table));
    }
    let mut table = Table::new(&[
        "d",
        "dim",
        "error",
        "lower_bound",
        "tail_inf_norm",
        "status",
        "iterations",
    ]);
    for d in degrees_or_all(&a.d, f.n())? {
        let r = minimax_fit_with(&f, &BasisSpec::degree(f.n(), d)?, &opts)?;
        table.push(vec![
            d.into(),
            degree_dim(f.n(), d).into(),
            r.error.into(),
            r.lower_bound.into(),
            tail_inf_norm(&f, d)?.into(),
            status_text(r.status).into(),
            r.iterations.into(),
        ]);
    }
    Ok(a.input.outcome(table))
}

// adeg --------------------------------------------------------------------

#[derive(Debug, Clone, Args, Serialize)]
pub struct AdegArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub threshold: f64,
}

pub fn adeg(a: &AdegArgs) -> CliResult<Outcome> {
    let f = a.input.load()?;
    let l = approx_degree(&f, a.threshold)?;
    let mut table = Table::new(&["n", "threshold", "approx_degree"]);
    table.push(vec![f.n().into(), a.threshold.into(), l.into()]);
    Ok(a.input.outcome(table))
}

// sym ---------------------------------------------------------------------

#[derive(Debug, Clone, Args, Serialize)]
pub struct SymArgs {
    /// Profile values `phi(0), ..., phi(n)`, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        conflicts_with = "input"
    )]
    pub phi: Vec<f64>,
    /// A symmetric function file, reduced to its profile.
    #[arg(long = "in", value_name = "PATH")]
    pub input: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub d: Vec<usize>,
}

pub fn sym(a: &SymArgs) -> CliResult<Outcome> {
    let p = match &a.input {
        Some(path) => profile_of(&format::read_function(path)?)?,
        None if !a.phi.is_empty() => SymmetricProfile::new(a.phi.clone())?,
        None => return Err(CliError::Usage("one of --phi or --in is required".into())),
    };
    let (lower, upper) = profile_sensitivity_bounds(&p);
    let s = sensitivity(&lift_profile(&p)).value;
    let mut table = Table::new(&["n", "d", "error", "sensitivity", "s_lower", "s_upper"]);
    for d in degrees_or_all(&a.d, p.n())? {
        table.push(vec![
            p.n().into(),
            d.into(),
            symmetric_ed(&p, d)?.into(),
            s.into(),
            lower.into(),
            upper.into(),
        ]);
    }
    Ok(Outcome::plain(table))
}

// witness -----------------------------------------------------------------

#[derive(Debug, Clone, Args, Serialize)]
pub struct WitnessArgs {
    #[arg(long, required = true, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long, required = true, value_delimiter = ',')]
    pub d: Vec<usize>,
    /// Print the profile of each witness, one row per level, instead of the summary.
    #[arg(long)]
    pub profile: bool,
}

pub fn witness(a: &WitnessArgs) -> CliResult<Outcome> {
    let mut table = if a.profile {
        Table::new(&["n", "d", "k", "phi"])
    } else {
        Table::new(&[
            "n",
            "d",
            "spacing",
            "guarantee",
            "error",
            "sensitivity",
            "lipschitz",
            "s_over_8d",
            "signs",
            "tried",
        ])
    };
    for &n in &a.n {
        for &d in &a.d {
            let w = lorenz_witness(n, d)?;
            if a.profile {
                for (k, v) in w.profile.phi().iter().enumerate() {
                    table.push(vec![n.into(), d.into(), k.into(), (*v).into()]);
                }
                continue;
            }
            let s = sensitivity(&lift_profile(&w.profile)).value;
            let signs: String = w
                .sign_vector
                .iter()
                .map(|&e| if e > 0 { '+' } else { '-' })
                .collect();
            table.push(vec![
                n.into(),
                d.into(),
                w.spacing.into(),
                w.guarantee.into(),
                w.error.into(),
                s.into(),
                w.profile.is_lipschitz().into(),
                (s / (8.0 * d as f64)).into(),
                signs.into(),
                w.tried.into(),
            ]);
        }
    }
    Ok(Outcome::plain(table))
}

// kernel ------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    /// `prod (k - x)` over the top `d` levels, normalized.
    #[default]
    Explicit,
    /// Squared Gauss-rule polynomial.
    Quadrature,
}

fn kernel_poly(kind: KernelKind, n: usize, d: usize) -> CliResult<UnivariatePoly> {
    Ok(match kind {
        KernelKind::Explicit => explicit_h(n, d)?,
        KernelKind::Quadrature => quadrature_h(n, d)?,
    })
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KernelArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_delimiter = ',')]
    pub d: Vec<usize>,
    #[arg(long, value_enum, default_value_t)]
    pub h: KernelKind,
    /// Write the smoothed function for the last degree.
    #[command(flatten)]
    pub emit: EmitArgs,
}

pub fn kernel(a: &KernelArgs) -> CliResult<Outcome> {
    let f = a.input.load()?;
    let n = f.n();
    let s = sensitivity(&f).value;
    let mut table = Table::new(&[
        "n",
        "d",
        "h",
        "kernel_constant",
        "sensitivity",
        "error",
        "bound",
        "holds",
    ]);
    let mut last = None;
    for d in degrees_or_all(&a.d, n)? {
        let h = kernel_poly(a.h, n, d)?;
        let g = kernel_apply(&f, &h)?;
        let err = f.sup_distance(&g);
        let c = kernel_constant(n, &h);
        let bound = 3.0 * s / n as f64 * c;
        let name = match a.h {
            KernelKind::Explicit => "explicit",
            KernelKind::Quadrature => "quadrature",
        };
        table.push(vec![
            n.into(),
            d.into(),
            name.into(),
            c.into(),
            s.into(),
            err.into(),
            bound.into(),
            (err <= bound + 1e-9 * s).into(),
        ]);
        last = Some(g);
    }
    if let Some(g) = last {
        a.emit.write(&g)?;
    }
    Ok(a.input.outcome(table))
}

// kravchuk ----------------------------------------------------------------

#[derive(Debug, Clone, Args, Serialize)]
pub struct KravchukArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub ell: usize,
    /// Print monomial coefficients rather than roots.
    #[arg(long)]
    pub coefficients: bool,
}

pub fn kravchuk_cmd(a: &KravchukArgs) -> CliResult<Outcome> {
    let mut table;
    if a.coefficients {
        let p = kravchuk(a.n, a.ell)?;
        table = Table::new(&["n", "ell", "power", "coeff"]);
        for (i, c) in p.coeffs().iter().enumerate() {
            table.push(vec![a.n.into(), a.ell.into(), i.into(), (*c).into()]);
        }
    } else {
        table = Table::new(&["n", "ell", "index", "root"]);
        for (i, r) in kravchuk_roots(a.n, a.ell)?.into_iter().enumerate() {
            table.push(vec![a.n.into(), a.ell.into(), i.into(), r.into()]);
        }
    }
    Ok(Outcome::plain(table))
}

// quad --------------------------------------------------------------------

#[derive(Debug, Clone, Args, Serialize)]
pub struct QuadArgs {
    #[arg(long)]
    pub n: usize,
    /// The rule has `p + 1` nodes and is exact through degree `2p + 1`.
    #[arg(long)]
    pub p: usize,
}

pub fn quad(a: &QuadArgs) -> CliResult<Outcome> {
    let rule = gauss_binomial_quadrature(a.n, a.p)?;
    let mut table = Table::new(&["n", "p", "index", "node", "weight"]);
    for (i, (t, w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        table.push(vec![
            a.n.into(),
            a.p.into(),
            i.into(),
            (*t).into(),
            (*w).into(),
        ]);
    }
    Ok(Outcome::plain(table))
}

// pack --------------------------------------------------------------------

#[derive(Debug, Clone, Args, Serialize)]
pub struct PackArgs {
    /// Dimension, or the largest dimension with `--frontier`.
    #[arg(long)]
    pub n: usize,
    /// Hat radius; the packing keeps centres more than `2m` apart.
    #[arg(long, required_unless_present = "frontier")]
    pub m: Option<usize>,
    /// Degrees for the counting certificate; `1..=n/2` when absent.
    #[arg(long, value_delimiter = ',')]
    pub d: Vec<usize>,
    /// Sweep every `4 <= n' <= n`, `1 <= m <= n'/4` and report the largest certified degree.
    #[arg(long, conflicts_with_all = ["m", "d", "centers"])]
    pub frontier: bool,
    /// List the packing centres instead of the certificate.
    #[arg(long)]
    pub centers: bool,
    /// With `--centers`, also report `s` of the family member with these signs,
    /// one character `+` or `-` per centre, repeated cyclically.
    #[arg(long, requires = "centers")]
    pub signs: Option<String>,
}

pub fn pack(a: &PackArgs) -> CliResult<Outcome> {
    if a.frontier {
        let mut table = Table::new(&["n", "m", "packing_size", "max_certified_d"]);
        for r in guarantee_frontier(a.n)? {
            table.push(vec![
                r.n.into(),
                r.m.into(),
                r.packing_size.into(),
                r.max_certified_d.into(),
            ]);
        }
        return Ok(Outcome::plain(table));
    }
    let m = a.m.expect("clap requires --m without --frontier");
    let centers = greedy_packing(a.n, m)?;
    if a.centers {
        let mut table = Table::new(&["index", "center", "weight"]);
        for (i, &c) in centers.iter().enumerate() {
            table.push(vec![i.into(), c.into(), c.count_ones().into()]);
        }
        if let Some(pattern) = &a.signs {
            let chars: Vec<i8> = pattern
                .chars()
                .map(|c| match c {
                    '+' => Ok(1),
                    '-' => Ok(-1),
                    other => Err(CliError::Input(format!("sign pattern has {other:?}"))),
                })
                .collect::<CliResult<_>>()?;
            if chars.is_empty() {
                return Err(CliError::Input("empty sign pattern".into()));
            }
            let signs = (0..centers.len()).map(|i| chars[i % chars.len()]).collect();
            let member = family_member(&hcj_core::PackingFamily {
                n: a.n,
                m,
                centers: centers.clone(),
                signs,
            })?;
            let mut t = Table::new(&["n", "m", "members", "sensitivity", "n_over_m"]);
            t.push(vec![
                a.n.into(),
                m.into(),
                centers.len().into(),
                sensitivity(&member).value.into(),
                (a.n as f64 / m as f64).into(),
            ]);
            return Ok(Outcome::plain(t));
        }
        return Ok(Outcome::plain(table));
    }
    let degrees = if a.d.is_empty() {
        (1..=a.n / 2).collect()
    } else {
        degrees_or_all(&a.d, a.n)?
    };
    let p = centers.len() as u64;
    let volume = packing_volume_bound(a.n, m);
    let mut table = Table::new(&[
        "n",
        "m",
        "d",
        "packing_size",
        "volume_bound",
        "rhs_log2",
        "holds",
        "exact",
    ]);
    for d in degrees {
        let g = guarantee_from_packing(a.n, m, d, p)?;
        table.push(vec![
            a.n.into(),
            m.into(),
            d.into(),
            p.into(),
            volume.into(),
            g.rhs_log2.into(),
            g.holds.into(),
            g.exact.into(),
        ]);
    }
    Ok(Outcome::plain(table))
}

// census ------------------------------------------------------------------

#[derive(Debug, Clone, Args, Serialize)]
pub struct CensusArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
}

pub fn census(a: &CensusArgs) -> CliResult<Outcome> {
    let r = ptf_census(a.n, a.d)?;
    let mut table = Table::new(&["n", "d", "total", "hard_count", "fraction"]);
    table.push(vec![
        r.n.into(),
        r.d.into(),
        r.total.into(),
        r.hard_count.into(),
        r.fraction.into(),
    ]);
    Ok(Outcome::plain(table))
}

// harmonic ----------------------------------------------------------------

#[derive(Debug, Clone, Args, Serialize)]
pub struct HarmonicArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Also compute the subspace dimension by exact rank.
    #[arg(long)]
    pub rank: bool,
    /// Write the projection.
    #[command(flatten)]
    pub emit: EmitArgs,
}

pub fn harmonic(a: &HarmonicArgs) -> CliResult<Outcome> {
    let f = a.input.load()?;
    let r = odd_harmonic_project(&f);
    let mut cols = vec!["n", "sensitivity", "error", "bound", "residual", "defect"];
    let mut row: Vec<Cell> = vec![
        f.n().into(),
        sensitivity(&f).value.into(),
        r.error.into(),
        r.bound.into(),
        odd_harmonic_residual(&r.g).into(),
        harmonic_defect(&f).into(),
    ];
    if a.rank {
        cols.push("dimension");
        row.push(odd_harmonic_dimension(f.n())?.into());
    }
    a.emit.write(&r.g)?;
    let mut table = Table::new(&cols);
    table.push(row);
    Ok(a.input.outcome(table))
}

// randtail ----------------------------------------------------------------

#[derive(Debug, Clone, Args, Serialize)]
pub struct RandtailArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, required = true, value_delimiter = ',')]
    pub d: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, required = true)]
    pub seed: u64,
    /// Constant in the bound `K sqrt(2^-n C(n, > d) n)`.
    #[arg(long, default_value_t = 3.0)]
    pub k: f64,
    /// One row per trial instead of one per degree.
    #[arg(long)]
    pub per_trial: bool,
}

pub fn randtail(a: &RandtailArgs) -> CliResult<Outcome> {
    let mut table = if a.per_trial {
        Table::new(&["n", "d", "trial", "max_tail_norm", "tail_energy", "exceeds"])
    } else {
        Table::new(&[
            "n",
            "d",
            "trials",
            "k",
            "bound",
            "exceed_count",
            "exceed_rate",
            "max_tail_norm",
            "mean_tail_energy",
            "expected_tail_energy",
        ])
    };
    for &d in &a.d {
        let t = tail_experiment(a.n, d, a.trials, a.seed, a.k)?;
        if a.per_trial {
            for (i, (v, e)) in t.max_tail_norms.iter().zip(&t.tail_energies).enumerate() {
                table.push(vec![
                    a.n.into(),
                    d.into(),
                    i.into(),
                    (*v).into(),
                    (*e).into(),
                    (*v > t.bound).into(),
                ]);
            }
            continue;
        }
        table.push(vec![
            a.n.into(),
            d.into(),
            a.trials.into(),
            a.k.into(),
            t.bound.into(),
            t.exceed_count.into(),
            t.exceed_rate().into(),
            t.max_tail_norms.iter().copied().fold(0.0, f64::max).into(),
            t.mean_tail_energy().into(),
            t.expected_tail_energy().into(),
        ]);
    }
    Ok(Outcome {
        table,
        seed: Some(a.seed),
        random: true,
    })
}

// bounds ------------------------------------------------------------------

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoundsArgs {
    #[arg(long, required = true, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Degrees; all of `0..=n` when absent.
    #[arg(long, value_delimiter = ',')]
    pub d: Vec<usize>,
}

pub fn bounds(a: &BoundsArgs) -> CliResult<Outcome> {
    let mut table = Table::new(&["n", "d", "delta", "pr", "k", "combined", "kernel_constant"]);
    for &n in &a.n {
        for d in degrees_or_all(&a.d, n)? {
            let b = jackson_bounds(n, d)?;
            table.push(vec![
                n.into(),
                d.into(),
                b.delta.into(),
                b.pr_bound.into(),
                b.k_bound.into(),
                b.combined.into(),
                b.kernel_constant.into(),
            ]);
        }
    }
    Ok(Outcome::plain(table))
}

/// Generator identifier for manifests of runs that drew random numbers.
pub fn rng_id(outcome: &Outcome) -> Option<&'static str> {
    outcome.random.then_some(RNG_ID)
}
