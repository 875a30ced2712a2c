use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::commands::{self, Outcome};
use crate::error::{CliError, CliResult, EXIT_INPUT, EXIT_OK};
use crate::output::{OutputFormat, RunManifest, Sink};
use crate::repro::{self, ReproConfig};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "HCJ_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "hcj",
    version,
    about = "Approximation and sensitivity experiments on the Boolean hypercube"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true, value_enum, default_value_t)]
    pub format: OutputFormat,
    /// Write the table here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Walsh-Hadamard transform of a function, or its inverse.
    Transform(commands::TransformArgs),
    /// Sensitivity, degree and Laplacian summary.
    Sens(commands::SensArgs),
    /// Best uniform error E_d by linear programming.
    Ed(commands::EdArgs),
    /// Approximate degree.
    Adeg(commands::AdegArgs),
    /// Univariate minimax error of a symmetric profile.
    Sym(commands::SymArgs),
    /// Kernel smoothing error against its bound.
    Kernel(commands::KernelArgs),
    /// Kravchuk polynomial roots or coefficients.
    Kravchuk(commands::KravchukArgs),
    /// Gauss rule for the binomial distribution.
    Quad(commands::QuadArgs),
    /// Hat packings and the counting certificate.
    Pack(commands::PackArgs),
    /// Fraction of Boolean functions with E_d >= 1.
    Census(commands::CensusArgs),
    /// Odd-harmonic projection.
    Harmonic(commands::HarmonicArgs),
    /// Tail norms of random Boolean functions.
    Randtail(commands::RandtailArgs),
    /// Jackson multipliers for degree d.
    Bounds(commands::BoundsArgs),
    /// Lorenz lower-bound witness search.
    Witness(commands::WitnessArgs),
    /// Run the reproduction suite.
    Repro(ReproArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReproArgs {
    /// TOML or JSON configuration; defaults cover every claim at full size.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Claims to run, by name or number, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
    /// Overrides the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Transform(_) => "transform",
            Command::Sens(_) => "sens",
            Command::Ed(_) => "ed",
            Command::Adeg(_) => "adeg",
            Command::Sym(_) => "sym",
            Command::Kernel(_) => "kernel",
            Command::Kravchuk(_) => "kravchuk",
            Command::Quad(_) => "quad",
            Command::Pack(_) => "pack",
            Command::Census(_) => "census",
            Command::Harmonic(_) => "harmonic",
            Command::Randtail(_) => "randtail",
            Command::Bounds(_) => "bounds",
            Command::Witness(_) => "witness",
            Command::Repro(_) => "repro",
        }
    }

    fn params(&self) -> serde_json::Value {
        let v = match self {
            Command::Transform(a) => serde_json::to_value(a),
            Command::Sens(a) => serde_json::to_value(a),
            Command::Ed(a) => serde_json::to_value(a),
            Command::Adeg(a) => serde_json::to_value(a),
            Command::Sym(a) => serde_json::to_value(a),
            Command::Kernel(a) => serde_json::to_value(a),
            Command::Kravchuk(a) => serde_json::to_value(a),
            Command::Quad(a) => serde_json::to_value(a),
            Command::Pack(a) => serde_json::to_value(a),
            Command::Census(a) => serde_json::to_value(a),
            Command::Harmonic(a) => serde_json::to_value(a),
            Command::Randtail(a) => serde_json::to_value(a),
            Command::Bounds(a) => serde_json::to_value(a),
            Command::Witness(a) => serde_json::to_value(a),
            Command::Repro(a) => serde_json::to_value(a),
        };
        v.unwrap_or(serde_json::Value::Null)
    }
}

/// Sets up the global pool from `HCJ_THREADS`. Later calls in the same
/// process keep the first pool.
pub fn configure_threads(value: Option<&str>) -> CliResult<()> {
    let Some(raw) = value else { return Ok(()) };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        CliError::Input(format!(
            "{THREADS_ENV} must be a positive integer, got {raw:?}"
        ))
    })?;
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let started = Instant::now();
    let (outcome, failures) = match &cli.command {
        Command::Transform(a) => (commands::transform(a)?, None),
        Command::Sens(a) => (commands::sens(a)?, None),
        Command::Ed(a) => (commands::ed(a)?, None),
        Command::Adeg(a) => (commands::adeg(a)?, None),
        Command::Sym(a) => (commands::sym(a)?, None),
        Command::Kernel(a) => (commands::kernel(a)?, None),
        Command::Kravchuk(a) => (commands::kravchuk_cmd(a)?, None),
        Command::Quad(a) => (commands::quad(a)?, None),
        Command::Pack(a) => (commands::pack(a)?, None),
        Command::Census(a) => (commands::census(a)?, None),
        Command::Harmonic(a) => (commands::harmonic(a)?, None),
        Command::Randtail(a) => (commands::randtail(a)?, None),
        Command::Bounds(a) => (commands::bounds(a)?, None),
        Command::Witness(a) => (commands::witness(a)?, None),
        Command::Repro(a) => {
            let mut cfg = match &a.config {
                Some(path) => ReproConfig::load(path)?,
                None => ReproConfig::default(),
            };
            if !a.only.is_empty() {
                cfg.claims = a.only.clone();
            }
            if let Some(seed) = a.seed {
                cfg.seed = seed;
            }
            let outcomes = repro::run_suite(&cfg)?;
            let failed: Vec<_> = outcomes.iter().filter(|o| !o.passed).collect();
            for o in &failed {
                writeln!(
                    stderr,
                    "claim {} ({}) failed: {} of {} cases, worst {:?} against {:?}: {}",
                    o.claim.number(),
                    o.claim.name(),
                    o.violations,
                    o.cases,
                    o.worst,
                    o.limit,
                    o.detail
                )?;
            }
            let failures = (!failed.is_empty()).then_some((failed.len(), outcomes.len()));
            let outcome = Outcome {
                table: repro::outcome_table(&outcomes),
                seed: Some(cfg.seed),
                random: true,
            };
            (outcome, failures)
        }
    };
    let mut manifest = RunManifest::new(
        cli.command.name(),
        cli.command.params(),
        outcome.seed,
        commands::rng_id(&outcome),
    );
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    let mut sink = Sink {
        format: cli.format,
        out: cli.out.clone(),
        stdout,
        stderr,
    };
    sink.emit(&outcome.table, &manifest)?;
    match failures {
        Some((failed, total)) => Err(CliError::ClaimsFailed { failed, total }),
        None => Ok(()),
    }
}

/// Runs the tool on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_INPUT
                }
            };
        }
    };
    let threads = std::env::var(THREADS_ENV).ok();
    let result = configure_threads(threads.as_deref()).and_then(|()| execute(&cli, stdout, stderr));
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "hcj: {e}");
            e.exit_code()
        }
    }
}
