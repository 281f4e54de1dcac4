//! `qcount` — seeded command-line harness for the approximate counting and
//! amplitude estimation simulator.
//!
//! Every subcommand accepts `--config FILE`, a flat `key = value` file whose
//! keys mirror the long flag names. Values from the file are applied first,
//! so flags on the command line override them.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qcount::harness::{
    failure_rate, lemma_check, run_amplitude, run_count, scaling_study, AmplitudeRun, CountRun,
    ScalingGrid,
};
use qcount::report::{write_rows, OutputFormat};
use qcount::{BackendKind, EstimatorConfig};

const EXIT_PARAMETER: u8 = 2;
const EXIT_VALIDATION_FAILED: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "qcount", version, about = "QFT-free quantum approximate counting simulator")]
#[command(args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate K for a universe of N items with K marked, once per trial.
    Count(CountArgs),
    /// Estimate an amplitude a ∈ (0, 1), once per trial.
    Amplitude(AmplitudeArgs),
    /// Run many trials and fail (exit 3) if the failure rate exceeds δ.
    Validate(ValidateArgs),
    /// Sample random brackets and check the rotation construction's bounds.
    LemmaCheck(LemmaArgs),
    /// Measure query counts over a (K, ε) grid and fit log-log slopes.
    ScalingStudy(ScalingArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Master seed; per-trial seeds are derived from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// `key = value` defaults; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        Ok(_) => Err("must be a positive number".into()),
        Err(e) => Err(e.to_string()),
    }
}

fn probability(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x < 1.0 => Ok(x),
        Ok(_) => Err("must lie strictly between 0 and 1".into()),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Args, Debug, Clone)]
struct Accuracy {
    #[arg(long, default_value_t = 0.1, value_parser = positive)]
    eps: f64,
    #[arg(long, default_value_t = 0.05, value_parser = probability)]
    delta: f64,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    #[arg(long, value_enum, default_value_t = Backend::Analytic)]
    backend: Backend,
    /// Divide the sample multipliers by 100 (rows are marked non-conforming).
    #[arg(long)]
    fast_constants: bool,
    /// Override the rough-search sample multiplier (default 1e5).
    #[arg(long, value_parser = positive)]
    step1_multiplier: Option<f64>,
    /// Override the refinement sample multiplier (default 1000).
    #[arg(long, value_parser = positive)]
    step2_multiplier: Option<f64>,
}

#[derive(Args, Debug)]
struct CountArgs {
    #[arg(long, default_value_t = 1 << 20)]
    n: u64,
    #[arg(long, default_value_t = 1024)]
    k: u64,
    #[command(flatten)]
    accuracy: Accuracy,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct AmplitudeArgs {
    #[arg(long, default_value_t = 0.5, value_parser = probability)]
    a: f64,
    #[command(flatten)]
    accuracy: Accuracy,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long, value_enum, default_value_t = Target::Count)]
    target: Target,
    #[arg(long, default_value_t = 1 << 20)]
    n: u64,
    #[arg(long, default_value_t = 1024)]
    k: u64,
    #[arg(long, default_value_t = 0.5, value_parser = probability)]
    a: f64,
    #[command(flatten)]
    accuracy: Accuracy,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct LemmaArgs {
    #[arg(long, default_value_t = 10_000)]
    sweeps: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ScalingArgs {
    #[arg(long, default_value_t = 1 << 20)]
    n: u64,
    /// Comma-separated marked counts.
    #[arg(long, value_delimiter = ',', default_value = "64,256,1024,4096")]
    ks: Vec<u64>,
    /// Comma-separated accuracy targets.
    #[arg(long = "eps-list", value_delimiter = ',', default_value = "0.2,0.1,0.05,0.025", value_parser = positive)]
    eps_list: Vec<f64>,
    #[arg(long, default_value_t = 0.05, value_parser = probability)]
    delta: f64,
    #[arg(long, default_value_t = 20)]
    trials_per_cell: u64,
    #[arg(long, value_enum, default_value_t = Backend::Analytic)]
    backend: Backend,
    #[arg(long)]
    fast_constants: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Format {
    Csv,
    JsonLines,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Backend {
    Analytic,
    Statevector,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Target {
    Count,
    Amplitude,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::JsonLines => OutputFormat::JsonLines,
        }
    }
}

impl From<Backend> for BackendKind {
    fn from(b: Backend) -> Self {
        match b {
            Backend::Analytic => BackendKind::Analytic,
            Backend::Statevector => BackendKind::Statevector,
        }
    }
}

impl Accuracy {
    fn config(&self) -> qcount::Result<EstimatorConfig> {
        let mut config = EstimatorConfig::new(self.eps, self.delta)?;
        if self.fast_constants {
            config = config.with_fast_constants();
        }
        if let Some(m) = self.step1_multiplier {
            config.step1_sample_multiplier = m;
        }
        if let Some(m) = self.step2_multiplier {
            config.step2_sample_multiplier = m;
        }
        Ok(config)
    }
}

/// Turns `key = value` lines into `--key value` arguments. Blank lines and
/// `#` comments are skipped; `true`/`false` toggle boolean flags.
fn config_args(text: &str, path: &Path) -> anyhow::Result<Vec<String>> {
    let mut args = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("{}:{}: expected key = value", path.display(), lineno + 1);
        };
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        let value = value.trim();
        if key == "config" {
            bail!("{}:{}: config files cannot nest", path.display(), lineno + 1);
        }
        match value {
            "true" => args.push(format!("--{key}")),
            "false" => {}
            _ => {
                args.push(format!("--{key}"));
                args.push(value.to_string());
            }
        }
    }
    Ok(args)
}

fn find_config(args: &[String]) -> Option<PathBuf> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

/// Splices config-file arguments right after the subcommand name so that
/// later command-line flags override them.
fn expand_args(args: Vec<String>) -> anyhow::Result<Vec<String>> {
    let Some(path) = find_config(&args) else {
        return Ok(args);
    };
    if args.len() < 2 || args[1].starts_with('-') {
        return Ok(args);
    }
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let injected = config_args(&text, &path)?;
    let mut out = args[..2].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[2..]);
    Ok(out)
}

fn open_output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

enum Outcome {
    Done,
    ValidationFailed,
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    match cli.command {
        Command::Count(args) => {
            let run = CountRun {
                n: args.n,
                k: args.k,
                config: args.accuracy.config()?,
                backend: args.accuracy.backend.into(),
                seed: args.common.seed,
                trials: args.accuracy.trials,
            };
            let rows = run_count(&run)?;
            write_rows(open_output(args.common.output.as_deref())?, &rows, args.common.format.into())?;
        }
        Command::Amplitude(args) => {
            let run = AmplitudeRun {
                a: args.a,
                config: args.accuracy.config()?,
                backend: args.accuracy.backend.into(),
                seed: args.common.seed,
                trials: args.accuracy.trials,
            };
            let rows = run_amplitude(&run)?;
            write_rows(open_output(args.common.output.as_deref())?, &rows, args.common.format.into())?;
        }
        Command::Validate(args) => {
            let config = args.accuracy.config()?;
            let backend = args.accuracy.backend.into();
            let (seed, trials) = (args.common.seed, args.accuracy.trials);
            let rows = match args.target {
                Target::Count => {
                    run_count(&CountRun { n: args.n, k: args.k, config, backend, seed, trials })?
                }
                Target::Amplitude => {
                    run_amplitude(&AmplitudeRun { a: args.a, config, backend, seed, trials })?
                }
            };
            let rate = failure_rate(&rows);
            if let Some(path) = args.common.output.as_deref() {
                write_rows(File::create(path)?, &rows, args.common.format.into())?;
            }
            let passed = rate <= args.accuracy.delta;
            println!(
                "trials={} failures={} failure_rate={rate:.6} delta={} {}",
                rows.len(),
                rows.iter().filter(|r| !r.success).count(),
                args.accuracy.delta,
                if passed { "PASS" } else { "FAIL" }
            );
            if !passed {
                return Ok(Outcome::ValidationFailed);
            }
        }
        Command::LemmaCheck(args) => {
            let report = lemma_check(args.sweeps, args.common.seed)?;
            eprintln!(
                "sweeps={} checks={} violations={}",
                report.sweeps,
                report.checks,
                report.violations.len()
            );
            write_rows(
                open_output(args.common.output.as_deref())?,
                &report.violations,
                args.common.format.into(),
            )?;
        }
        Command::ScalingStudy(args) => {
            let grid = ScalingGrid {
                n: args.n,
                ks: args.ks,
                epsilons: args.eps_list,
                delta: args.delta,
                backend: args.backend.into(),
                fast_constants: args.fast_constants,
            };
            let report = scaling_study(&grid, args.trials_per_cell, args.common.seed)?;
            // Fits go to stderr when the table itself is on stdout.
            let mut fits: Box<dyn Write> = match args.common.output {
                Some(_) => Box::new(io::stdout().lock()),
                None => Box::new(io::stderr().lock()),
            };
            let fmt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |x| format!("{x:.4}"));
            writeln!(fits, "epsilon_slope={}", fmt(report.epsilon_slope))?;
            writeln!(fits, "sqrt_nk_slope={}", fmt(report.sqrt_nk_slope))?;
            writeln!(fits, "envelope_c={}", fmt(report.envelope_c))?;
            drop(fits);
            write_rows(
                open_output(args.common.output.as_deref())?,
                &report.cells,
                args.common.format.into(),
            )?;
        }
    }
    Ok(Outcome::Done)
}

fn main() -> ExitCode {
    let args = match expand_args(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_PARAMETER);
        }
    };
    // clap exits with status 2 on usage errors.
    let cli = Cli::parse_from(args);
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::ValidationFailed) => ExitCode::from(EXIT_VALIDATION_FAILED),
        Err(e) => {
            eprintln!("error: {e:#}");
            let parameter = matches!(
                e.downcast_ref::<qcount::Error>(),
                Some(
                    qcount::Error::InvalidParameter(_)
                        | qcount::Error::EvenIterations(_)
                        | qcount::Error::DegenerateSubspace { .. }
                        | qcount::Error::DenseCapExceeded { .. }
                        | qcount::Error::RotationPrecondition(_)
                )
            );
            ExitCode::from(if parameter { EXIT_PARAMETER } else { 1 })
        }
    }
}
