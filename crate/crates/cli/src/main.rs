//! `dcp`: simulate data, evaluate one conformal method, or rank several.
//!
//! Exit codes: 0 success, 2 usage, 3 data or I/O, 4 numerical failure.

mod io;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dcp::eval::{holdout_eval, rolling_ts_eval, CoverageReport, Method, MethodConfig};
use dcp::grid::DEFAULT_TAU_TRIM;
use dcp::sim::{generate, Dgp, DgpKind};
use dcp::{Alpha, Dataset, TauGrid};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Io(String),
    Numeric(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) | CliError::Io(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Data(m) => write!(f, "data: {m}"),
            CliError::Io(m) => write!(f, "i/o: {m}"),
            CliError::Numeric(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<dcp::Error> for CliError {
    fn from(e: dcp::Error) -> Self {
        match e {
            dcp::Error::InvalidArgument(m) => CliError::Data(m),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "dcp", version, about = "Distributional conformal prediction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a synthetic dataset and write it as CSV.
    Simulate(SimulateArgs),
    /// Evaluate one method on a CSV dataset.
    Run(RunArgs),
    /// Evaluate several methods and rank them by average length.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum DgpName {
    LocationScale,
    SkewedExponential,
    ArGarchLike,
}

impl From<DgpName> for DgpKind {
    fn from(d: DgpName) -> Self {
        match d {
            DgpName::LocationScale => DgpKind::LocationScale,
            DgpName::SkewedExponential => DgpKind::SkewedExponential,
            DgpName::ArGarchLike => DgpKind::ArGarchLike,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    dgp: DgpName,
    /// Number of observations.
    #[arg(value_name = "T")]
    t: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args, Clone, Serialize)]
struct CommonArgs {
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Fraction of training rows used for fitting; the rest calibrate.
    #[arg(long, default_value_t = 0.5)]
    split_frac: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of quantile bins of x1 in the conditional coverage table.
    #[arg(long, default_value_t = 10)]
    bins: usize,
    #[arg(long, default_value_t = dcp::grid::DEFAULT_TAU_POINTS)]
    tau_points: usize,
    #[arg(long, default_value_t = dcp::grid::DEFAULT_TRIAL_POINTS)]
    trial_points: usize,
    /// Rows are in time order: use the rolling protocol.
    #[arg(long)]
    time_ordered: bool,
    #[arg(long)]
    input: PathBuf,
    /// JSON report path; per-bin table goes next to it as `<stem>.bins.csv`.
    /// Without it the JSON is printed.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse::<Method>().map_err(|e| e.to_string())
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value = "dcp-qr", value_parser = parse_method)]
    method: Method,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated method names.
    #[arg(long, required = true, value_delimiter = ',', value_parser = parse_method)]
    methods: Vec<Method>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Serialize)]
struct RunOutput {
    #[serde(flatten)]
    report: CoverageReport,
    seed: u64,
    config_echo: ConfigEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    exercises: Option<Vec<CoverageReport>>,
}

#[derive(Serialize)]
struct BenchOutput {
    alpha: f64,
    seed: u64,
    config_echo: ConfigEcho,
    leaderboard: Vec<CoverageReport>,
}

#[derive(Serialize)]
struct ConfigEcho {
    methods: Vec<Method>,
    #[serde(flatten)]
    common: CommonArgs,
}

fn method_config(method: Method, c: &CommonArgs) -> Result<MethodConfig, CliError> {
    let alpha = Alpha::new(c.alpha).map_err(|e| CliError::Usage(e.to_string()))?;
    if !(c.split_frac > 0.0 && c.split_frac < 1.0) {
        return Err(CliError::Usage(format!(
            "--split-frac must lie in (0, 1), got {}",
            c.split_frac
        )));
    }
    if c.bins == 0 {
        return Err(CliError::Usage("--bins must be positive".into()));
    }
    if c.trial_points < 2 {
        return Err(CliError::Usage("--trial-points must be at least 2".into()));
    }
    let mut cfg = MethodConfig::new(method, alpha);
    cfg.split_frac = c.split_frac;
    cfg.seed = c.seed;
    cfg.tau_grid =
        TauGrid::new(c.tau_points, DEFAULT_TAU_TRIM).map_err(|e| CliError::Usage(e.to_string()))?;
    cfg.trial_points = c.trial_points;
    Ok(cfg)
}

/// Holdout report, or the pooled rolling report with its exercises.
fn evaluate(
    cfg: &MethodConfig,
    data: &Dataset,
    c: &CommonArgs,
) -> Result<(CoverageReport, Option<Vec<CoverageReport>>), CliError> {
    if c.time_ordered {
        let r = rolling_ts_eval(data, cfg, c.bins)?;
        Ok((r.pooled, Some(r.exercises)))
    } else {
        Ok((holdout_eval(data, cfg, c.bins)?, None))
    }
}

fn bins_csv(rows: &[(&str, String, &CoverageReport)]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(["method", "exercise", "bin", "lo", "hi", "coverage", "length", "n"])
        .map_err(io)?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
    for (method, exercise, report) in rows {
        for (k, b) in report.bins.iter().enumerate() {
            w.write_record([
                method.to_string(),
                exercise.clone(),
                (k + 1).to_string(),
                b.lo.to_string(),
                b.hi.to_string(),
                opt(b.coverage),
                opt(b.length),
                b.n.to_string(),
            ])
            .map_err(io)?;
        }
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

fn emit(json: &impl Serialize, bins: &[(&str, String, &CoverageReport)], output: Option<&Path>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(json).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    match output {
        Some(path) => {
            io::write_atomic(path, text.as_bytes())?;
            io::write_atomic(&path.with_extension("bins.csv"), &bins_csv(bins)?)
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn exercise_rows<'a>(
    method: &'a str,
    pooled: &'a CoverageReport,
    exercises: Option<&'a Vec<CoverageReport>>,
) -> Vec<(&'a str, String, &'a CoverageReport)> {
    match exercises {
        None => vec![(method, "all".into(), pooled)],
        Some(ex) => std::iter::once((method, "pooled".to_string(), pooled))
            .chain(ex.iter().enumerate().map(|(i, r)| (method, (i + 1).to_string(), r)))
            .collect(),
    }
}

fn simulate(a: SimulateArgs) -> Result<(), CliError> {
    if a.t < 2 {
        return Err(CliError::Usage(format!("T must be at least 2, got {}", a.t)));
    }
    let data = generate(&Dgp::new(a.dgp.into(), a.seed), a.t)?;
    io::write_atomic(&a.output, &io::dataset_csv(&data)?)
}

fn run(a: RunArgs) -> Result<(), CliError> {
    let cfg = method_config(a.method, &a.common)?;
    let data = io::read_dataset_file(&a.common.input, a.common.time_ordered)?;
    let (report, exercises) = evaluate(&cfg, &data, &a.common)?;
    let out = RunOutput {
        report,
        seed: a.common.seed,
        config_echo: ConfigEcho {
            methods: vec![a.method],
            common: a.common.clone(),
        },
        exercises,
    };
    let rows = exercise_rows(a.method.name(), &out.report, out.exercises.as_ref());
    emit(&out, &rows, a.common.output.as_deref())
}

fn bench(a: BenchArgs) -> Result<(), CliError> {
    if a.methods.is_empty() {
        return Err(CliError::Usage("--methods needs at least one method".into()));
    }
    let configs = a
        .methods
        .iter()
        .map(|m| method_config(*m, &a.common))
        .collect::<Result<Vec<_>, _>>()?;
    let data = io::read_dataset_file(&a.common.input, a.common.time_ordered)?;
    let mut reports = configs
        .par_iter()
        .map(|cfg| evaluate(cfg, &data, &a.common).map(|(r, _)| r))
        .collect::<Result<Vec<_>, _>>()?;
    // Shortest first; methods without a finite average length go last.
    reports.sort_by(|x, y| {
        let key = |r: &CoverageReport| r.avg_length.unwrap_or(f64::INFINITY);
        key(x).total_cmp(&key(y))
    });
    let out = BenchOutput {
        alpha: a.common.alpha,
        seed: a.common.seed,
        config_echo: ConfigEcho {
            methods: a.methods.clone(),
            common: a.common.clone(),
        },
        leaderboard: reports,
    };
    let rows: Vec<_> = out
        .leaderboard
        .iter()
        .map(|r| (r.method.as_str(), "all".to_string(), r))
        .collect();
    emit(&out, &rows, a.common.output.as_deref())
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("DCP_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("DCP_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Run(a) => run(a),
        Command::Bench(a) => bench(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
