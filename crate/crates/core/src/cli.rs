//! Command-line front end: argument parsing, CSV/JSON ingestion and atomic
//! output writing. [`run`] is what the `flatclust` binary calls.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bayes::{bayes_update_all_with, uniform_measure, LabeledDataset, Likelihood, ParamMeasure};
use crate::clustering::{functor_by_name, HyperparamPoint};
use crate::error::{Error, Result};
use crate::flatten::{flatten_detailed, Mode};
use crate::harness::{
    benchmark_flatten_vs_fixed, consistency_experiment, posterior_histogram, BenchConfig, BlobConfig,
    ConsistencyConfig,
};
use crate::metric::MetricSpace;
use crate::partition::{adjusted_rand_score, Partition};

/// Environment variable capping the worker pool size (0 or unset = automatic).
pub const THREADS_ENV: &str = "FLATCLUST_THREADS";

#[derive(Debug, Parser)]
#[command(name = "flatclust", version, about = "Flat clustering from multiparameter hierarchical clusterings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cluster a point set at one hyperparameter value.
    Cluster(ClusterArgs),
    /// Flatten the clusterings over a hyperparameter measure into one partition.
    Flatten(FlattenArgs),
    /// Learn a posterior hyperparameter measure from labeled datasets.
    Learn(LearnArgs),
    /// Adjusted Rand score of a predicted partition against labels.
    Eval(EvalArgs),
    /// Posterior consistency experiment on random point sets.
    Consistency(ConsistencyArgs),
    /// Flatten versus fixed-hyperparameter benchmark on Gaussian blobs.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Point-cloud CSV (one row per point, optional header).
    #[arg(long, value_name = "CSV")]
    points: PathBuf,
    /// Read --points as a square distance matrix instead.
    #[arg(long)]
    matrix: bool,
}

#[derive(Debug, Args)]
struct ClusterArgs {
    /// single-linkage or robust-single-linkage.
    #[arg(long)]
    functor: String,
    /// Hyperparameter coordinates, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true, required = true)]
    a: Vec<f64>,
    #[command(flatten)]
    input: InputArgs,
    /// Partition JSON output (stdout when omitted).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Sampling,
    Particle,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Sampling => Mode::Sampling,
            ModeArg::Particle => Mode::Particle,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LikelihoodArg {
    RandIndex,
    ExactMatch,
}

impl From<LikelihoodArg> for Likelihood {
    fn from(l: LikelihoodArg) -> Self {
        match l {
            LikelihoodArg::RandIndex => Likelihood::RandIndex,
            LikelihoodArg::ExactMatch => Likelihood::ExactMatch,
        }
    }
}

#[derive(Debug, Args)]
struct FlattenArgs {
    #[arg(long)]
    functor: String,
    /// Hyperparameter measure JSON.
    #[arg(long, value_name = "FILE")]
    measure: PathBuf,
    #[command(flatten)]
    input: InputArgs,
    /// Number of hyperparameter draws (sampling mode).
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Sampling)]
    mode: ModeArg,
    /// Partition JSON output (stdout when omitted).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Also write the selection program as JSON.
    #[arg(long, value_name = "FILE")]
    emit_bip: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LearnArgs {
    #[arg(long)]
    functor: String,
    /// Prior measure JSON, or `uniform:N` for N uniformly drawn particles.
    #[arg(long, value_name = "FILE|uniform:N")]
    prior: String,
    /// Directory of NAME.points.csv / NAME.labels.csv pairs, used in name order.
    #[arg(long, value_name = "DIR")]
    data: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = LikelihoodArg::RandIndex)]
    likelihood: LikelihoodArg,
    /// Posterior measure JSON output (stdout when omitted).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Effective sample size after each update, as CSV (step,ess).
    #[arg(long, value_name = "FILE")]
    ess_log: Option<PathBuf>,
    #[command(flatten)]
    hist: HistArgs,
}

#[derive(Debug, Args)]
struct HistArgs {
    /// Posterior histogram CSV (bin_lo,bin_hi,mass).
    #[arg(long, value_name = "FILE")]
    histogram: Option<PathBuf>,
    /// Hyperparameter axis for the histogram.
    #[arg(long, default_value_t = 0)]
    hist_axis: usize,
    #[arg(long, default_value_t = 20)]
    bins: usize,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Predicted partition: partition JSON, or a labels CSV if it ends in .csv.
    #[arg(long, value_name = "FILE")]
    pred: PathBuf,
    /// Ground-truth labels CSV, one integer per row.
    #[arg(long, value_name = "CSV")]
    labels: PathBuf,
    /// Write {"ars": value} here.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConsistencyArgs {
    #[arg(long, default_value = "single-linkage")]
    functor: String,
    /// Points per dataset.
    #[arg(long, default_value_t = 6)]
    k: usize,
    /// Sampling region as lo:hi per dimension, comma separated.
    #[arg(long, default_value = "0:1,0:1")]
    region: String,
    #[arg(long, default_value_t = 50)]
    updates: usize,
    #[arg(long, default_value_t = 400)]
    particles: usize,
    #[arg(long, default_value_t = 40)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report JSON output.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[command(flatten)]
    hist: HistArgs,
    /// Trial whose final posterior goes into --histogram.
    #[arg(long, default_value_t = 0)]
    hist_trial: usize,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, default_value = "single-linkage")]
    functor: String,
    #[arg(long, default_value_t = 3)]
    blobs: usize,
    #[arg(long, default_value_t = 10)]
    per_blob: usize,
    /// Per-coordinate standard deviation of each blob.
    #[arg(long, default_value_t = 0.05)]
    std: f64,
    /// Radius of the circle carrying the blob centers.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Number of fixed hyperparameter values compared against.
    #[arg(long, default_value_t = 20)]
    grid: usize,
    /// Particles in the uniform prior.
    #[arg(long, default_value_t = 200)]
    particles: usize,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Particle)]
    mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report JSON output.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

/// Parses `argv` (program name first) and runs the command. Returns the exit
/// status: 0 on success, 1 on domain errors (one JSON line on `stderr`), 2 on
/// usage errors.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
                2
            } else {
                let _ = stdout.write_all(text.as_bytes());
                0
            };
        }
    };
    match configure_threads().and_then(|()| dispatch(cli.command, stdout)) {
        Ok(()) => 0,
        Err(e) => {
            let line = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            let _ = writeln!(stderr, "{line}");
            1
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("{THREADS_ENV}={raw:?} is not a thread count")))?;
    if threads > 0 {
        // Fails only if the pool already exists, e.g. on a second in-process run.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    Ok(())
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<()> {
    match command {
        Command::Cluster(args) => cluster(args, stdout),
        Command::Flatten(args) => flatten_cmd(args, stdout),
        Command::Learn(args) => learn(args, stdout),
        Command::Eval(args) => eval(args, stdout),
        Command::Consistency(args) => consistency(args, stdout),
        Command::Bench(args) => bench(args, stdout),
    }
}

fn cluster(args: ClusterArgs, stdout: &mut dyn Write) -> Result<()> {
    let functor = functor_by_name(&args.functor)?;
    let a = HyperparamPoint::new(args.a);
    functor.space().check(&a)?;
    let space = read_input(&args.input)?;
    let partition = functor.evaluate(&space, &a)?;
    emit_json(&partition, args.out.as_deref(), stdout)
}

fn flatten_cmd(args: FlattenArgs, stdout: &mut dyn Write) -> Result<()> {
    let functor = functor_by_name(&args.functor)?;
    let measure: ParamMeasure = read_json(&args.measure)?;
    check_measure_space(&measure, functor.space().dims())?;
    let space = read_input(&args.input)?;
    let out = flatten_detailed(functor.as_ref(), &measure, &space, args.samples, args.seed, args.mode.into())?;
    if let Some(path) = &args.emit_bip {
        write_atomic(path, &to_json(&out.program)?)?;
    }
    emit_json(&out.partition, args.out.as_deref(), stdout)
}

fn check_measure_space(measure: &ParamMeasure, dims: usize) -> Result<()> {
    if measure.space().dims() != dims {
        return Err(Error::DimensionMismatch {
            context: "measure space versus functor",
            expected: dims,
            found: measure.space().dims(),
        });
    }
    Ok(())
}

fn learn(args: LearnArgs, stdout: &mut dyn Write) -> Result<()> {
    let functor = functor_by_name(&args.functor)?;
    let prior = match args.prior.strip_prefix("uniform:") {
        Some(n) => {
            let n: usize = n
                .parse()
                .map_err(|_| Error::Parse(format!("bad particle count in --prior {:?}", args.prior)))?;
            uniform_measure(functor.space(), n, args.seed)?
        }
        None => {
            let m: ParamMeasure = read_json(Path::new(&args.prior))?;
            check_measure_space(&m, functor.space().dims())?;
            m
        }
    };
    let data = read_dataset_dir(&args.data)?;
    let posterior = bayes_update_all_with(&prior, functor.as_ref(), &data, args.likelihood.into())?;
    if let Some(path) = &args.ess_log {
        let mut csv = String::from("step,ess\n");
        for (i, e) in posterior.ess_trace.iter().enumerate() {
            csv.push_str(&format!("{},{e:?}\n", i + 1));
        }
        write_atomic(path, &csv)?;
    }
    write_histogram(&posterior.measure, &args.hist)?;
    emit_json(&posterior.measure, args.out.as_deref(), stdout)
}

fn write_histogram(measure: &ParamMeasure, hist: &HistArgs) -> Result<()> {
    if let Some(path) = &hist.histogram {
        let h = posterior_histogram(measure, hist.hist_axis, hist.bins)?;
        write_atomic(path, &h.to_csv())?;
    }
    Ok(())
}

fn eval(args: EvalArgs, stdout: &mut dyn Write) -> Result<()> {
    let pred: Partition = if args.pred.extension().is_some_and(|e| e == "csv") {
        Partition::from_labels(&read_labels_csv(&args.pred)?)
    } else {
        read_json(&args.pred)?
    };
    let truth = Partition::from_labels(&read_labels_csv(&args.labels)?);
    // `+ 0.0` turns a negative zero into zero so it prints as 0.000000.
    let ars = adjusted_rand_score(&pred, &truth)? + 0.0;
    writeln!(stdout, "{ars:.6}")?;
    if let Some(path) = &args.out {
        write_atomic(path, &to_json(&serde_json::json!({ "ars": ars }))?)?;
    }
    Ok(())
}

fn parse_region(text: &str) -> Result<Vec<(f64, f64)>> {
    text.split(',')
        .map(|part| {
            let (lo, hi) = part
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("region entry {part:?} is not lo:hi")))?;
            let num = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("region bound {s:?} is not a number")))
            };
            Ok((num(lo)?, num(hi)?))
        })
        .collect()
}

fn consistency(args: ConsistencyArgs, stdout: &mut dyn Write) -> Result<()> {
    let cfg = ConsistencyConfig {
        region: parse_region(&args.region)?,
        k: args.k,
        n_updates: args.updates,
        n_particles: args.particles,
        functor: args.functor,
        seed: args.seed,
        trials: args.trials,
    };
    if args.hist.histogram.is_some() && args.hist_trial >= cfg.trials {
        return Err(Error::IndexOutOfRange {
            index: args.hist_trial,
            size: cfg.trials,
        });
    }
    let report = consistency_experiment(&cfg)?;
    if let Some(path) = &args.out {
        write_atomic(path, &to_json(&report)?)?;
    }
    write_histogram(&report.posteriors[args.hist_trial.min(report.posteriors.len() - 1)], &args.hist)?;
    stdout.write_all(report.to_table().as_bytes())?;
    Ok(())
}

fn bench(args: BenchArgs, stdout: &mut dyn Write) -> Result<()> {
    let functor = functor_by_name(&args.functor)?;
    let prior = uniform_measure(functor.space(), args.particles, args.seed)?;
    let cfg = BenchConfig {
        blobs: BlobConfig {
            n_blobs: args.blobs,
            per_blob: args.per_blob,
            std: args.std,
            radius: args.radius,
        },
        grid_size: args.grid,
        n_samples: args.samples,
        mode: args.mode.into(),
        seed: args.seed,
    };
    let report = benchmark_flatten_vs_fixed(functor.as_ref(), &prior, &cfg)?;
    if let Some(path) = &args.out {
        write_atomic(path, &to_json(&report)?)?;
    }
    stdout.write_all(report.to_table().as_bytes())?;
    if !report.flatten_beats_median() {
        writeln!(stdout, "warning: flatten ars is below the median grid ars")?;
    }
    Ok(())
}

fn read_input(input: &InputArgs) -> Result<MetricSpace> {
    let rows = read_numeric_csv(&input.points)?;
    if input.matrix {
        MetricSpace::from_distance_matrix(&rows, true)
    } else {
        MetricSpace::from_point_cloud(&rows)
    }
}

fn read_records(path: &Path) -> Result<Vec<Vec<String>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        rows.push(record.iter().map(str::to_string).collect());
    }
    Ok(rows)
}

/// Parses every row with `parse`; a first row that does not parse is taken
/// as a header.
fn parse_rows<T>(path: &Path, parse: impl Fn(&str) -> Option<T>) -> Result<Vec<Vec<T>>> {
    let records = read_records(path)?;
    let mut out = Vec::with_capacity(records.len());
    for (i, rec) in records.iter().enumerate() {
        let parsed: Option<Vec<T>> = rec.iter().map(|f| parse(f)).collect();
        match parsed {
            Some(row) => out.push(row),
            None if i == 0 => {}
            None => {
                return Err(Error::Parse(format!(
                    "{}: row {} has a non-numeric field",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(out)
}

/// Numeric CSV rows, with an optional header line.
pub fn read_numeric_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    parse_rows(path, |f| f.parse::<f64>().ok())
}

/// One integer label per row, with an optional header line.
pub fn read_labels_csv(path: &Path) -> Result<Vec<i64>> {
    parse_rows(path, |f| f.parse::<i64>().ok())?
        .into_iter()
        .enumerate()
        .map(|(i, row)| match row.as_slice() {
            [label] => Ok(*label),
            _ => Err(Error::Parse(format!(
                "{}: label row {} must have exactly one column",
                path.display(),
                i + 1
            ))),
        })
        .collect()
}

/// Reads `NAME.points.csv` / `NAME.labels.csv` pairs from `dir`, ordered by
/// `NAME`.
pub fn read_dataset_dir(dir: &Path) -> Result<LabeledDataset> {
    let mut names = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))? {
        let file_name = entry?.file_name();
        if let Some(name) = file_name.to_str().and_then(|n| n.strip_suffix(".points.csv")) {
            names.push(name.to_string());
        }
    }
    names.sort();
    let mut items = Vec::with_capacity(names.len());
    for name in names {
        let points = read_numeric_csv(&dir.join(format!("{name}.points.csv")))?;
        let labels_path = dir.join(format!("{name}.labels.csv"));
        if !labels_path.exists() {
            return Err(Error::Io(format!("missing {}", labels_path.display())));
        }
        let labels = read_labels_csv(&labels_path)?;
        if labels.len() != points.len() {
            return Err(Error::GroundSizeMismatch {
                left: points.len(),
                right: labels.len(),
            });
        }
        items.push((MetricSpace::from_point_cloud(&points)?, Partition::from_labels(&labels)));
    }
    LabeledDataset::new(items)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    let text = to_json(value)?;
    match out {
        Some(path) => write_atomic(path, &text),
        None => Ok(stdout.write_all(text.as_bytes())?),
    }
}

/// Writes `path.tmp` then renames it over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(|e| Error::Io(format!("{}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("flatclust").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn region_parsing() {
        assert_eq!(parse_region("0:1,-2:3.5").unwrap(), vec![(0.0, 1.0), (-2.0, 3.5)]);
        assert!(parse_region("0-1").is_err());
        assert!(parse_region("a:1").is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        let (code, _, err) = run_str(&["cluster", "--a", "0.5"]);
        assert_eq!(code, 2);
        assert!(err.contains("--functor") || err.contains("required"));
        assert_eq!(run_str(&["frobnicate"]).0, 2);
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_str(&["flatten", "--help"]);
        assert_eq!(code, 0);
        for flag in ["--functor", "--measure", "--samples", "--seed", "--mode", "--out", "--emit-bip", "--matrix"] {
            assert!(out.contains(flag), "{flag} missing from help");
        }
    }

    #[test]
    fn domain_error_is_one_json_line() {
        let (code, _, err) = run_str(&["cluster", "--functor", "nope", "--a", "0.5", "--points", "missing.csv"]);
        assert_eq!(code, 1);
        assert_eq!(err.lines().count(), 1);
        let v: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
        assert_eq!(v["error"], "unknown");
    }
}
