//! Command-line front end: traces, error reports, and timing studies as
//! CSV/JSON for external plotting.
//!
//! Everything written out is a deterministic function of the flags (wall
//! clock fields aside), and every output embeds its configuration, so any
//! file can be regenerated from its own header. Reals are printed with 17
//! significant digits, which round-trips `f64` exactly.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sle::bench::{self, SweepAxis, SweepRow, DEFAULT_REPETITIONS};
use sle::driving::{IncrementKind, Partition, PartitionScheme};
use sle::slitmap::Discretization;
use sle::trace::{self, Algorithm, RunSpec};

#[derive(Parser)]
#[command(
    name = "sle",
    version,
    about = "Chordal SLE traces via conformal slit maps, with a block-accelerated evaluator",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one trace and write it as CSV
    Simulate(SimulateArgs),
    /// Run fast and baseline on the same driving and report their distance
    Compare(CompareArgs),
    /// Time baseline and fast over a grid of trace lengths and fit slopes
    Bench(BenchArgs),
    /// Time one algorithm over a grid of a single parameter
    Sweep(SweepArgs),
}

/// Flags shared by every subcommand; mirrors the fields of a run spec.
#[derive(Args)]
struct SpecArgs {
    /// SLE parameter kappa
    #[arg(long, default_value_t = 8.0 / 3.0, value_parser = parse_positive_real)]
    kappa: f64,

    /// Number of time steps (elementary maps)
    #[arg(long, short = 'N', default_value_t = 10_000, value_parser = parse_positive_int)]
    n_steps: usize,

    /// Index stride between computed trace points [default: n-steps/1000, at least 1]
    #[arg(long, short = 'd', value_parser = parse_positive_int)]
    stride: Option<usize>,

    /// Slit-map family used for each elementary step
    #[arg(long, value_enum, default_value_t = DiscretizationArg::Tilted)]
    discretization: DiscretizationArg,

    /// Time-partition scheme
    #[arg(long, value_enum, default_value_t = PartitionArg::Uniform)]
    partition: PartitionArg,

    /// Spacing exponent for the spaced partition
    #[arg(long, default_value_t = 0.75, value_parser = parse_positive_real)]
    nu: f64,

    /// Driving increment law
    #[arg(long, value_enum, default_value_t = IncrementsArg::Gaussian)]
    increments: IncrementsArg,

    /// PRNG seed; equal seeds reproduce outputs byte for byte
    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Trace algorithm
    #[arg(long, value_enum, default_value_t = AlgorithmArg::Fast)]
    algorithm: AlgorithmArg,

    /// Maps per block (fast algorithm) [default: 0.12*sqrt(N) rounded; coefficient 0.1 at kappa=6]
    #[arg(long, short = 'b', value_parser = parse_positive_int)]
    block_len: Option<usize>,

    /// Series truncation order (fast algorithm) [default: 12]
    #[arg(long, short = 'n', value_parser = parse_positive_int)]
    order: Option<usize>,

    /// Series gate factor L, or "inf" to disable the series path [default: eps^(-1/order)]
    #[arg(long, short = 'L', value_parser = parse_threshold)]
    threshold: Option<f64>,

    /// Error target from which the default gate factor is derived
    #[arg(long, default_value_t = 1e-6, value_parser = parse_eps)]
    eps: f64,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Output file (stdout when omitted)
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Output file for the JSON report (stdout when omitted)
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Comma-separated trace lengths to time
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    /// Timing repetitions per row; the median is reported
    #[arg(long, default_value_t = DEFAULT_REPETITIONS, value_parser = parse_positive_int)]
    repetitions: usize,
    /// Output file for the timing CSV (stdout when omitted)
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
    /// Output file for the JSON summary (stdout when omitted)
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// The parameter the sweep varies
    #[arg(long, value_enum)]
    axis: AxisArg,
    /// Comma-separated values for the swept parameter ("inf" allowed for threshold)
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    /// Timing repetitions per row; the median is reported
    #[arg(long, default_value_t = DEFAULT_REPETITIONS, value_parser = parse_positive_int)]
    repetitions: usize,
    /// Output file for the sweep CSV (stdout when omitted)
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
    /// Output file for the JSON summary (stdout when omitted)
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DiscretizationArg {
    Tilted,
    Vertical,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PartitionArg {
    Uniform,
    Spaced,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum IncrementsArg {
    Gaussian,
    Bernoulli,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Baseline,
    Fast,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AxisArg {
    NSteps,
    BlockLen,
    Order,
    Threshold,
}

impl From<AxisArg> for SweepAxis {
    fn from(a: AxisArg) -> SweepAxis {
        match a {
            AxisArg::NSteps => SweepAxis::NSteps,
            AxisArg::BlockLen => SweepAxis::BlockLen,
            AxisArg::Order => SweepAxis::Order,
            AxisArg::Threshold => SweepAxis::Threshold,
        }
    }
}

fn parse_threshold(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .parse()
        .map_err(|_| format!("`{s}` is not a number (or \"inf\")"))?;
    if v > 1.0 {
        Ok(v)
    } else {
        Err(format!("gate factor must exceed 1, got {s}"))
    }
}

fn parse_positive_int(s: &str) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|_| format!("`{s}` is not an integer"))?;
    if v >= 1 {
        Ok(v)
    } else {
        Err("must be at least 1".into())
    }
}

fn parse_positive_real(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be positive and finite, got {s}"))
    }
}

fn parse_eps(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("must lie in (0, 1), got {s}"))
    }
}

impl SpecArgs {
    fn to_spec(&self) -> RunSpec {
        RunSpec {
            kappa: self.kappa,
            n_steps: self.n_steps,
            stride: self.stride.unwrap_or_else(|| (self.n_steps / 1000).max(1)),
            discretization: match self.discretization {
                DiscretizationArg::Tilted => Discretization::Tilted,
                DiscretizationArg::Vertical => Discretization::Vertical,
            },
            scheme: match self.partition {
                PartitionArg::Uniform => PartitionScheme::Uniform,
                PartitionArg::Spaced => PartitionScheme::CapacitySpaced { nu: self.nu },
            },
            increments: match self.increments {
                IncrementsArg::Gaussian => IncrementKind::Gaussian,
                IncrementsArg::Bernoulli => IncrementKind::Bernoulli,
            },
            seed: self.seed,
            algorithm: match self.algorithm {
                AlgorithmArg::Baseline => Algorithm::Baseline,
                AlgorithmArg::Fast => Algorithm::Fast,
            },
            block_len: self.block_len,
            order: self.order,
            threshold: self.threshold,
            eps: self.eps,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

type CmdResult = Result<(), Box<dyn std::error::Error>>;

/// Serializes a real with 17 significant digits (exact f64 round-trip);
/// infinities print as "inf"/"-inf".
fn real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// The config echo as ordered key/value pairs, shared by CSV headers and
/// JSON reports. Keys irrelevant to the run (fast parameters of a baseline
/// run, nu of a uniform partition) are omitted, so two flag sets that mean
/// the same job echo identically.
fn echo_pairs(spec: &RunSpec) -> Vec<(&'static str, String)> {
    let mut pairs: Vec<(&'static str, String)> = vec![
        ("kappa", real(spec.kappa)),
        ("n_steps", spec.n_steps.to_string()),
        ("stride", spec.stride.to_string()),
        (
            "discretization",
            match spec.discretization {
                Discretization::Tilted => "tilted".into(),
                Discretization::Vertical => "vertical".into(),
            },
        ),
    ];
    match spec.scheme {
        PartitionScheme::Uniform => pairs.push(("partition", "uniform".into())),
        PartitionScheme::CapacitySpaced { nu } => {
            pairs.push(("partition", "spaced".into()));
            pairs.push(("nu", real(nu)));
        }
    }
    pairs.push((
        "increments",
        match spec.increments {
            IncrementKind::Gaussian => "gaussian".into(),
            IncrementKind::Bernoulli => "bernoulli".into(),
        },
    ));
    pairs.push(("seed", spec.seed.to_string()));
    match spec.algorithm {
        Algorithm::Baseline => pairs.push(("algorithm", "baseline".into())),
        Algorithm::Fast => {
            pairs.push(("algorithm", "fast".into()));
            pairs.push(("block_len", spec.resolved_block_len().to_string()));
            pairs.push(("order", spec.resolved_order().to_string()));
            pairs.push(("threshold", real(spec.resolved_threshold())));
        }
    }
    pairs.push(("eps", real(spec.eps)));
    pairs
}

fn echo_json(spec: &RunSpec) -> serde_json::Map<String, serde_json::Value> {
    echo_pairs(spec)
        .into_iter()
        .map(|(k, v)| (k.to_string(), serde_json::Value::String(v)))
        .collect()
}

fn write_output(path: Option<&PathBuf>, content: &str) -> CmdResult {
    match path {
        Some(p) => fs::write(p, content)
            .map_err(|e| format!("cannot write {}: {e}", p.display()))?,
        None => io::stdout().write_all(content.as_bytes())?,
    }
    Ok(())
}

/// An infinite gate factor means every evaluation takes the direct path, so
/// the job is a baseline job; resolving it as one here makes the output file
/// (header included) byte-identical to an explicit baseline run.
fn resolve_sentinel(mut spec: RunSpec) -> RunSpec {
    if spec.algorithm == Algorithm::Fast && spec.threshold.is_some_and(f64::is_infinite) {
        spec.algorithm = Algorithm::Baseline;
        spec.block_len = None;
        spec.order = None;
        spec.threshold = None;
    }
    spec
}

fn cmd_simulate(args: SimulateArgs) -> CmdResult {
    let spec = resolve_sentinel(args.spec.to_spec());
    let result = trace::run(&spec)?;
    let partition = Partition::new(spec.n_steps, spec.scheme)?;
    let times = partition.times();

    let mut out = String::new();
    out.push_str("# command=simulate\n");
    for (k, v) in echo_pairs(&spec) {
        let _ = writeln!(out, "# {k}={v}");
    }
    out.push_str("k,t,re,im\n");
    for (&k, z) in result.indices().iter().zip(result.points()) {
        let _ = writeln!(out, "{k},{},{},{}", real(times[k]), real(z.re), real(z.im));
    }
    write_output(args.output.as_ref(), &out)
}

#[derive(Serialize)]
struct CompareReport {
    command: &'static str,
    seed: u64,
    points: usize,
    mean_error: f64,
    max_error: f64,
    fast: serde_json::Map<String, serde_json::Value>,
    baseline: serde_json::Map<String, serde_json::Value>,
}

fn cmd_compare(args: CompareArgs) -> CmdResult {
    let base = args.spec.to_spec();
    let mut fast = base.clone();
    fast.algorithm = Algorithm::Fast;
    let mut slow = base;
    slow.algorithm = Algorithm::Baseline;
    slow.block_len = None;
    slow.order = None;
    slow.threshold = None;

    let fast_trace = trace::run(&fast)?;
    let slow_trace = trace::run(&slow)?;
    let report = CompareReport {
        command: "compare",
        seed: fast.seed,
        points: fast_trace.len(),
        mean_error: trace::error_between(&fast_trace, &slow_trace)?,
        max_error: trace::max_error_between(&fast_trace, &slow_trace)?,
        fast: echo_json(&fast),
        baseline: echo_json(&slow),
    };
    let mut body = serde_json::to_string_pretty(&report)?;
    body.push('\n');
    write_output(args.output.as_ref(), &body)
}

/// One CSV line per sweep row: swept value, median seconds per point, mean
/// distance to the same-seed baseline (empty for baseline rows), repetition
/// count, seed.
fn sweep_csv_rows(out: &mut String, rows: &[SweepRow], value_of: impl Fn(&SweepRow) -> f64) {
    for row in rows {
        let err = row.error.map(real).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{err},{},{}",
            real(value_of(row)),
            real(row.time_per_point),
            row.samples,
            row.spec.seed
        );
    }
}

fn slope_of(rows: &[SweepRow], value_of: impl Fn(&SweepRow) -> f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (value_of(r), r.time_per_point)).collect();
    bench::loglog_slope(&pts).ok()
}

#[derive(Serialize)]
struct BenchSummary {
    command: &'static str,
    values: Vec<f64>,
    baseline_slope: Option<f64>,
    fast_slope: Option<f64>,
    /// Baseline over fast time per point at the largest trace length.
    speedup_at_largest: f64,
    baseline_time_per_point: Vec<f64>,
    fast_time_per_point: Vec<f64>,
    fast_error: Vec<f64>,
    config: serde_json::Map<String, serde_json::Value>,
}

fn cmd_bench(args: BenchArgs) -> CmdResult {
    let base = args.spec.to_spec();
    let mut slow = base.clone();
    slow.algorithm = Algorithm::Baseline;
    let mut fast = base.clone();
    fast.algorithm = Algorithm::Fast;

    let slow_rows = bench::sweep(SweepAxis::NSteps, &args.values, &slow, args.repetitions)?;
    let fast_rows = bench::sweep(SweepAxis::NSteps, &args.values, &fast, args.repetitions)?;

    let mut out = String::new();
    out.push_str("# command=bench\n");
    for (k, v) in echo_pairs(&base) {
        let _ = writeln!(out, "# {k}={v}");
    }
    let _ = writeln!(out, "# repetitions={}", args.repetitions);
    out.push_str("algorithm,n_steps,time_per_point,error,samples,seed\n");
    for (name, rows) in [("baseline", &slow_rows), ("fast", &fast_rows)] {
        for row in rows {
            let err = row.error.map(real).unwrap_or_default();
            let _ = writeln!(
                out,
                "{name},{},{},{err},{},{}",
                row.spec.n_steps,
                real(row.time_per_point),
                row.samples,
                row.spec.seed
            );
        }
    }
    write_output(args.output.as_ref(), &out)?;

    let summary = BenchSummary {
        command: "bench",
        values: args.values.clone(),
        baseline_slope: slope_of(&slow_rows, |r| r.spec.n_steps as f64),
        fast_slope: slope_of(&fast_rows, |r| r.spec.n_steps as f64),
        speedup_at_largest: slow_rows.last().map(|r| r.time_per_point).unwrap_or(f64::NAN)
            / fast_rows.last().map(|r| r.time_per_point).unwrap_or(f64::NAN),
        baseline_time_per_point: slow_rows.iter().map(|r| r.time_per_point).collect(),
        fast_time_per_point: fast_rows.iter().map(|r| r.time_per_point).collect(),
        fast_error: fast_rows.iter().filter_map(|r| r.error).collect(),
        config: echo_json(&base),
    };
    let mut body = serde_json::to_string_pretty(&summary)?;
    body.push('\n');
    write_output(args.summary.as_ref(), &body)
}

#[derive(Serialize)]
struct SweepRowJson {
    #[serde(serialize_with = "ser_real")]
    value: f64,
    time_per_point: f64,
    error: Option<f64>,
    samples: usize,
    seed: u64,
}

/// serde_json turns non-finite floats into null; spell them out instead.
fn ser_real<S: serde::Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str(&format!("{v}"))
    }
}

#[derive(Serialize)]
struct SweepSummary {
    command: &'static str,
    axis: &'static str,
    time_slope: Option<f64>,
    error_slope: Option<f64>,
    rows: Vec<SweepRowJson>,
    config: serde_json::Map<String, serde_json::Value>,
}

fn cmd_sweep(args: SweepArgs) -> CmdResult {
    let base = args.spec.to_spec();
    let axis = SweepAxis::from(args.axis);
    let rows = bench::sweep(axis, &args.values, &base, args.repetitions)?;
    let axis_name = match axis {
        SweepAxis::NSteps => "n_steps",
        SweepAxis::BlockLen => "block_len",
        SweepAxis::Order => "order",
        SweepAxis::Threshold => "threshold",
    };
    let value_of = |row: &SweepRow| match axis {
        SweepAxis::NSteps => row.spec.n_steps as f64,
        SweepAxis::BlockLen => row.spec.resolved_block_len() as f64,
        SweepAxis::Order => row.spec.resolved_order() as f64,
        SweepAxis::Threshold => row.spec.resolved_threshold(),
    };

    let mut out = String::new();
    out.push_str("# command=sweep\n");
    let _ = writeln!(out, "# axis={axis_name}");
    for (k, v) in echo_pairs(&base) {
        let _ = writeln!(out, "# {k}={v}");
    }
    let _ = writeln!(out, "# repetitions={}", args.repetitions);
    out.push_str("value,time_per_point,error,samples,seed\n");
    sweep_csv_rows(&mut out, &rows, value_of);
    write_output(args.output.as_ref(), &out)?;

    let err_points: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.error.map(|e| (value_of(r), e)))
        .collect();
    let error_slope = if err_points.len() == rows.len() {
        bench::loglog_slope(&err_points).ok()
    } else {
        None
    };
    let summary = SweepSummary {
        command: "sweep",
        axis: axis_name,
        time_slope: slope_of(&rows, value_of),
        error_slope,
        rows: rows
            .iter()
            .map(|r| SweepRowJson {
                value: value_of(r),
                time_per_point: r.time_per_point,
                error: r.error,
                samples: r.samples,
                seed: r.spec.seed,
            })
            .collect(),
        config: echo_json(&base),
    };
    let mut body = serde_json::to_string_pretty(&summary)?;
    body.push('\n');
    write_output(args.summary.as_ref(), &body)
}
