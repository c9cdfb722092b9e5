//! Experiment harness for one-pass stream diversification.
//!
//! Subcommands: `run` samples segments from a dataset and emits one CSV
//! record per selection experiment; `bounds` prints the analytical success
//! bounds and the deviation bound for a configuration; `montecarlo`
//! validates the stopping rule by simulation; `bench` wall-clocks the
//! one-pass method against the greedy max-min baseline over growing
//! datasets.
//!
//! Every flag can also be supplied through an environment variable prefixed
//! `STREAMDIV_` (command line wins over environment, environment over
//! defaults). Exit codes: 0 success, 1 i/o or malformed data, 2
//! configuration errors.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use streamdiv_core::dataset::{
    count_elements, generate_numeric, generate_strings, read_numeric, read_strings, DataError,
    DatasetSpec,
};
use streamdiv_core::experiment::{
    run_experiment, DataKind, ExperimentError, ExperimentRecord, RunParams, SweepSpec, CSV_HEADER,
};
use streamdiv_core::oracle::{timed_comparison_numeric, timed_comparison_strings, OracleError};
use streamdiv_core::sampling::{
    bounds_report, exact_success_probability, monte_carlo_success, secretary_bounds,
};
use streamdiv_core::{NumericDiversity, StringDiversity};

#[derive(Parser)]
#[command(
    name = "streamdiv",
    version,
    about = "One-pass stream diversification experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample segments from a dataset and run one selection per segment,
    /// emitting one CSV record each.
    Run(RunArgs),
    /// Print the analytical bounds for a configuration.
    Bounds(BoundsArgs),
    /// Estimate the stopping rule's success probability by simulation.
    Montecarlo(MonteCarloArgs),
    /// Wall-clock the one-pass method against the max-min baseline.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Numeric,
    String,
}

impl From<KindArg> for DataKind {
    fn from(kind: KindArg) -> Self {
        match kind {
            KindArg::Numeric => DataKind::Numeric,
            KindArg::String => DataKind::String,
        }
    }
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["input", "generate"])))]
struct RunArgs {
    /// Element kind of the dataset.
    #[arg(long, value_enum, env = "STREAMDIV_KIND")]
    kind: KindArg,
    /// Read elements from this file, one per line.
    #[arg(long, env = "STREAMDIV_INPUT")]
    input: Option<PathBuf>,
    /// Generate this many synthetic elements instead of reading a file.
    #[arg(long, env = "STREAMDIV_GENERATE")]
    generate: Option<usize>,
    /// Memory size: elements kept in the result set.
    #[arg(long, env = "STREAMDIV_M")]
    m: usize,
    /// Scan length: stream elements that only calibrate the threshold.
    #[arg(long, env = "STREAMDIV_K")]
    k: usize,
    /// Segment size: elements per sampled experiment.
    #[arg(long, env = "STREAMDIV_A")]
    a: usize,
    /// Number of segments to sample, without replacement.
    #[arg(long, env = "STREAMDIV_S")]
    s: usize,
    /// Deviation factor echoed into records; with s it determines p0.
    #[arg(long, env = "STREAMDIV_DELTA", default_value_t = 0.2)]
    delta: f64,
    /// Seed for segment sampling and synthetic generation.
    #[arg(long, env = "STREAMDIV_SEED", default_value_t = 0)]
    seed: u64,
    /// Sweep one parameter: PARAM=START:STEP:END (m, k, a, s or delta).
    #[arg(long, env = "STREAMDIV_SWEEP")]
    sweep: Option<String>,
    /// Label each record with the brute-force oracle's verdict.
    #[arg(long, env = "STREAMDIV_VERIFY")]
    verify: bool,
    /// Skip a forced final replacement that would not improve diversity.
    #[arg(long, env = "STREAMDIV_SKIP_NONIMPROVING_FINAL")]
    skip_nonimproving_final: bool,
    /// Write CSV here instead of standard output.
    #[arg(long, env = "STREAMDIV_OUT")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    /// Stream length of one experiment.
    #[arg(long, env = "STREAMDIV_N")]
    n: usize,
    /// Scan length.
    #[arg(long, env = "STREAMDIV_K")]
    k: usize,
    /// Deviation factor in (0, 1).
    #[arg(long, env = "STREAMDIV_DELTA", default_value_t = 0.2)]
    delta: f64,
    /// Number of sampled experiments the deviation bound covers.
    #[arg(long, env = "STREAMDIV_S", default_value_t = 500)]
    s: usize,
    /// Write the CSV report here instead of standard output.
    #[arg(long, env = "STREAMDIV_OUT")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MonteCarloArgs {
    /// Stream length of one experiment.
    #[arg(long, env = "STREAMDIV_N")]
    n: usize,
    /// Scan length.
    #[arg(long, env = "STREAMDIV_K")]
    k: usize,
    /// Simulated runs.
    #[arg(long, env = "STREAMDIV_TRIALS")]
    trials: usize,
    #[arg(long, env = "STREAMDIV_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    /// Element kind of the generated datasets.
    #[arg(long, value_enum, env = "STREAMDIV_KIND")]
    kind: KindArg,
    /// Dataset sizes to benchmark, comma separated.
    #[arg(long, env = "STREAMDIV_SIZES", value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    #[arg(long, env = "STREAMDIV_M")]
    m: usize,
    #[arg(long, env = "STREAMDIV_K")]
    k: usize,
    /// Segment size for the one-pass side.
    #[arg(long, env = "STREAMDIV_A")]
    a: usize,
    #[arg(long, env = "STREAMDIV_SEED", default_value_t = 0)]
    seed: u64,
    /// Write CSV here instead of standard output.
    #[arg(long, env = "STREAMDIV_OUT")]
    out: Option<PathBuf>,
}

/// CLI failure carrying its exit code class.
enum CliError {
    /// Bad parameter combination: exit 2.
    Config(String),
    /// I/O failure or malformed data: exit 1.
    Io(String),
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Data(data) => CliError::from(data),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<streamdiv_core::sampling::SamplingError> for CliError {
    fn from(e: streamdiv_core::sampling::SamplingError) -> Self {
        CliError::Config(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Montecarlo(args) => cmd_montecarlo(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// Print to stdout, or write to the file when `--out` was given.
fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let dataset = match (args.kind, &args.input, args.generate) {
        (KindArg::Numeric, Some(path), None) => DatasetSpec::NumericFile(path.clone()),
        (KindArg::String, Some(path), None) => DatasetSpec::StringFile(path.clone()),
        (KindArg::Numeric, None, Some(count)) => DatasetSpec::NumericGenerated {
            count,
            seed: args.seed,
        },
        (KindArg::String, None, Some(count)) => DatasetSpec::StringGenerated {
            count,
            seed: args.seed,
        },
        _ => unreachable!("clap enforces exactly one source"),
    };
    let total = count_elements(&dataset)?;

    let base = RunParams {
        m: args.m,
        k: args.k,
        a: args.a,
        s: args.s,
        delta: args.delta,
        seed: args.seed,
        verify: args.verify,
        skip_nonimproving_final: args.skip_nonimproving_final,
    };
    let sweep = args
        .sweep
        .as_deref()
        .map(|raw| raw.parse::<SweepSpec>())
        .transpose()
        .map_err(CliError::Config)?;

    let mut records: Vec<ExperimentRecord> = Vec::new();
    match sweep {
        None => records.extend(run_point(&dataset, &base, 0, total)?),
        Some(sweep) => {
            for (run_id, value) in sweep.values().into_iter().enumerate() {
                let mut params = base;
                sweep.apply(&mut params, value)?;
                records.extend(run_point(&dataset, &params, run_id, total)?);
            }
        }
    }

    let mut csv = String::new();
    let _ = writeln!(csv, "{CSV_HEADER}");
    for record in &records {
        let _ = writeln!(csv, "{}", record.csv_row());
    }
    emit(&args.out, &csv)
}

/// One experiment pass with a freshly opened source.
fn run_point(
    dataset: &DatasetSpec,
    params: &RunParams,
    run_id: usize,
    total: usize,
) -> Result<Vec<ExperimentRecord>, CliError> {
    let records = match dataset {
        DatasetSpec::NumericFile(path) => run_experiment(
            &NumericDiversity::new(),
            DataKind::Numeric,
            params,
            run_id,
            total,
            read_numeric(path)?,
        )?,
        DatasetSpec::NumericGenerated { count, seed } => run_experiment(
            &NumericDiversity::new(),
            DataKind::Numeric,
            params,
            run_id,
            total,
            generate_numeric(*count, *seed).map(Ok),
        )?,
        DatasetSpec::StringFile(path) => run_experiment(
            &StringDiversity::new(),
            DataKind::String,
            params,
            run_id,
            total,
            read_strings(path)?,
        )?,
        DatasetSpec::StringGenerated { count, seed } => run_experiment(
            &StringDiversity::new(),
            DataKind::String,
            params,
            run_id,
            total,
            generate_strings(*count, *seed).map(Ok),
        )?,
    };
    Ok(records)
}

fn cmd_bounds(args: BoundsArgs) -> Result<(), CliError> {
    let report = bounds_report(args.n, args.k, args.delta, args.s)?;
    println!("n: {}", report.n);
    println!("k: {}", report.k);
    println!("success probability lower bound: {:.6}", report.pr_lower);
    println!("success probability upper bound: {:.6}", report.pr_upper);
    println!("optimal scan length k_opt: {}", report.k_opt);
    println!("maximized lower bound h_max: {:.6}", report.h_max);
    println!(
        "deviation bound p0: {:.5e} (delta={}, s={})",
        report.p0, report.delta, report.samples
    );

    let mut csv = String::new();
    let _ = writeln!(csv, "n,k,pr_lower,pr_upper,k_opt,h_max,p0,delta,s");
    let _ = writeln!(
        csv,
        "{},{},{},{},{},{},{},{},{}",
        report.n,
        report.k,
        report.pr_lower,
        report.pr_upper,
        report.k_opt,
        report.h_max,
        report.p0,
        report.delta,
        report.samples
    );
    match &args.out {
        Some(_) => emit(&args.out, &csv),
        None => {
            println!();
            print!("{csv}");
            Ok(())
        }
    }
}

fn cmd_montecarlo(args: MonteCarloArgs) -> Result<(), CliError> {
    let report = monte_carlo_success(args.n, args.k, args.trials, args.seed)?;
    let (lower, upper) = secretary_bounds(args.n, args.k)?;
    let exact = exact_success_probability(args.n, args.k)?;
    println!(
        "n: {}  k: {}  trials: {}  seed: {}",
        args.n, args.k, args.trials, args.seed
    );
    println!("empirical success rate: {:.6}", report.success_rate);
    println!("95% CI half-width: {:.6}", report.ci_half_width);
    println!("closed-form bounds: [{lower:.6}, {upper:.6}]");
    println!("exact success probability: {exact:.6}");
    let inside = report.success_rate >= lower - report.ci_half_width
        && report.success_rate <= upper + report.ci_half_width;
    println!(
        "verdict: {}",
        if inside {
            "within bounds"
        } else {
            "outside bounds"
        }
    );
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    if args.sizes.is_empty() {
        return Err(CliError::Config("at least one size is required".into()));
    }
    if args.a < args.m + args.k + 1 {
        return Err(CliError::Config(format!(
            "segment size a={} too small for m={} and k={}; use a >= {}",
            args.a,
            args.m,
            args.k,
            args.m + args.k + 1
        )));
    }
    let mut csv = String::from("size,stream_time_us,maxmin_time_us\n");
    for &size in &args.sizes {
        if size < args.a {
            return Err(CliError::Config(format!(
                "size {size} is smaller than one segment (a={})",
                args.a
            )));
        }
        let (stream_time, maxmin_time) = match args.kind {
            KindArg::Numeric => {
                let data: Vec<f64> = generate_numeric(size, args.seed).collect();
                timed_comparison_numeric(&data, args.m, args.k, args.a, args.seed)?
            }
            KindArg::String => {
                let data: Vec<String> = generate_strings(size, args.seed).collect();
                timed_comparison_strings(&data, args.m, args.k, args.a, args.seed)?
            }
        };
        let _ = writeln!(
            csv,
            "{size},{},{}",
            stream_time.as_micros(),
            maxmin_time.as_micros()
        );
    }
    emit(&args.out, &csv)
}
