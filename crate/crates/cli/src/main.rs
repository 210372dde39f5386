//! `tensorsketch` command-line interface.
//!
//! Exit codes: 0 success, 1 an asserted bound was violated, 2 usage or
//! parameter error, 3 input/output failure.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tensorsketch::eval::{self, BiasVarianceReport, EstimatorKind, GramErrorReport, TimingRow};
use tensorsketch::hashing::derive_seed;
use tensorsketch::io::{self as dataset_io, Dataset};
use tensorsketch::{Error, InputVector, MaclaurinMap, SketchConfig, TensorSketchMap};

/// Maximum Frobenius relative error `bench --mode gram-error` accepts by
/// default, frozen from Monte Carlo runs of 100 unit vectors in `R^16`,
/// `p = 2`, `D = 1024` (95th percentile over 2000 maps).
const DEFAULT_MAX_GRAM_REL_ERROR: f64 = 0.46;

#[derive(Parser, Debug)]
#[command(
    name = "tensorsketch",
    version,
    about = "Tensor Sketch feature maps for polynomial kernels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Map every row of a dataset to its feature vector.
    Transform(TransformArgs),
    /// Run the statistical and timing checks and write reports.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Libsvm,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FeatureEstimator {
    Tensor,
    Maclaurin,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Estimator {
    Tensor,
    Ams,
    Maclaurin,
}

impl From<Estimator> for EstimatorKind {
    fn from(e: Estimator) -> Self {
        match e {
            Estimator::Tensor => EstimatorKind::Tensor,
            Estimator::Ams => EstimatorKind::Ams,
            Estimator::Maclaurin => EstimatorKind::Maclaurin,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    BiasVariance,
    GramError,
    Timing,
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Dataset path.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "libsvm")]
    format: Format,
    /// Treat the first CSV column as a label.
    #[arg(long)]
    labels: bool,
}

#[derive(Args, Debug)]
struct TransformArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    output: PathBuf,
    /// Polynomial degree p.
    #[arg(long)]
    degree: u32,
    /// Number of output features D.
    #[arg(long)]
    dim_out: usize,
    /// Kernel offset c.
    #[arg(long, default_value_t = 0.0)]
    offset: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value = "tensor")]
    estimator: FeatureEstimator,
    /// Force the input dimension (must cover every index in the file).
    #[arg(long)]
    dim_in: Option<usize>,
    /// Write little-endian binary instead of CSV.
    #[arg(long)]
    binary: bool,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "tensor")]
    estimator: Estimator,
    /// Input dimension d of generated data.
    #[arg(long, default_value_t = 6)]
    dim_in: usize,
    #[arg(long, default_value_t = 2)]
    degree: u32,
    #[arg(long, default_value_t = 16)]
    dim_out: usize,
    #[arg(long, default_value_t = 0.0)]
    offset: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    /// Number of generated vectors (gram-error, timing).
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Largest accepted Frobenius relative error (gram-error).
    #[arg(long, default_value_t = DEFAULT_MAX_GRAM_REL_ERROR)]
    max_rel_error: f64,
    /// Feature dimensions to time, ascending.
    #[arg(long, value_delimiter = ',', default_value = "256,1024,4096")]
    dims: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    /// Report path; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Core(Error),
    Usage(String),
    Violation(Vec<String>),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Violation(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Core(Error::Io(_) | Error::Parse { .. }) => 3,
            CliError::Core(_) => 2,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn load_dataset(args: &InputArgs, forced_dim: Option<usize>) -> CliResult<Dataset> {
    let path = args
        .input
        .as_ref()
        .ok_or_else(|| CliError::Usage("--input is required".into()))?;
    let file = File::open(path)
        .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let reader = BufReader::new(file);
    Ok(match args.format {
        Format::Libsvm => dataset_io::parse_libsvm(reader, forced_dim)?,
        Format::Csv => dataset_io::parse_csv_dense(reader, args.labels, forced_dim)?,
    })
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    let file = File::create(path)
        .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    Ok(BufWriter::new(file))
}

fn report_sink(output: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match output {
        Some(path) => Box::new(create(path)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn transform(args: &TransformArgs) -> CliResult<()> {
    let dataset = load_dataset(&args.input, args.dim_in)?;
    let input_dim = dataset.dim.max(1);
    let rows: Vec<Vec<f64>> = match args.estimator {
        FeatureEstimator::Tensor => {
            let config =
                SketchConfig::new(input_dim, args.dim_out, args.degree, args.offset, args.seed)?;
            let map = TensorSketchMap::build(config)?;
            map.apply_batch(&dataset.vectors)?
        }
        FeatureEstimator::Maclaurin => {
            let map = MaclaurinMap::for_kernel(
                input_dim,
                args.degree,
                args.dim_out,
                args.offset,
                args.seed,
            )?;
            dataset
                .vectors
                .iter()
                .map(|x| map.features(x))
                .collect::<tensorsketch::Result<_>>()?
        }
    };
    let out = create(&args.output)?;
    if args.binary {
        dataset_io::write_features_binary(&rows, args.dim_out, out)?;
    } else {
        dataset_io::write_features_csv(&rows, out)?;
    }
    Ok(())
}

fn pair_from(args: &BenchArgs) -> CliResult<(InputVector, InputVector)> {
    if args.input.input.is_some() {
        let dataset = load_dataset(&args.input, None)?;
        if dataset.len() < 2 {
            return Err(CliError::Usage(
                "bias-variance needs at least two rows in --input".into(),
            ));
        }
        let mut it = dataset.vectors.into_iter();
        Ok((it.next().expect("two rows"), it.next().expect("two rows")))
    } else {
        let mut v = eval::random_unit_vectors(2, args.dim_in, derive_seed(args.seed, u64::MAX))?;
        let y = v.pop().expect("two vectors");
        let x = v.pop().expect("two vectors");
        Ok((x, y))
    }
}

fn bias_variance(args: &BenchArgs) -> CliResult<()> {
    let (x, y) = pair_from(args)?;
    let config = SketchConfig {
        input_dim: x.dim(),
        feature_dim: args.dim_out,
        degree: args.degree,
        offset: args.offset,
        seed: args.seed,
    };
    let stats = eval::run_trials(
        args.estimator.into(),
        &x,
        &y,
        &config,
        args.trials,
        args.seed,
    )?;
    let report = BiasVarianceReport::new(config, &stats);
    let mut sink = report_sink(&args.output)?;
    writeln!(
        sink,
        "{}",
        serde_json::to_string(&report).map_err(io::Error::from)?
    )?;
    sink.flush()?;
    let violations = stats.violations();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::Violation(violations))
    }
}

#[derive(serde::Serialize)]
struct GramRecord<'a> {
    mode: &'static str,
    #[serde(flatten)]
    report: &'a GramErrorReport,
    d: usize,
    max_rel_error: f64,
    pass: bool,
}

fn gram(args: &BenchArgs) -> CliResult<()> {
    let data = if args.input.input.is_some() {
        load_dataset(&args.input, None)?.vectors
    } else {
        eval::random_unit_vectors(args.n, args.dim_in, derive_seed(args.seed, u64::MAX))?
    };
    let input_dim = data.first().map_or(args.dim_in, InputVector::dim);
    let config = SketchConfig::new(input_dim, args.dim_out, args.degree, args.offset, args.seed)?;
    let report = eval::gram_error(&data, &config)?;
    let pass = report.frobenius_rel_error <= args.max_rel_error;
    let record = GramRecord {
        mode: "gram-error",
        report: &report,
        d: input_dim,
        max_rel_error: args.max_rel_error,
        pass,
    };
    let mut sink = report_sink(&args.output)?;
    writeln!(
        sink,
        "{}",
        serde_json::to_string(&record).map_err(io::Error::from)?
    )?;
    sink.flush()?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Violation(vec![format!(
            "frobenius_rel_error = {} > {}",
            report.frobenius_rel_error, args.max_rel_error
        )]))
    }
}

fn timing(args: &BenchArgs) -> CliResult<()> {
    let rows: Vec<TimingRow> = eval::timing_profile(
        args.dim_in,
        args.n,
        &args.dims,
        args.degree,
        args.reps,
        args.seed,
    )?;
    eval::write_timing_csv(&rows, report_sink(&args.output)?)?;
    let violations = eval::timing_violations(&rows);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::Violation(violations))
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Transform(args) => transform(&args),
        Command::Bench(args) => match args.mode {
            Mode::BiasVariance => bias_variance(&args),
            Mode::GramError => gram(&args),
            Mode::Timing => timing(&args),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            match &err {
                CliError::Violation(items) => {
                    for item in items {
                        eprintln!("bound violated: {item}");
                    }
                }
                CliError::Usage(msg) => eprintln!("error: {msg}"),
                CliError::Core(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(err.exit_code())
        }
    }
}
