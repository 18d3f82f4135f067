mod verify;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mde_core::bench::{self, BenchReport};
use mde_core::exec::threads_from_env;
use mde_core::{
    default_weights, fit, load_csv, load_weights, simulate, write_csv, ErrorDist, FitResult, Init,
    MdeError, ParameterVector, SolverConfig,
};
use serde::Serialize;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;
const EXIT_VERIFY: u8 = 4;

/// Minimum distance estimation for linear regression.
#[derive(Debug, Parser)]
#[command(name = "mde", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a regression from a CSV file.
    Fit(FitArgs),
    /// Write a simulated data set as CSV.
    Simulate(SimulateArgs),
    /// Check the solver against the slow reference implementations.
    Verify(VerifyArgs),
    /// Time the solver on simulated data.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Headed CSV file with the response and covariate columns.
    #[arg(long)]
    data: PathBuf,
    /// Response column, by header name or 0-based index.
    #[arg(long)]
    response: String,
    /// Headed CSV file with an n x p weight matrix (default: the design).
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Starting point: `ols`, `zeros` or a comma-separated vector.
    #[arg(long, default_value = "ols")]
    init: String,
    #[arg(long, default_value_t = 1e-8)]
    tol_param: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol_loss: f64,
    #[arg(long, default_value_t = 100)]
    max_sweeps: usize,
    #[arg(long, value_enum, default_value_t = FitFormat::Json)]
    out: FitFormat,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FitFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ErrorKind {
    Normal,
    Laplace,
    Uniform,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    /// Comma-separated coefficients (default: 1, -1.5, 2, -2.5, ...).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    beta: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = ErrorKind::Normal)]
    error: ErrorKind,
    /// Standard deviation (normal), scale (laplace) or half-width (uniform).
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 15)]
    max_n: usize,
    #[arg(long, default_value_t = 4)]
    max_p: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Perturb every coordinate update so the comparison must fail.
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BenchMode {
    Scaling,
    Compare,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_enum, default_value_t = BenchMode::Scaling)]
    mode: BenchMode,
    #[arg(long, value_delimiter = ',', default_value = "100,200,400")]
    n_list: Vec<usize>,
    #[arg(long, default_value_t = 4)]
    p: usize,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
}

impl From<MdeError> for Failure {
    fn from(e: MdeError) -> Self {
        if e.is_data_error() {
            Failure::Data(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_DATA)
        }
    }
}

fn parse_init(spec: &str) -> Result<Init, Failure> {
    match spec.trim() {
        "ols" => Ok(Init::Ols),
        "zeros" => Ok(Init::Zeros),
        list => {
            let values = list
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<Vec<f64>, _>>()
                .map_err(|_| Failure::Usage(format!("--init: expected ols, zeros or a number list, got {list:?}")))?;
            Ok(Init::User(ParameterVector::new(values)?))
        }
    }
}

#[derive(Serialize)]
struct FitReport<'a> {
    estimate: &'a [f64],
    loss: f64,
    sweeps: usize,
    converged: bool,
    elapsed_seconds: f64,
}

fn cmd_fit(args: FitArgs) -> Result<u8, Failure> {
    let config = SolverConfig {
        tol_param: args.tol_param,
        tol_loss: args.tol_loss,
        max_sweeps: args.max_sweeps,
        init: parse_init(&args.init)?,
        threads: threads_from_env(),
    };
    config.validate()?;
    let data = load_csv(&args.data, args.response.as_str())?;
    let weights = match &args.weights {
        Some(path) => load_weights(path)?,
        None => default_weights(&data),
    };
    let res = fit(&data, &weights, &config)?;
    print_fit(&res, args.out).map_err(|e| Failure::Data(format!("writing result: {e}")))?;
    Ok(if res.converged { 0 } else { EXIT_NOT_CONVERGED })
}

fn print_fit(res: &FitResult, format: FitFormat) -> io::Result<()> {
    let mut out = io::stdout().lock();
    match format {
        FitFormat::Json => {
            let report = FitReport {
                estimate: &res.estimate,
                loss: res.loss,
                sweeps: res.sweeps,
                converged: res.converged,
                elapsed_seconds: res.elapsed.as_secs_f64(),
            };
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)
        }
        FitFormat::Csv => {
            let mut header: Vec<String> = (1..=res.estimate.len()).map(|k| format!("b{k}")).collect();
            header.extend(["loss", "sweeps", "converged", "elapsed_seconds"].map(String::from));
            let mut row: Vec<String> = res.estimate.iter().map(|v| format!("{v:?}")).collect();
            row.push(format!("{:?}", res.loss));
            row.push(res.sweeps.to_string());
            row.push(res.converged.to_string());
            row.push(format!("{:?}", res.elapsed.as_secs_f64()));
            writeln!(out, "{}", header.join(","))?;
            writeln!(out, "{}", row.join(","))
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Data(format!("cannot write {}: {e}", path.display())))
}

fn finish(mut file: BufWriter<File>, path: &Path) -> Result<(), Failure> {
    file.flush()
        .map_err(|e| Failure::Data(format!("cannot write {}: {e}", path.display())))
}

fn cmd_simulate(args: SimulateArgs) -> Result<u8, Failure> {
    let beta = match args.beta {
        Some(values) if values.len() != args.p => {
            return Err(Failure::Usage(format!(
                "--beta has {} values but --p is {}",
                values.len(),
                args.p
            )))
        }
        Some(values) => ParameterVector::new(values)?,
        None => bench::bench_beta(args.p),
    };
    let error = match args.error {
        ErrorKind::Normal => ErrorDist::Normal { sigma: args.sigma },
        ErrorKind::Laplace => ErrorDist::Laplace { scale: args.sigma },
        ErrorKind::Uniform => ErrorDist::Uniform { half_width: args.sigma },
    };
    let sink = args.out.as_deref().map(|p| create(p).map(|f| (f, p))).transpose()?;
    let data = simulate(args.n, args.p, &beta, error, args.seed)?;
    match sink {
        Some((mut file, path)) => {
            write_csv(&data, &mut file)?;
            finish(file, path)?;
        }
        None => write_csv(&data, io::stdout().lock())?,
    }
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> Result<u8, Failure> {
    let summary = verify::run(&verify::Options {
        trials: args.trials,
        max_n: args.max_n,
        max_p: args.max_p,
        seed: args.seed,
        inject_fault: args.inject_fault,
    })?;
    println!(
        "distance vs integral: {}/{} passed",
        summary.loss_passed, summary.trials
    );
    println!(
        "coordinate update vs brute force: {}/{} passed",
        summary.update_passed, summary.trials
    );
    match summary.first_failure {
        None => Ok(0),
        Some(f) => {
            println!(
                "first failure: trial {} ({}); replay with --trials 1 --seed {} --max-n {} --max-p {}",
                f.trial, f.what, f.seed, args.max_n, args.max_p
            );
            Ok(EXIT_VERIFY)
        }
    }
}

fn cmd_bench(args: BenchArgs) -> Result<u8, Failure> {
    let sink = args.out.as_deref().map(|p| create(p).map(|f| (f, p))).transpose()?;
    let report: BenchReport = match args.mode {
        BenchMode::Scaling => bench::scaling_run(&args.n_list, args.p, args.repeats, args.seed)?,
        BenchMode::Compare => bench::compare_run(&args.n_list, args.p, args.repeats, args.seed)?,
    };
    match sink {
        Some((mut file, path)) => {
            report.write_csv(&mut file)?;
            finish(file, path)?;
            print!("{}", report.summary());
        }
        None => {
            report.write_csv(io::stdout().lock())?;
            eprint!("{}", report.summary());
        }
    }
    Ok(0)
}
