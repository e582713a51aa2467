//! Command-line interface for running experiments, sweeps, figure
//! protocols and conformance checks.
//!
//! Exit codes: 0 success, 1 usage error, 2 conformance-check failure,
//! 3 I/O error.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use sgdavg::averaging::AveragingScheme;
use sgdavg::bounds;
use sgdavg::harness::conformance::{
    check_high_probability, check_lower_bound, check_upper_bound, ConformanceRecord, LowerBoundKind,
};
use sgdavg::harness::csvout::emit_csv;
use sgdavg::harness::figures::{replicate_figure, FigureKind, FigureSpec};
use sgdavg::harness::rate::estimate_rate;
use sgdavg::harness::sweep::{stepsize_sweep, SweepSpec};
use sgdavg::harness::{distance_profile, run_experiment, ExperimentSpec, HarnessError};
use sgdavg::problems::Problem;
use sgdavg::solver::InitPolicy;
use sgdavg::svmlight::{load_svmlight, ParseError};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_USAGE: u8 = 1;
const EXIT_CONFORMANCE: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(
    name = "sgdavg",
    about = "Projected SGD with averaging schemes: experiments, sweeps and bound checks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment grid and emit a CSV of gaps per scheme and horizon.
    Run(RunArgs),
    /// Step-size sweep: fitted decay exponents per step multiplier c.
    Sweep(SweepArgs),
    /// Canned experiment protocols (smooth, nonsmooth, svm).
    ReplicateFigure(FigureArgs),
    /// Check empirical curves against the closed-form bounds.
    CheckBounds(CheckBoundsArgs),
    /// High-probability quantile check of the scaled iterate distance.
    CheckHighprob(CheckHighprobArgs),
    /// Print summary statistics of an svmlight file.
    DataStats(DataStatsArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Problem: smooth | corner | interior | noiseless.
    #[arg(long, default_value = "smooth")]
    problem: String,
    /// Comma list of schemes: last, full, suffix, epoch.
    #[arg(long, default_value = "last,full,suffix")]
    schemes: String,
    /// Suffix fraction used by the suffix scheme.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Epoch growth used by the epoch scheme.
    #[arg(long, default_value_t = 2.0)]
    epoch_growth: f64,
    /// Comma list of horizons; default 128..16384 in powers of two.
    #[arg(long)]
    t_grid: Option<String>,
    #[arg(long, default_value_t = 10)]
    replicates: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Step multiplier: eta_t = c / (lambda t).
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Override the schedule's lambda (step-size experiments).
    #[arg(long)]
    lambda_prime: Option<f64>,
    /// Initial point: origin | uniform.
    #[arg(long, default_value = "origin")]
    init: String,
    /// Also run the epoch-doubling baseline.
    #[arg(long)]
    epoch_gd: bool,
    /// Problem dimension.
    #[arg(long, default_value_t = 5)]
    dim: usize,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Disable replicate-level parallelism.
    #[arg(long)]
    serial: bool,
    /// Print fitted rate classifications per scheme.
    #[arg(long)]
    rates: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma list of step multipliers.
    #[arg(long, default_value = "0.25,0.5,1.0")]
    c_list: String,
    /// Comma list of horizons for the deterministic closed form.
    #[arg(long)]
    t_grid: Option<String>,
    /// Comma list of horizons for the stochastic corner runs; empty to skip.
    #[arg(long)]
    stochastic_grid: Option<String>,
    #[arg(long, default_value_t = 10)]
    replicates: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    serial: bool,
}

#[derive(Args)]
struct FigureArgs {
    /// smooth | nonsmooth | svm.
    #[arg(long)]
    name: String,
    /// Training file (svm only).
    #[arg(long)]
    train: Option<PathBuf>,
    /// Held-out file (svm only, optional).
    #[arg(long)]
    test: Option<PathBuf>,
    /// SVM ridge weight.
    #[arg(long, default_value_t = 1e-4)]
    lambda: f64,
    #[arg(long, default_value_t = 10)]
    replicates: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    serial: bool,
}

#[derive(Args)]
struct CheckBoundsArgs {
    /// smooth | corner | interior | noiseless.
    #[arg(long, default_value = "smooth")]
    problem: String,
    /// last | full | suffix | distance | corner-lower | interior-lower.
    #[arg(long)]
    bound: String,
    #[arg(long, default_value_t = 100)]
    replicates: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long)]
    t_grid: Option<String>,
    #[arg(long, default_value = "origin")]
    init: String,
    #[arg(long, default_value_t = 5)]
    dim: usize,
    #[arg(long)]
    serial: bool,
}

#[derive(Args)]
struct CheckHighprobArgs {
    #[arg(long, default_value = "corner")]
    problem: String,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 1024)]
    t: u64,
    #[arg(long, default_value_t = 1000)]
    replicates: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value = "uniform")]
    init: String,
    #[arg(long, default_value_t = 5)]
    dim: usize,
    #[arg(long)]
    serial: bool,
}

#[derive(Args)]
struct DataStatsArgs {
    #[arg(long)]
    file: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::ReplicateFigure(args) => cmd_figure(args),
        Command::CheckBounds(args) => cmd_check_bounds(args),
        Command::CheckHighprob(args) => cmd_check_highprob(args),
        Command::DataStats(args) => cmd_data_stats(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = std::error::Error::source(&err);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &HarnessError) -> u8 {
    match err {
        HarnessError::Io { .. } | HarnessError::Parse(ParseError::Io { .. }) => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

fn usage(msg: impl Into<String>) -> HarnessError {
    HarnessError::InvalidSpec(msg.into())
}

fn parse_problem(name: &str, dim: usize) -> Result<Problem, HarnessError> {
    match name {
        "smooth" => Ok(Problem::smooth_quadratic(dim)),
        "corner" => Ok(Problem::corner(dim)),
        "interior" => Ok(Problem::interior(dim)),
        "noiseless" => Ok(Problem::noiseless_quadratic(dim)),
        other => Err(usage(format!(
            "unknown problem {other:?} (expected smooth, corner, interior or noiseless)"
        ))),
    }
}

fn parse_init(name: &str) -> Result<InitPolicy, HarnessError> {
    match name {
        "origin" => Ok(InitPolicy::Origin),
        "uniform" => Ok(InitPolicy::UniformInDomain),
        other => Err(usage(format!(
            "unknown init {other:?} (expected origin or uniform)"
        ))),
    }
}

fn parse_grid(text: Option<&str>, default: &[u64]) -> Result<Vec<u64>, HarnessError> {
    match text {
        None => Ok(default.to_vec()),
        Some(t) if t.trim().is_empty() => Ok(Vec::new()),
        Some(t) => t
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<u64>()
                    .map_err(|_| usage(format!("bad horizon {tok:?}")))
            })
            .collect(),
    }
}

fn parse_schemes(
    text: &str,
    alpha: f64,
    epoch_growth: f64,
) -> Result<Vec<AveragingScheme>, HarnessError> {
    if !(0.0..=1.0).contains(&alpha) || alpha == 0.0 {
        return Err(usage("alpha must lie in (0, 1]"));
    }
    if epoch_growth <= 1.0 {
        return Err(usage("epoch growth must exceed 1"));
    }
    text.split(',')
        .map(|tok| match tok.trim() {
            "last" => Ok(AveragingScheme::Last),
            "full" => Ok(AveragingScheme::FullAverage),
            "suffix" => Ok(AveragingScheme::suffix(alpha)),
            "epoch" => Ok(AveragingScheme::epoch_suffix(epoch_growth)),
            other => Err(usage(format!(
                "unknown scheme {other:?} (expected last, full, suffix or epoch)"
            ))),
        })
        .collect()
}

fn default_grid() -> Vec<u64> {
    (7..=14).map(|k| 1u64 << k).collect()
}

fn print_conformance(record: &ConformanceRecord) {
    println!("check {} on scheme {}", record.check, record.scheme);
    for e in &record.entries {
        let status = if e.skipped {
            "skip (vacuous)"
        } else if e.violated {
            "VIOLATED"
        } else {
            "ok"
        };
        println!(
            "  T={:<8} empirical={:<12.6e} margin={:<12.6e} bound={:<12.6e} {status}",
            e.horizon, e.empirical, e.margin, e.bound
        );
    }
}

fn cmd_run(args: RunArgs) -> Result<u8, HarnessError> {
    let problem = parse_problem(&args.problem, args.dim)?;
    let mut spec = ExperimentSpec::new(
        problem,
        parse_grid(args.t_grid.as_deref(), &default_grid())?,
        args.replicates,
        args.seed,
    );
    spec.schemes = parse_schemes(&args.schemes, args.alpha, args.epoch_growth)?;
    spec.step_c = args.c;
    spec.step_lambda = args.lambda_prime;
    spec.init = parse_init(&args.init)?;
    spec.include_epoch_gd = args.epoch_gd;
    spec.parallel = !args.serial;
    let report = run_experiment(&spec)?;
    emit_csv(&report, &args.out)?;
    println!(
        "wrote {} ({} rows, {} oracle calls, {:.2?})",
        args.out.display(),
        report.rows.len(),
        report.total_oracle_calls,
        report.wall_time
    );
    if args.rates {
        for label in report.scheme_labels() {
            let fit = estimate_rate(&report, &label)?;
            println!(
                "  {label}: beta={:.4} scaled-slope={:.4e} (se {:.2e}) -> {}",
                fit.exponent,
                fit.scaled_slope,
                fit.scaled_slope_se,
                fit.class.as_str()
            );
        }
    }
    Ok(0)
}

fn cmd_sweep(args: SweepArgs) -> Result<u8, HarnessError> {
    let c_list: Vec<f64> = args
        .c_list
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("bad step multiplier {tok:?}")))
        })
        .collect::<Result<_, _>>()?;
    let mut spec = SweepSpec::new(c_list);
    if let Some(grid) = &args.t_grid {
        spec.det_grid = parse_grid(Some(grid), &[])?;
    }
    if let Some(grid) = &args.stochastic_grid {
        spec.stochastic_grid = parse_grid(Some(grid), &[])?;
    }
    spec.replicates = args.replicates;
    spec.base_seed = args.seed;
    spec.parallel = !args.serial;
    let outcome = stepsize_sweep(&spec)?;
    emit_csv(&outcome.report, &args.out)?;
    println!("wrote {}", args.out.display());
    println!("fitted decay exponents:");
    for entry in &outcome.exponents {
        match entry.exponent {
            Some(e) => println!("  {:<24} c={:<6} exponent={:.4}", entry.label, entry.c, e),
            None => println!("  {:<24} c={:<6} exact (all zero)", entry.label, entry.c),
        }
    }
    Ok(0)
}

fn cmd_figure(args: FigureArgs) -> Result<u8, HarnessError> {
    let kind = FigureKind::parse(&args.name)
        .ok_or_else(|| usage("figure name must be smooth, nonsmooth or svm"))?;
    let mut spec = FigureSpec::new(kind, args.out);
    spec.train = args.train;
    spec.test = args.test;
    spec.reg = args.lambda;
    spec.replicates = args.replicates;
    spec.base_seed = args.seed;
    spec.parallel = !args.serial;
    let outputs = replicate_figure(&spec)?;
    for (path, report) in &outputs {
        println!("wrote {} ({} rows)", path.display(), report.rows.len());
    }
    Ok(0)
}

fn cmd_check_bounds(args: CheckBoundsArgs) -> Result<u8, HarnessError> {
    let problem = parse_problem(&args.problem, args.dim)?;
    let grid = parse_grid(args.t_grid.as_deref(), &default_grid())?;
    let init = parse_init(&args.init)?;
    let parallel = !args.serial;

    if args.bound == "distance" {
        let profile = distance_profile(
            &problem,
            args.c,
            *grid.last().expect("nonempty grid"),
            &grid,
            args.replicates,
            args.seed,
            init,
            parallel,
        )?;
        let mut violations = 0;
        println!("check iterate_distance on problem {}", problem.name);
        for (i, &t) in profile.checkpoints.iter().enumerate() {
            let bound = bounds::iterate_distance_bound(problem.g_sq_bound, problem.lambda, t);
            let margin = 2.0 * profile.std_dist_sq[i] / (profile.replicates as f64).sqrt();
            let violated = profile.mean_dist_sq[i] - margin > bound;
            if violated {
                violations += 1;
            }
            println!(
                "  t={:<8} mean={:<12.6e} margin={:<12.6e} bound={:<12.6e} {}",
                t,
                profile.mean_dist_sq[i],
                margin,
                bound,
                if violated { "VIOLATED" } else { "ok" }
            );
        }
        return Ok(if violations == 0 { 0 } else { EXIT_CONFORMANCE });
    }

    let lower_kind = match args.bound.as_str() {
        "corner-lower" => Some(LowerBoundKind::Corner),
        "interior-lower" => Some(LowerBoundKind::Interior),
        _ => None,
    };
    let scheme = match args.bound.as_str() {
        "last" => AveragingScheme::Last,
        "full" => AveragingScheme::FullAverage,
        "suffix" => AveragingScheme::suffix(args.alpha),
        _ if lower_kind.is_some() => AveragingScheme::FullAverage,
        other => {
            return Err(usage(format!(
                "unknown bound {other:?} (expected last, full, suffix, distance, corner-lower or interior-lower)"
            )))
        }
    };

    let mut spec = ExperimentSpec::new(problem.clone(), grid, args.replicates, args.seed);
    spec.schemes = vec![scheme];
    spec.step_c = args.c;
    spec.init = init;
    spec.parallel = parallel;
    let report = run_experiment(&spec)?;
    let record = match lower_kind {
        Some(kind) => check_lower_bound(&report, &problem, kind, args.c)?,
        None => check_upper_bound(&report, &problem, &spec.schemes[0])?,
    };
    print_conformance(&record);
    Ok(if record.passed() { 0 } else { EXIT_CONFORMANCE })
}

fn cmd_check_highprob(args: CheckHighprobArgs) -> Result<u8, HarnessError> {
    let problem = parse_problem(&args.problem, args.dim)?;
    let record = check_high_probability(
        &problem,
        args.c,
        args.t,
        args.replicates,
        args.delta,
        args.seed,
        parse_init(&args.init)?,
        !args.serial,
    )?;
    println!(
        "problem {} T={} delta={} replicates={}",
        problem.name, record.horizon, record.delta, record.replicates
    );
    println!(
        "  empirical {:.0}%-quantile of max t*dist^2: {:.6e}",
        100.0 * (1.0 - record.delta),
        record.quantile
    );
    println!(
        "  scaled high-probability bound:          {:.6e}",
        record.bound
    );
    println!("  ratio: {:.6}", record.ratio);
    Ok(if record.passed() { 0 } else { EXIT_CONFORMANCE })
}

fn cmd_data_stats(args: DataStatsArgs) -> Result<u8, HarnessError> {
    let ds = load_svmlight(&args.file)?;
    println!("file:        {}", args.file.display());
    println!("examples:    {}", ds.len());
    println!("positives:   {}", ds.positives());
    println!("negatives:   {}", ds.len() - ds.positives());
    println!("max index:   {}", ds.max_index);
    println!("nonzeros:    {}", ds.nnz());
    if !ds.is_empty() {
        println!("avg nnz:     {:.2}", ds.nnz() as f64 / ds.len() as f64);
        println!("max ||x||^2: {:.6}", ds.max_norm_sq());
    }
    Ok(0)
}
