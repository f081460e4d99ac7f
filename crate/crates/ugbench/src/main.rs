//! `ugbench`: run, sweep and compare universal gradient methods and baselines,
//! writing CSV traces and summaries.

mod commands;
mod config;
mod error;
mod output;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ConfigFile, Overrides, RunConfig};
use error::CliResult;

#[derive(Parser)]
#[command(
    name = "ugbench",
    version,
    about = "Benchmark harness for universal gradient methods"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve once per (solver, seed) and write traces plus summary.csv.
    Run(CommonArgs),
    /// Tune step size (sgd) or diameter (others) over a grid; writes sweep.csv.
    Sweep(SweepArgs),
    /// Run several solvers on one problem; writes compare.csv with aligned F columns.
    Compare(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Flat `key = value` file; `[name]` sections define per-solver settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// ls | logistic | ppower:P
    #[arg(long)]
    problem: Option<String>,
    /// LIBSVM file path or synthetic:M,N[,SEED]
    #[arg(long)]
    data: Option<String>,
    /// Scale every feature column by its max absolute value.
    #[arg(long)]
    normalize: bool,
    /// Ball radius (default 1).
    #[arg(long)]
    radius: Option<f64>,
    /// Comma-separated diagonal of the metric matrix B (default identity).
    #[arg(long)]
    b_diag: Option<String>,
    /// Diameter bound passed to the solvers (default 2 * radius).
    #[arg(long = "D")]
    diameter: Option<f64>,
    /// ugm | usgm | usfgm | usfgm-det | sgd:STEP[:decay] | adagrad[:grad_diff|grad_norm];
    /// repeat or separate with commas.
    #[arg(long)]
    solver: Vec<String>,
    /// exact | gaussian:SIGMA | minibatch:B
    #[arg(long)]
    oracle: Option<String>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    trace_every: Option<usize>,
    /// Point at which averaging methods report F: average | last.
    #[arg(long)]
    report: Option<String>,
    /// Comma-separated seeds (default: $UGBENCH_SEED, else 0).
    #[arg(long)]
    seeds: Option<String>,
    /// Worker threads for independent runs.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Step-size grid for sgd (default 10,1,0.1,0.01,0.001,0.0001).
    #[arg(long)]
    steps: Option<String>,
    /// Diameter grid for the other solvers (default 50,35,20,10,5).
    #[arg(long)]
    diameters: Option<String>,
}

fn resolve(
    common: CommonArgs,
    steps: Option<String>,
    diameters: Option<String>,
) -> CliResult<RunConfig> {
    let file = match &common.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let overrides = Overrides {
        problem: common.problem,
        data: common.data,
        normalize: common.normalize,
        radius: common.radius,
        b_diag: common.b_diag,
        diameter: common.diameter,
        solvers: common.solver,
        oracle: common.oracle,
        iters: common.iters,
        trace_every: common.trace_every,
        report: common.report,
        seeds: common.seeds,
        out: common.out,
        jobs: common.jobs,
        steps,
        diameters,
    };
    let env_seed = std::env::var("UGBENCH_SEED").ok();
    RunConfig::resolve(&file, &overrides, env_seed.as_deref())
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run(args) => commands::cmd_run(&resolve(args, None, None)?),
        Command::Sweep(args) => {
            commands::cmd_sweep(&resolve(args.common, args.steps, args.diameters)?)
        }
        Command::Compare(args) => commands::cmd_compare(&resolve(args, None, None)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ugbench: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
