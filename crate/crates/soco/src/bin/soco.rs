//! Command-line front end: builds an `ExperimentConfig` from a JSON config
//! file plus flags (flags win) and runs it.

use clap::{Args, Parser, Subcommand};
use soco::harness::{run_experiment, ExperimentConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "soco",
    about = "Smoothed online convex optimization lab",
    version
)]
struct Cli {
    /// JSON config file mirroring the flags; explicit flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Play one algorithm against one instance and export the trajectory.
    Run(CommonArgs),
    /// Measure ratios across a curvature grid and fit the log-log slope.
    Sweep(SweepArgs),
    /// Reproduce one of the lower-bound constructions.
    Lowerbound(LowerboundArgs),
    /// Movement-budgeted regret of R-OBD on a random quadratic stream.
    Regret(RegretArgs),
}

#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// obd | gobd | robd | stay | follow
    #[arg(long)]
    algo: Option<String>,
    /// ramp | drift | single | fixedpoint | circle | random-quadratic
    #[arg(long)]
    instance: Option<String>,
    /// Curvature (strong convexity / growth) parameter of the hitting costs.
    #[arg(long)]
    m: Option<f64>,
    /// OBD / G-OBD balance parameter.
    #[arg(long)]
    gamma: Option<f64>,
    /// G-OBD blend parameter.
    #[arg(long)]
    mu: Option<f64>,
    /// R-OBD movement-regularizer weight (defaults to the optimal value).
    #[arg(long)]
    lambda1: Option<f64>,
    /// R-OBD minimizer-regularizer weight.
    #[arg(long)]
    lambda2: Option<f64>,
    /// Steep-round curvature for ramp/drift instances.
    #[arg(long)]
    mprime: Option<f64>,
    /// Flat-phase length for the ramp instance.
    #[arg(long)]
    n: Option<usize>,
    /// Horizon for fixedpoint/circle/random-quadratic instances.
    #[arg(long = "T")]
    horizon: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output base path; writes <out>.csv and <out>.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SweepArgs {
    /// Comma-separated curvature grid, e.g. 1e-3,3e-3,1e-2.
    #[arg(long, value_delimiter = ',')]
    m_grid: Option<Vec<f64>>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Clone)]
struct LowerboundArgs {
    /// theorem1 | theorem2 | theorem5
    #[arg(long)]
    which: Option<String>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Clone)]
struct RegretArgs {
    /// Movement budget (defaults to sqrt(T)).
    #[arg(long = "L")]
    budget: Option<f64>,
    #[command(flatten)]
    common: CommonArgs,
}

fn overlay(base: &mut ExperimentConfig, args: &CommonArgs) {
    macro_rules! set {
        ($($field:ident),*) => {
            $(if args.$field.is_some() {
                base.$field = args.$field.clone();
            })*
        };
    }
    set!(algo, instance, m, gamma, mu, lambda1, lambda2, mprime, n, horizon, seed, out);
}

fn load_base(path: &Option<PathBuf>) -> Result<ExperimentConfig, soco::Error> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            Ok(serde_json::from_str(&text)?)
        }
        None => Ok(ExperimentConfig::default()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match load_base(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    match &cli.cmd {
        Cmd::Run(a) => {
            cfg.cmd = "run".into();
            overlay(&mut cfg, a);
        }
        Cmd::Sweep(a) => {
            cfg.cmd = "sweep".into();
            if a.m_grid.is_some() {
                cfg.m_grid = a.m_grid.clone();
            }
            overlay(&mut cfg, &a.common);
        }
        Cmd::Lowerbound(a) => {
            cfg.cmd = "lowerbound".into();
            if a.which.is_some() {
                cfg.which = a.which.clone();
            }
            overlay(&mut cfg, &a.common);
        }
        Cmd::Regret(a) => {
            cfg.cmd = "regret".into();
            if a.budget.is_some() {
                cfg.budget = a.budget;
            }
            overlay(&mut cfg, &a.common);
        }
    }
    match run_experiment(&cfg) {
        Ok(report) => {
            match serde_json::to_string_pretty(&report) {
                Ok(s) => println!("{s}"),
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::FAILURE;
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
