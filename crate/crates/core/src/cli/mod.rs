//! Command-line front end.
//!
//! Exit codes: 0 success, 1 order violation detected, 2 configuration error,
//! 3 numerical error.

mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

pub use commands::Outcome;
pub use config::{
    CoefficientSpec, FamilySpec, KernelPair, ModelSpec, OrderSection, RateSection, RunConfig, SamplerSection,
    ScalarFnSpec, SideSpec, VixSection, FUNCTIONAL_KINDS,
};

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "volterra", version, about = "Simulate stochastic Volterra equations and test convex ordering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the effective configuration with all defaults and exit.
    #[arg(long, global = true)]
    print_config: bool,
    /// Overrides `master_seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "VOLTERRA_THREADS")]
    threads: Option<usize>,
    /// Overrides `output_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write `timing.json` with the wall-clock time.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Simulate a batch of paths.
    Simulate,
    /// Price the VIX premium of a quadratic rough Heston model.
    PriceVix,
    /// Monte Carlo test of a convex-order conclusion.
    CheckOrder,
    /// Sample-based check of the comparison hypotheses.
    CheckHypotheses,
    /// Empirical strong convergence rate.
    Rate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::PriceVix => "price-vix",
            Command::CheckOrder => "check-order",
            Command::CheckHypotheses => "check-hypotheses",
            Command::Rate => "rate",
        }
    }
}

/// Runs the binary with the process arguments.
pub fn run() -> i32 {
    run_with_args(std::env::args_os())
}

/// Runs the binary with explicit arguments (the first is the program name).
pub fn run_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    if cli.print_config {
        println!("{}", cfg.pretty());
        return EXIT_OK;
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return EXIT_NUMERICAL;
        }
    };
    let out = PathBuf::from(&cfg.output_dir);
    let start = Instant::now();
    let result = pool.install(|| match cli.command {
        Command::Simulate => commands::simulate(&cfg, &out),
        Command::PriceVix => commands::price_vix(&cfg, &out),
        Command::CheckOrder => commands::check_order(&cfg, &out),
        Command::CheckHypotheses => commands::check_hypotheses(&cfg, &out),
        Command::Rate => commands::rate(&cfg, &out),
    });
    let finished = result.and_then(|(outcome, mut manifest)| {
        if cli.timing {
            manifest.wall_clock_seconds = Some(start.elapsed().as_secs_f64());
        }
        manifest.write(&out)?;
        Ok(outcome)
    });
    match finished {
        Ok(Outcome::Ok) => EXIT_OK,
        Ok(Outcome::Violation) => {
            eprintln!("{}: order violation detected", cli.command.name());
            EXIT_VIOLATION
        }
        Err(e) => {
            eprintln!("error: {}: {e}", cli.command.name());
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_config_error() {
        EXIT_CONFIG
    } else {
        EXIT_NUMERICAL
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Error> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config <path> is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = RunConfig::from_json(&text)?;
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.to_string_lossy().into_owned();
    }
    Ok(cfg)
}
