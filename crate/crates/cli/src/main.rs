//! `bgeo`: batch front end for the invariant-metric toolkit. Five
//! subcommands mirror the library surface: `kernel`, `metric`, `curvature`,
//! `hsc`, and `disk`. Every run echoes its configuration, writes one table
//! (CSV, or JSON as `{config, rows, summary}`) to standard output or
//! `--out`, and logs a digest to standard error. Identical configurations
//! produce byte-identical output regardless of worker-thread count.
//!
//! Exit status: 0 when every non-flagged check passes, 1 when a check
//! fails or a computation errors, 2 for invalid usage or configuration.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::CliError;
use crate::config::{validate_p_list, OutputFormat, RunConfig};

#[derive(Parser)]
#[command(
    name = "bgeo",
    version,
    about = "Invariant-metric geometry scans and unit-disk potential bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Both kernel routes and their agreement, on a lattice plus a seeded random sample
    Kernel(CommonArgs),
    /// Closed metric versus finite differences, inverse and determinant identities, limits
    Metric(CommonArgs),
    /// Curvature factor tables, the identity suite, and boundary-limit extrapolations
    Curvature(CommonArgs),
    /// Frame curvature report over the lattice, optionally with the Einstein-constant fit
    Hsc(HscArgs),
    /// Unit-disk potential theory: phi routes, ring integral, inequality, heat bound, constants
    Disk(DiskArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Domain exponent p (positive)
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    p: f64,
    /// Domain exponent lambda (positive)
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    lambda: f64,
    /// Lattice ROWSxCOLS over (y, z) in [0.05, 0.95]^2
    #[arg(long, default_value = "10x10")]
    grid: String,
    /// Skip cells whose boundary parameter delta exceeds this cap
    #[arg(long, allow_negative_numbers = true)]
    delta_cap: Option<f64>,
    /// Tolerance for the gated comparisons (default depends on the subcommand)
    #[arg(long, allow_negative_numbers = true)]
    tol: Option<f64>,
    /// Output format
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Write the table to this file instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for the randomized sample suites
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl CommonArgs {
    fn into_config(self, default_delta_cap: f64, default_tol: f64) -> Result<RunConfig, CliError> {
        Ok(RunConfig::new(
            self.p,
            self.lambda,
            &self.grid,
            self.delta_cap,
            default_delta_cap,
            self.tol,
            default_tol,
            self.format,
            self.out,
            self.seed,
        )?)
    }
}

#[derive(Args)]
struct HscArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Fit the Einstein constant over the canonical samples and report the residual
    #[arg(long)]
    ke: bool,
}

#[derive(Args)]
struct DiskArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Exponents for the gradient-energy inequality table (each at least 2)
    #[arg(long = "p-list", value_delimiter = ',', default_value = "2,2.5,3,4,6")]
    p_list: Vec<f64>,
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let (cfg, result) = match cli.command {
        Cmd::Kernel(args) => {
            let cfg = args.into_config(0.95, 1e-12)?;
            let result = commands::kernel::run(&cfg)?;
            (cfg, result)
        }
        Cmd::Metric(args) => {
            let cfg = args.into_config(0.95, 1e-6)?;
            let result = commands::metric::run(&cfg)?;
            (cfg, result)
        }
        Cmd::Curvature(args) => {
            let cfg = args.into_config(0.95, 1e-8)?;
            let result = commands::curvature::run(&cfg)?;
            (cfg, result)
        }
        Cmd::Hsc(args) => {
            let cfg = args.common.into_config(0.999, 1e-6)?;
            let result = commands::hsc::run(&cfg, args.ke)?;
            (cfg, result)
        }
        Cmd::Disk(args) => {
            validate_p_list(&args.p_list)?;
            let cfg = args.common.into_config(0.95, 1e-6)?;
            let result = commands::disk::run(&cfg, &args.p_list)?;
            (cfg, result)
        }
    };
    Ok(output::emit(&result, &cfg)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("[bgeo] exit: check failures");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("[bgeo] error: {e}");
            ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(1))
        }
    }
}
