//! Batch front-end: `integrate`, `verify`, `superpose`, `tables` and `contract`.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 usage or config error,
//! 3 numerical abort.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::{CliError, Context};
use config::ExperimentConfig;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "cklh", version, about = "Lie-Hamilton systems on the nine Cayley-Klein planes")]
pub struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for random sampling; overrides `seed` in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Override a tolerance, e.g. `--tol superposition=1e-6`. Repeatable.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE", value_parser = parse_tol)]
    pub tol: Vec<(String, f64)>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Integrate the system from each initial point and write trajectories.
    Integrate,
    /// Run every verification suite.
    Verify,
    /// Rebuild one solution from two others and check it against integration.
    Superpose,
    /// Compare the generic evaluation with the per-space closed forms.
    Tables,
    /// Continuity report for kappa -> 0.
    Contract,
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let v: f64 = value.trim().parse().map_err(|e| format!("`{value}`: {e}"))?;
    if v.is_nan() || v < 0.0 {
        return Err(format!("tolerance `{name}` must be a non-negative number"));
    }
    Ok((name.trim().to_string(), v))
}

pub fn context(cli: &Cli) -> Result<Context, CliError> {
    let config = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let mut tolerances = config.tolerances.clone();
    for (name, v) in &cli.tol {
        tolerances.set(name, *v).map_err(|e| {
            CliError::Usage(format!("{e}; known: {}", cklh::verify::Tolerances::NAMES.join(", ")))
        })?;
    }
    Ok(Context {
        seed: cli.seed.or(config.seed).unwrap_or(0),
        out: cli.out.clone(),
        tolerances,
        config,
    })
}

pub fn execute(cli: &Cli) -> Result<bool, CliError> {
    let ctx = context(cli)?;
    match cli.command {
        Command::Integrate => commands::integrate_cmd(&ctx),
        Command::Verify => commands::verify_cmd(&ctx),
        Command::Superpose => commands::superpose_cmd(&ctx),
        Command::Tables => commands::tables_cmd(&ctx),
        Command::Contract => commands::contract_cmd(&ctx),
    }
}

/// Parses arguments, runs the subcommand and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    match execute(&cli) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
