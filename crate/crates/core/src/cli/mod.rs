mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

/// Exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVARIANT: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "neumann-layers",
    version,
    about = "Layered radial solutions of -Δu + u = u^p with Neumann conditions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the fundamental pair (ξ, ζ) and audit its invariants.
    Basis(CommonArgs),
    /// Solve the p = ∞ layer configuration for k layers.
    Limit(CommonArgs),
    /// Solve a finite-p k-layer solution.
    Solve(CommonArgs),
    /// Run the large-p validation checks over a sweep of exponents.
    Validate(CommonArgs),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    #[default]
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Space dimension (N >= 3).
    #[arg(long = "N")]
    pub n: Option<u32>,
    /// Exponent, or a comma-separated ascending sweep for `validate`.
    #[arg(long)]
    pub p: Option<String>,
    /// Number of layers.
    #[arg(long)]
    pub k: Option<usize>,
    /// Inner radius.
    #[arg(long)]
    pub a: Option<f64>,
    /// Outer radius.
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long = "rel-tol")]
    pub rel_tol: Option<f64>,
    #[arg(long = "abs-tol")]
    pub abs_tol: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Format of the summary printed to stdout.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Restrict `validate` to the named checks (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub check: Vec<String>,
    /// Write the output files only; print nothing to stdout.
    #[arg(long, short)]
    pub quiet: bool,
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("NEUMANN_LAYERS_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("NEUMANN_LAYERS_THREADS must be a positive integer, got '{v}'"))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

/// Entry point of the binary: honours `NEUMANN_LAYERS_THREADS`, then
/// behaves as [`run`] on the process arguments.
pub fn main() -> i32 {
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return EXIT_USAGE;
    }
    run(std::env::args_os())
}

/// Parse `args` (program name first), dispatch, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    commands::dispatch(&cli.command)
}
