mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use starode::{ParseError, SolveError};
use thiserror::Error;

const GRAMMAR: &str = "\
Expressions in t:
  expr    := term (('+' | '-') term)*
  term    := unary (('*' | '/') unary)*
  unary   := '-' unary | power
  power   := primary ('^' unary)?
  primary := number | pi | i | t | func '(' expr ')' | '(' expr ')'
  func    := sin | cos | exp | sqrt

'^' is right-associative and binds tighter than unary minus (-t^2 is
-(t^2)). Multiplication is always explicit: write 4*t, not 4t. Complex
values come from the constant i, e.g. -2*pi*i*cos(t).

Exit codes: 0 success, 2 expression or argument error, 3 solver failure,
4 I/O failure. STARODE_THREADS caps the worker threads.";

#[derive(Debug, Parser)]
#[command(name = "starode", version, about = "Spectral Legendre solver for u'(t) = f(t) u(t), u(-1) = 1 on [-1, 1]", after_long_help = GRAMMAR)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve and write report.json, coeffs.csv and error.csv.
    #[command(after_long_help = GRAMMAR)]
    Solve(RunArgs),
    /// Write the sparsity patterns of F and U = H (I - F)^-1.
    #[command(after_long_help = GRAMMAR)]
    Matrix(RunArgs),
    /// Write a basis matrix B^(d) as dense CSV.
    Basis(BasisArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Right-hand side f(t); see the grammar under --help.
    #[arg(long = "f", value_name = "EXPR", allow_hyphen_values = true)]
    pub function: String,
    /// Basis size M.
    #[arg(long = "M", value_name = "INT")]
    pub basis_size: usize,
    /// Drop tolerance when fitting f.
    #[arg(long, default_value = "1e-15")]
    pub fit_tol: f64,
    /// Magnitude threshold for numerical bandwidths and sparsity.
    #[arg(long, default_value = "2.2204e-16")]
    pub band_eps: f64,
    /// Number of equispaced points for the error measurement.
    #[arg(long, default_value_t = 1000)]
    pub grid: usize,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct BasisArgs {
    /// Degree d.
    #[arg(long = "d")]
    pub degree: usize,
    /// Basis size M.
    #[arg(long = "M", value_name = "INT")]
    pub basis_size: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot parse f: {0}")]
    Parse(#[from] ParseError),
    #[error("invalid argument: {0}")]
    Usage(String),
    #[error("solver failed: {0}")]
    Solve(#[from] SolveError),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("json output failed: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::Usage(_) => 2,
            CliError::Solve(_) => 3,
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 4,
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("STARODE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("STARODE_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Solve(args) => commands::solve(args),
        Command::Matrix(args) => commands::matrix(args),
        Command::Basis(args) => commands::basis(args),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("starode: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
