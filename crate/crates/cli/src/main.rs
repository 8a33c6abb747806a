//! `gaussep`: separability analysis of bipartite Gaussian states.
//!
//! Exit codes: 0 ok / separable, 1 malformed input or usage, 2 invalid
//! state, 3 not separable, 4 inconclusive, 5 criterion 4 not applicable.

mod commands;
mod csv;
mod input;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error(transparent)]
    Core(#[from] gaussep::Error),
}

impl CliError {
    pub fn parse(msg: impl Into<String>) -> Self {
        CliError::Parse(msg.into())
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        use gaussep::Error as E;
        match self {
            CliError::Parse(_) | CliError::Usage(_) | CliError::Io(_) => exit::PARSE,
            CliError::InvalidState(_) => exit::INVALID_STATE,
            CliError::NotApplicable(_) => exit::NOT_APPLICABLE,
            CliError::Core(E::InvalidState { .. } | E::NotPositiveDefinite { .. }) => exit::INVALID_STATE,
            CliError::Core(E::NotApplicable { .. } | E::InvalidLambda(_)) => exit::NOT_APPLICABLE,
            CliError::Core(_) => exit::PARSE,
        }
    }
}

pub mod exit {
    pub const OK: u8 = 0;
    pub const PARSE: u8 = 1;
    pub const INVALID_STATE: u8 = 2;
    pub const NOT_SEPARABLE: u8 = 3;
    pub const INCONCLUSIVE: u8 = 4;
    pub const NOT_APPLICABLE: u8 = 5;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Summary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    Uniform,
    Coordinate,
    NelderMead,
}

#[derive(Debug, Parser)]
#[command(name = "gaussep", version, about = "Separability of bipartite Gaussian states")]
pub struct Cli {
    /// Override ħ from the input file.
    #[arg(long, global = true)]
    pub hbar: Option<f64>,
    /// Override the numerical tolerance: purity test for `check`,
    /// normal-form pattern tolerance for `analyze`, `region` and `project`.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quantum condition, symplectic spectrum and purity.
    Check { input: PathBuf },
    /// PPT test followed by the sufficient criteria, stopping at the first
    /// that certifies separability.
    Analyze {
        input: PathBuf,
        /// Criteria to run, e.g. `1,2,3` or `all`.
        #[arg(long, default_value = "all")]
        criteria: String,
        /// `search`, or a comma-separated ε vector for criterion 3.
        #[arg(long, default_value = "search")]
        epsilon: String,
        /// `scan`, or explicit criterion-4 parameters: `a,b` for one coupled
        /// pair, otherwise all `a_j` followed by all `b_k`.
        #[arg(long, default_value = "scan")]
        ab: String,
        /// Refinement after the scalar ε grid.
        #[arg(long, value_enum, default_value_t = Strategy::Coordinate)]
        strategy: Strategy,
    },
    /// Rasterize the feasible `(a_j, b_j)` region of criterion 4.
    Region {
        input: PathBuf,
        /// Pair index, 1-based.
        #[arg(long, default_value_t = 1)]
        j: usize,
        /// Resolution `RxC` (a samples × b samples).
        #[arg(long, default_value = "200x200")]
        grid: String,
        #[arg(long)]
        out: PathBuf,
        /// Analytic boundary curves; defaults to `<out>` with a `_boundary` suffix.
        #[arg(long)]
        boundary_out: Option<PathBuf>,
    },
    /// Shadow of the covariance ellipsoid on a coordinate plane.
    Project {
        input: PathBuf,
        /// Two coordinates such as `x_A,p_B` (`x_A2` for mode 2), or a
        /// one-mode subsystem `A` / `B`.
        #[arg(long)]
        plane: String,
        #[arg(long)]
        out: PathBuf,
        /// Also project the certificate ellipsoid of criterion 4 at these
        /// parameters (same syntax as `analyze --ab`).
        #[arg(long)]
        blob: Option<String>,
        #[arg(long, default_value_t = 360)]
        points: usize,
    },
    /// The marginal state of one subsystem.
    Reduce {
        input: PathBuf,
        #[arg(long, default_value = "A")]
        subsystem: String,
    },
    /// Peres–Horodecki test alone.
    Ppt { input: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("gaussep: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
