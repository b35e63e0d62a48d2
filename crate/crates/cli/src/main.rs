use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use frolov_core::FrolovError;

mod commands;
mod output;

/// Powers of four from 2^6 to 2^20, the default scaling parameters.
pub const DEFAULT_N_LIST: [u64; 8] = [1 << 6, 1 << 8, 1 << 10, 1 << 12, 1 << 14, 1 << 16, 1 << 18, 1 << 20];

/// Default cap on estimated ellipsoid candidates for d >= 8.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Debug, Parser)]
#[command(name = "frolov", version, about = "Chebyshev-Frolov lattices, node enumeration and Frolov cubature")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub global: GlobalOpts,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Output format (basis defaults to json, everything else to csv).
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,

    /// Write the main output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for node enumeration.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,

    /// Accept nodes with |x_j| <= 1/2 + tolerance.
    #[arg(long, global = true, default_value_t = 0.0, allow_negative_numbers = true)]
    pub tolerance: f64,

    /// Run even when the candidate estimate exceeds the budget.
    #[arg(long, global = true)]
    pub force: bool,

    /// Candidate budget enforced for d >= 8 unless --force is given.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the Chebyshev system: roots, T, T~, S, Q, D and diagnostics.
    Basis {
        #[arg(long)]
        dim: usize,
    },
    /// Enumerate the cubature nodes in the unit cube.
    Nodes {
        #[arg(long)]
        dim: usize,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
    },
    /// Node and candidate counts with the relative overhead.
    Table(Scan),
    /// Check the candidate count against its theoretical bounds.
    Bounds(Scan),
    /// Integrate a built-in test function.
    Integrate {
        #[command(flatten)]
        scan: Scan,
        /// One of: const, quadbump, smoothbump.
        #[arg(long)]
        integrand: String,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Scan {
    #[arg(long)]
    pub dim: usize,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), conflicts_with = "n_list")]
    pub n: Option<u64>,
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u64).range(1..))]
    pub n_list: Option<Vec<u64>>,
}

impl Scan {
    pub fn values(&self) -> Vec<u64> {
        match (&self.n, &self.n_list) {
            (Some(n), _) => vec![*n],
            (None, Some(list)) => list.clone(),
            (None, None) => DEFAULT_N_LIST.to_vec(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    ResourceGuard(String),
    #[error(transparent)]
    Core(#[from] FrolovError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(
                FrolovError::DegenerateDimension(_) | FrolovError::Domain(_) | FrolovError::DimensionMismatch { .. },
            ) => 2,
            CliError::ResourceGuard(_) => 3,
            _ => 1,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out: Box<dyn Write> = match &cli.global.out {
        Some(path) => match File::create(path) {
            Ok(f) => Box::new(BufWriter::new(f)),
            Err(e) => {
                eprintln!("error: cannot create {}: {e}", path.display());
                return ExitCode::from(1);
            }
        },
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let result = commands::run(&cli, &mut out).and_then(|()| out.flush().map_err(CliError::from));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
