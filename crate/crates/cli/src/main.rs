//! `entropylab` experiment runner.
//!
//! Exit codes: 0 success, 2 invalid config, 3 enumeration budget refusal,
//! 4 property violation detected (the report is still written).

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use entropylab::Budget;

use crate::output::Format;

/// Environment variable overriding the exact-enumeration budget.
pub const BUDGET_ENV: &str = "ENTROPYLAB_BUDGET";

#[derive(Parser)]
#[command(
    name = "entropylab",
    version,
    about = "Entropy and typical-set experiments on tracial algebras"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Typical-set mass of a Bernoulli or Markov source, one row per n.
    Smb(SmbArgs),
    /// Structure sequence of the binary shift algebra for a commutation set X.
    Binshift(BinshiftArgs),
    /// Pair-entropy defect identity over seeded random commuting pairs.
    Lemma32(Lemma32Args),
    /// Entropy and trace band of a multi-matrix algebra read from JSON.
    Algebra(AlgebraArgs),
    /// Band transfer between a partition and its refinement or coarsening.
    Transfer(TransferArgs),
    /// Mean-generator defect sequence, nested check and independence test.
    Defect(DefectArgs),
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct SourceArgs {
    /// Bernoulli source with P(symbol 0) = q.
    #[arg(long, value_name = "Q")]
    pub bernoulli: Option<f64>,
    /// Markov source from JSON: {"P": [[...]], "labels": [...]}.
    #[arg(long, value_name = "FILE")]
    pub markov: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct OutArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Debug)]
pub struct SmbArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Word lengths: `20`, `1..16` (inclusive), `1..=16` or `10,20,40`.
    #[arg(long)]
    pub n: String,
    #[arg(long)]
    pub eps: f64,
    /// Exact enumeration of all atoms (default).
    #[arg(long, conflicts_with = "mc")]
    pub exact: bool,
    /// Monte-Carlo estimate with a 99% confidence interval.
    #[arg(long)]
    pub mc: bool,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct BinshiftArgs {
    /// Finite part of X as a comma list; the empty string is the empty set.
    #[arg(long, conflicts_with = "x_json")]
    pub x: Option<String>,
    /// Period of the eventually periodic part of X.
    #[arg(long, requires = "residues", conflicts_with = "x_json")]
    pub period: Option<u64>,
    /// Residues modulo the period, as a comma list.
    #[arg(long, requires = "period")]
    pub residues: Option<String>,
    /// X from JSON: {"base": [...], "period": p, "residues": [...]}.
    #[arg(long, value_name = "FILE")]
    pub x_json: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    pub nmax: usize,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    /// Output prefix: writes PREFIX.csv and PREFIX.json.
    #[arg(long, value_name = "PREFIX")]
    pub out: Option<PathBuf>,
    /// Stdout format when no prefix is given.
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct Lemma32Args {
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct AlgebraArgs {
    /// Multi-matrix JSON: {"summands": [{"m": 2, "t": 0.25, "count": 1}, ...]}.
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    /// Band lengths; band rows are emitted only when given.
    #[arg(long, requires_all = ["h", "eps"])]
    pub n: Option<String>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Refine,
    Coarsen,
}

#[derive(Args, Debug)]
pub struct TransferArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long)]
    pub n: String,
    /// Gap p for `refine`, prefix depth m for `coarsen`.
    #[arg(long)]
    pub param: usize,
    #[arg(long)]
    pub eps: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct DefectArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Separation between consecutive blocks.
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    #[arg(long)]
    pub n: String,
    /// Image symbol per source symbol, e.g. `0,1,1`; runs the nested check.
    #[arg(long)]
    pub coarse_map: Option<String>,
    /// Also test independence of blocks separated by p.
    #[arg(long)]
    pub independence: bool,
    #[arg(long, default_value_t = 3)]
    pub n_probe: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

fn budget_from_env() -> Result<Budget, String> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .ok()
            .filter(|&b| b > 0)
            .map(Budget)
            .ok_or_else(|| format!("{BUDGET_ENV} must be a positive integer, got {v:?}")),
        Err(std::env::VarError::NotPresent) => Ok(Budget::default()),
        Err(e) => Err(format!("{BUDGET_ENV}: {e}")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let budget = match budget_from_env() {
        Ok(b) => b,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Smb(a) => commands::smb(&a, budget),
        Command::Binshift(a) => commands::binshift(&a),
        Command::Lemma32(a) => commands::lemma32(&a),
        Command::Algebra(a) => commands::algebra(&a),
        Command::Transfer(a) => commands::transfer(&a, budget),
        Command::Defect(a) => commands::defect(&a, budget),
    };
    match result.and_then(commands::Outcome::write) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(violation)) => {
            eprintln!("property violation: {violation}");
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
