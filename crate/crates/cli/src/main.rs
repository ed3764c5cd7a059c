//! `sumprod`: prove and falsify entropy statements, generate grid sets and
//! run discretised sum–product experiments.

mod config;
mod error;
mod lab_cmds;
mod logic_cmds;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::Config;
use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "sumprod", version, about = "Entropy inequality prover and sum-product lab")]
struct Cli {
    /// Worker threads (default: all cores). Results never depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON file of per-command defaults, e.g. {"sumproduct": {"c": 0.05}}. Flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Prove a statement in the Shannon cone (exit 0 proved, 2 not provable, 1 error).
    Prove(ProveArgs),
    /// Search random joint distributions for a counterexample (exit 3 if found).
    Falsify(FalsifyArgs),
    /// Entropies of expressions under a joint distribution file.
    Entropy(EntropyArgs),
    /// Generate a grid set.
    Setgen(SetgenArgs),
    /// Covering-number experiment over scales, written as CSV plus manifest.
    Sumproduct(SumproductArgs),
    /// Evaluate a discretised slope inequality on a grid set.
    Slope(SlopeArgs),
    /// Summarize a run directory and check its hashes.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
pub struct ProveArgs {
    /// Statement text.
    pub statement: Option<String>,
    /// Read the statement from a file.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Run a canned suite (`standard`).
    #[arg(long)]
    pub suite: Option<String>,
    /// Ground-variable cap.
    #[arg(long)]
    pub cap: Option<usize>,
    /// Seed for determination validation.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FalsifyArgs {
    pub statement: String,
    /// Trials per field.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Comma-separated primes.
    #[arg(long)]
    pub fields: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EntropyArgs {
    /// Joint distribution JSON `{field, variables, atoms: [[values], "p/q"]}`.
    #[arg(long)]
    pub joint: PathBuf,
    /// Field size; overrides the file's.
    #[arg(long)]
    pub field: Option<u64>,
    /// Expression tuples such as `A+B` or `A,B*C`.
    pub exprs: Vec<String>,
    /// Also evaluate this statement's slack.
    #[arg(long)]
    pub statement: Option<String>,
}

#[derive(Args, Debug)]
pub struct SetgenArgs {
    /// full | digit | cantor | random | apgp | discretise
    pub generator: String,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Free digit positions for `digit`, comma-separated (overrides --sigma).
    #[arg(long)]
    pub free: Option<String>,
    /// Cantor depth (default n).
    #[arg(long)]
    pub depth: Option<u32>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Digit positions per block for `apgp`.
    #[arg(long)]
    pub block: Option<u32>,
    /// JSON list of reals for `discretise`.
    #[arg(long)]
    pub points: Option<PathBuf>,
    /// Run-length encode the cell list.
    #[arg(long)]
    pub rle: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SumproductArgs {
    /// Grid set file (one row at its scale).
    #[arg(long)]
    pub set: Option<PathBuf>,
    /// full | digit | cantor | random | apgp
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `8..14`, `8..=14` or `8,10,12`.
    #[arg(long)]
    pub scales: Option<String>,
    /// Exponent for the check max(N(A+A), N(A·A)) ≥ 2^{cn}|A|.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub guard: Option<u32>,
    /// Also evaluate the second slope inequality per scale.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub slope: Option<bool>,
    /// Run directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SlopeArgs {
    #[arg(long)]
    pub set: PathBuf,
    /// 1..=4
    #[arg(long)]
    pub variant: Option<u8>,
    #[arg(long)]
    pub guard: Option<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    pub dir: PathBuf,
    /// table | json
    #[arg(long, default_value = "table")]
    pub format: String,
}

fn run(cli: Cli) -> Result<u8, CliError> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    let config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    match cli.command {
        Command::Prove(a) => logic_cmds::prove(a, &config),
        Command::Falsify(a) => logic_cmds::falsify(a, &config),
        Command::Entropy(a) => logic_cmds::entropy(a),
        Command::Setgen(a) => lab_cmds::setgen(a, &config),
        Command::Sumproduct(a) => lab_cmds::sumproduct(a, &config),
        Command::Slope(a) => lab_cmds::slope(a, &config),
        Command::Report(a) => lab_cmds::report(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) as u8 ^ 1;
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
