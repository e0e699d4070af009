//! `treeformat`: generate, compress, inspect and verify tree-based tensor
//! representations stored as JSON files.
//!
//! Exit codes: 0 on success, 1 when a verification record fails, 2 on input
//! errors. Diagnostics go to standard error as JSON objects.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "treeformat", version, about = "Tree-based tensor formats over dimension partition trees")]
pub struct Cli {
    /// Suppress the JSON summary on standard output.
    #[arg(long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a random dense tensor or tree tensor.
    Gen(GenArgs),
    /// Hierarchical SVD of a dense tensor into a tree tensor.
    Compress(CompressArgs),
    /// Evaluate a tree tensor into a dense tensor.
    Reconstruct(ReconstructArgs),
    /// Tree rank of a dense tensor.
    Rank(RankArgs),
    /// Truncate a dense tensor to rank caps.
    Truncate(TruncateArgs),
    /// Multi-start ALS approximation with rank caps.
    Approx(ApproxArgs),
    /// Estimate the injective norm of a dense tensor.
    Norm(NormArgs),
    /// Run verification suites on a dense tensor.
    Verify(VerifyArgs),
    /// Describe a file, optionally comparing it with another tensor.
    Info(InfoArgs),
}

#[derive(Args, Debug)]
pub struct SeedArg {
    /// Random seed; defaults to $TT_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// Mode sizes, e.g. 2,3,4.
    #[arg(long, value_delimiter = ',', required = true)]
    pub shape: Vec<usize>,
    /// Tree in parenthesized notation, or tucker|linear|balanced.
    #[arg(long)]
    pub tree: Option<String>,
    /// Write a random tree tensor with these ranks.
    #[arg(long, conflicts_with_all = ["elementary", "sum"])]
    pub ranks: Option<String>,
    /// Write an elementary tensor with Gaussian factors.
    #[arg(long, conflicts_with = "sum")]
    pub elementary: bool,
    /// Write a sum of this many Gaussian elementary tensors.
    #[arg(long)]
    pub sum: Option<usize>,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct CompressArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub tree: String,
    /// Relative per-vertex tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Rank caps.
    #[arg(long)]
    pub ranks: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ReconstructArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct RankArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub tree: String,
    /// Also report ranks of every proper subset (d ≤ 5).
    #[arg(long)]
    pub all_subsets: bool,
    /// Relative rank tolerance.
    #[arg(long)]
    pub rtol: Option<f64>,
    /// Write the rank tuple to a file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TruncateArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub tree: String,
    #[arg(long)]
    pub ranks: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ApproxArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub tree: String,
    #[arg(long)]
    pub ranks: String,
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
    #[arg(long, default_value_t = 50)]
    pub max_iters: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct NormArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
    #[arg(long, default_value_t = 200)]
    pub iters: usize,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Duality,
    Nestedness,
    Spans,
    Roundtrip,
    All,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub tree: String,
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Args, Debug)]
pub struct InfoArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Dense or tree tensor to compare against.
    #[arg(long)]
    pub compare: Option<PathBuf>,
}

/// A failure with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub diagnostic: Value,
}

impl Failure {
    pub fn input(kind: &str, message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            diagnostic: json!({ "error": kind, "message": message.into() }),
        }
    }
}

impl From<treeformat::Error> for Failure {
    fn from(e: treeformat::Error) -> Self {
        let mut d = json!({ "error": e.kind(), "message": e.to_string() });
        if let Some(v) = e.vertex() {
            d["vertex"] = Value::from(v);
        }
        Failure { code: 2, diagnostic: d }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let message = e.to_string();
            let first = message.lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            eprintln!("{}", json!({ "error": "UsageError", "message": first }));
            return ExitCode::from(2);
        }
    };
    match commands::run(&cli) {
        Ok(outcome) => {
            if let Some(summary) = outcome.summary {
                if !cli.quiet || outcome.always_print {
                    println!("{summary}");
                }
            }
            ExitCode::from(outcome.code)
        }
        Err(f) => {
            eprintln!("{}", f.diagnostic);
            ExitCode::from(f.code)
        }
    }
}
