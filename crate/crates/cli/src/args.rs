use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use covert_core::distances::DistanceMeasure;
use covert_core::scalar::parse_decimal;
use covert_core::search::{SubsetStrategy, Variant};
use covert_core::Rational;

#[derive(Debug, Parser)]
#[command(
    name = "covert-planner",
    version,
    about = "Plans with controlled observability, and an oracle that checks them"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search for a k-ambiguous, j-legible, ℓ-diverse or m-similar plan.
    Plan(PlanArgs),
    /// Check a plan record against the oracle.
    Verify(VerifyArgs),
    /// Print the observation trace and belief sequence of a plan.
    Trace(TraceArgs),
    /// Run every problem in a directory and summarize per domain and variant.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Grounded PDDL domain; defaults to the problem's `domain:` entry.
    #[arg(long)]
    pub domain: Option<PathBuf>,
    /// Keyword/value problem file.
    #[arg(long)]
    pub problem: PathBuf,
    /// Observation rule file; defaults to the problem's `observations:` entry.
    #[arg(long)]
    pub obs: Option<PathBuf>,
    /// Add a zero-effect `pretend-<token>` action per token.
    #[arg(long)]
    pub noops: bool,
}

fn decimal(s: &str) -> Result<Rational, String> {
    parse_decimal(s).ok_or_else(|| format!("`{s}` is not a decimal number"))
}

fn measure(s: &str) -> Result<DistanceMeasure, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn seconds(s: &str) -> Result<Duration, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number of seconds"))?;
    if v.is_finite() && v > 0.0 {
        Ok(Duration::from_secs_f64(v))
    } else {
        Err(format!("`{s}` is not a positive number of seconds"))
    }
}

/// Variant parameters. Flags override the problem file, which overrides
/// the built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    #[arg(long, value_parser = |s: &str| s.parse::<Variant>())]
    pub variant: Option<Variant>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub j: Option<usize>,
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Distance threshold: `d_min` for ldiv, `d_max` for msim.
    #[arg(long, value_parser = decimal)]
    pub d: Option<Rational>,
    /// action, causal or state.
    #[arg(long, value_parser = measure)]
    pub distance: Option<DistanceMeasure>,
    #[arg(long = "cost-bound", value_parser = decimal)]
    pub cost_bound: Option<Rational>,
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    #[arg(long = "delta-max", default_value_t = 1)]
    pub delta_max: usize,
    /// Seed for random tie-breaking noise on the heuristic.
    #[arg(long = "heuristic-noise")]
    pub heuristic_noise: Option<u64>,
    /// lex or farthest-first.
    #[arg(long = "subset-strategy", default_value = "lex", value_parser = |s: &str| s.parse::<SubsetStrategy>())]
    pub subset_strategy: SubsetStrategy,
    /// Seconds allowed per plan call.
    #[arg(long, default_value = "1800", value_parser = seconds)]
    pub timeout: Duration,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Write the record here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Plan record produced by `plan`.
    #[arg(long)]
    pub plan: PathBuf,
    /// Enumeration work budget before the verdict turns inconclusive.
    #[arg(long, default_value_t = covert_core::oracle::DEFAULT_BUDGET)]
    pub budget: usize,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Plan record, or a text file with one action name per line.
    #[arg(long)]
    pub plan: PathBuf,
    /// Include every belief state, not just the sizes.
    #[arg(long)]
    pub beliefs: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Directory of problem files (`*.txt` or `*.problem`).
    #[arg(long)]
    pub suite: PathBuf,
    /// Variants to run; defaults to each problem's own variant, or all four.
    #[arg(long = "variant", value_parser = |s: &str| s.parse::<Variant>())]
    pub variants: Vec<Variant>,
    #[arg(long)]
    pub noops: bool,
    #[command(flatten)]
    pub search: SearchArgs,
}
