//! Command-line front end: single-pair tests, all-pairs matrices, simulation
//! presets and probability estimation from cohort counts.
//!
//! Exit codes: 0 on success, 2 for malformed input or invalid arguments, 3 for
//! a tumor id missing from the mutation file.

pub mod commands;
pub mod formats;

use std::io;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use clonality::null::{DEFAULT_ALPHA, DEFAULT_EXACT_MAX, DEFAULT_SEED, DEFAULT_SIMS};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("cannot read {path}: {source}")]
    Io { path: String, source: io::Error },

    #[error("unknown tumor id `{0}`")]
    UnknownTumor(String),

    #[error("tumor `{0}`: no mutations observed; test undefined")]
    NoMutations(String),

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] clonality::Error),

    #[error("writing output: {0}")]
    Output(#[source] io::Error),
}

impl CliError {
    pub fn parse(path: &str, line: usize, message: impl Into<String>) -> Self {
        CliError::Parse {
            path: path.to_string(),
            line,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::UnknownTumor(_) => 3,
            CliError::Output(_) => 1,
            _ => 2,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Output(e)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "clonality",
    version,
    about = "Test whether two tumors are clonally related from their mutation profiles"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test one tumor pair and print the result as JSON.
    Test(TestArgs),
    /// Test every tumor pair and print a matrix of p-values.
    Pairs(PairsArgs),
    /// Estimate size and power of the test under a simulation preset.
    Simulate(SimulateArgs),
    /// Turn cohort counts into marker probabilities.
    EstimateProbs(EstimateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Mutation file: `tumor_id<TAB>marker_id` rows.
    #[arg(long)]
    pub mutations: PathBuf,
    /// Probability file: `marker_id<TAB>probability` or counts rows.
    #[arg(long)]
    pub probs: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct NullArgs {
    /// Monte Carlo draws from the null when enumeration is too large.
    #[arg(long, default_value_t = DEFAULT_SIMS)]
    pub sims: usize,
    /// Enumerate the null exactly when at most this many markers are mutated.
    #[arg(long, default_value_t = DEFAULT_EXACT_MAX)]
    pub exact_max: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Worker threads (results do not depend on this).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub tumor_a: String,
    #[arg(long)]
    pub tumor_b: String,
    #[command(flatten)]
    pub null: NullArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PairsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub null: NullArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Preset name, e.g. `table2-m10`, `table3-inflate`, `table4-corr-0.9`.
    #[arg(long, required_unless_present = "scenario")]
    pub preset: Option<String>,
    /// JSON scenario file used instead of a preset.
    #[arg(long, conflicts_with = "preset")]
    pub scenario: Option<PathBuf>,
    /// Clonality signal; a comma-separated list gives one row per value.
    #[arg(long, value_delimiter = ',', required_unless_present_any = ["scenario"])]
    pub xi: Vec<f64>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub sims: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Mutated sets up to this size use exact enumeration.
    #[arg(long)]
    pub exact_max: Option<usize>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Write the TSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the resolved scenario as JSON and exit.
    #[arg(long)]
    pub print_scenario: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    /// Counts file: `marker_id, ref_mutated, ref_total, study_mutated[, study_total]`.
    #[arg(long)]
    pub counts: PathBuf,
    /// Study cohort size, used where `study_total` is absent.
    #[arg(long)]
    pub study_size: u64,
}

pub fn run(cli: Cli, out: &mut dyn io::Write) -> Result<(), CliError> {
    match cli.command {
        Command::Test(args) => commands::test(&args, out),
        Command::Pairs(args) => commands::pairs(&args, out),
        Command::Simulate(args) => commands::simulate(&args, out),
        Command::EstimateProbs(args) => commands::estimate_probs(&args, out),
    }
}
