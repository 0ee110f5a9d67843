//! Command-line front end: generate a base ensemble from a dataset, build
//! a consensus from it, and assign new points with the fitted model.

pub mod commands;
pub mod config;
pub mod report;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use commands::run;
pub use config::{Config, ReportFormat};

#[derive(Debug, Parser)]
#[command(
    name = "ensemble-consensus",
    version,
    about = "Multi-objective consensus clustering"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the dataset and write a k-means base ensemble with its manifest.
    Generate(GenerateArgs),
    /// Estimate k, refine, evolve and write the consensus partition and report.
    Consensus(ConsensusArgs),
    /// Label the rows of a CSV with a saved model.
    Assign(AssignArgs),
}

#[derive(Debug, clap::Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct ConsensusArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Defaults to the manifest's directory.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub generations: Option<usize>,
    #[arg(long)]
    pub population: Option<usize>,
    /// Also write the threshold sweep as sweep.csv.
    #[arg(long)]
    pub emit_sweep: bool,
    /// Also write the per-generation trace as trace.csv.
    #[arg(long)]
    pub emit_trace: bool,
    #[arg(long, value_enum)]
    pub format: Option<ReportFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AssignMethod {
    Centroid,
    Knn,
}

#[derive(Debug, clap::Args)]
pub struct AssignArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "centroid")]
    pub method: AssignMethod,
    #[arg(long, default_value_t = 5)]
    pub k_nn: usize,
    /// Labels file; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] consensus_core::Error),
    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    /// 1 for algorithmic failures, 2 for usage and IO problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if !e.is_usage() => 1,
            _ => 2,
        }
    }
}
