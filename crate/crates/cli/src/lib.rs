//! `qtomo`: state and process estimation, entanglement detection, witness
//! scans, phase-space diagnostics and Monte Carlo batches, each driven by a
//! TOML config and writing a JSON or CSV artifact.
//!
//! Exit codes: 0 on success, 1 when an estimator or run fails, 2 when the
//! config or command line is invalid.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

mod bench;
mod cv_cmd;
mod entangle;
mod error;
mod io;
mod process;
mod state;
mod witness;

pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "qtomo", version, about = "Quantum tomography estimators and diagnostics")]
pub struct Cli {
    /// Worker threads for the parallel stages; all cores when absent.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// TOML config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Artifact path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate a state from counts with ML, HML, MLME or exact ME.
    EstimateState(Common),
    /// Run an input-selection strategy on a simulated channel; per-round CSV.
    EstimateProcess(Common),
    /// Measure witness bases until entanglement is detected; JSON log.
    DetectEntanglement(Common),
    /// Rank every six-setting witness set; census CSV.
    WitnessScan(Common),
    /// Phase-space diagnostics.
    Cv {
        #[command(subcommand)]
        analysis: CvAnalysis,
    },
    /// Monte Carlo batch of estimator runs; per-run CSV.
    Benchmark(Common),
}

#[derive(Debug, Subcommand)]
pub enum CvAnalysis {
    /// Wigner function on a square grid.
    Wigner(Common),
    /// ℛ(τ) scan and nonclassicality depth.
    Depth(Common),
    /// Outcome probabilities and Gram rank of a detector POM.
    Pom(Common),
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        // A second call in the same process finds the pool already built; the first setting stays.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.command {
        Command::EstimateState(c) => state::run(c),
        Command::EstimateProcess(c) => process::run(c),
        Command::DetectEntanglement(c) => entangle::run(c),
        Command::WitnessScan(c) => witness::run(c),
        Command::Cv { analysis } => match analysis {
            CvAnalysis::Wigner(c) => cv_cmd::wigner(c),
            CvAnalysis::Depth(c) => cv_cmd::depth(c),
            CvAnalysis::Pom(c) => cv_cmd::pom(c),
        },
        Command::Benchmark(c) => bench::run(c),
    }
}
