use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::commands::{
    BoundsFlatnessArgs, BoundsNnArgs, ExponentsArgs, ParamsArgs, SimulateDecodeArgs,
    SimulateEnsembleArgs, SimulateLgArgs, VerifyArgs,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "lattigauss",
    version,
    about = "Construction-A lattice coding experiments"
)]
pub struct Cli {
    /// JSON run configuration; command-line flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; capped by LATTIGAUSS_THREADS.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parameter schedules and their compatibility checks.
    Params(ParamsArgs),
    /// Nearest-neighbour decoding error bound.
    BoundsNn(BoundsNnArgs),
    /// Ensemble flatness-factor bounds.
    BoundsFlatness(BoundsFlatnessArgs),
    /// Error exponents on a grid.
    Exponents(ExponentsArgs),
    /// Monte Carlo decoding error of one lattice.
    SimulateDecode(SimulateDecodeArgs),
    /// Ensemble-average decoding error against the analytic bound.
    SimulateEnsemble(SimulateEnsembleArgs),
    /// Lattice Gaussian coding experiment.
    SimulateLg(SimulateLgArgs),
    /// Exhaustive verification suites.
    Verify(VerifyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Params(_) => "params",
            Command::BoundsNn(_) => "bounds-nn",
            Command::BoundsFlatness(_) => "bounds-flatness",
            Command::Exponents(_) => "exponents",
            Command::SimulateDecode(_) => "simulate-decode",
            Command::SimulateEnsemble(_) => "simulate-ensemble",
            Command::SimulateLg(_) => "simulate-lg",
            Command::Verify(_) => "verify",
        }
    }

    /// The flags given on the command line, as a JSON object without unset keys.
    pub fn flags(&self) -> serde_json::Result<serde_json::Value> {
        match self {
            Command::Params(a) => serde_json::to_value(a),
            Command::BoundsNn(a) => serde_json::to_value(a),
            Command::BoundsFlatness(a) => serde_json::to_value(a),
            Command::Exponents(a) => serde_json::to_value(a),
            Command::SimulateDecode(a) => serde_json::to_value(a),
            Command::SimulateEnsemble(a) => serde_json::to_value(a),
            Command::SimulateLg(a) => serde_json::to_value(a),
            Command::Verify(a) => serde_json::to_value(a),
        }
    }
}
