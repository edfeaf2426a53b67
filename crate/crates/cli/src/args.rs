use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "sirgraph",
    version,
    about = "SIR epidemics on co-evolving dense random graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Scenario file (TOML with [model], [kernel], [solver], [sim]).
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Overrides sim.base_seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides solver.n_steps.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Overrides solver.graphon_resolution.
    #[arg(long)]
    pub resolution: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SimOptions {
    /// Overrides sim.n_vertices.
    #[arg(long)]
    pub vertices: Option<usize>,
    /// Overrides sim.event_budget.
    #[arg(long)]
    pub event_budget: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the large-population limit.
    Solve {
        #[command(flatten)]
        common: Common,
    },
    /// Simulate replicates of the finite process.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sim: SimOptions,
        /// Overrides sim.replicates.
        #[arg(long)]
        replicates: Option<usize>,
        /// Snapshot times, comma separated.
        #[arg(long, value_delimiter = ',')]
        snapshots: Vec<f64>,
    },
    /// Compare simulations against the limit over a list of sizes.
    Compare {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sim: SimOptions,
        #[arg(long, value_delimiter = ',', default_value = "200,500,1000")]
        n_list: Vec<usize>,
        /// Overrides sim.replicates.
        #[arg(long)]
        replicates: Option<usize>,
        /// Comparison times, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        times: Vec<f64>,
    },
    /// R0, final size, peaks and an optional sweep over gamma.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        gammas: Vec<f64>,
    },
    /// Limiting and empirical graphons at the given times.
    Graphon {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sim: SimOptions,
        #[arg(long, value_delimiter = ',', required = true)]
        times: Vec<f64>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve { .. } => "solve",
            Command::Simulate { .. } => "simulate",
            Command::Compare { .. } => "compare",
            Command::Analyze { .. } => "analyze",
            Command::Graphon { .. } => "graphon",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Solve { common }
            | Command::Simulate { common, .. }
            | Command::Compare { common, .. }
            | Command::Analyze { common, .. }
            | Command::Graphon { common, .. } => common,
        }
    }
}
