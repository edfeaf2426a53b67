//! Finite-`n` simulation.
//!
//! Runs are exact continuous-time jump processes driven by one aggregate
//! exponential clock: every non-static pair rings at rate `gamma`, every
//! susceptible at rate `lambda` (thinned by its infected neighbourhood) and
//! every infected vertex recovers at rate one. A pair is static once an
//! endpoint has recovered, so the non-static pairs are exactly the pairs of
//! live vertices and a uniform one is two distinct uniform live vertices.

mod bits;
mod engine;
mod oracle;
mod snapshot;
mod state;
mod trajectory;

pub use bits::{BitMatrix, BitSet};
pub use engine::{
    simulate_mimicking_with_rng, simulate_prescribed, simulate_with_kernels, simulate_with_rng, EventCounters,
    SimOutput,
};
pub use oracle::{edge_event_probability_oracle, EndpointPath, OracleEstimate};
pub use snapshot::{Snapshot, SnapshotRequest};
pub use state::{Counts, GraphState};
pub use trajectory::{EnsembleStats, Trajectory, SIM_CSV_HEADER};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::ScenarioConfig;
use crate::error::Result;
use crate::limit::LimitSolution;
use crate::model::TypeDistribution;

/// Random stream of replicate `replicate` under `base_seed`.
pub fn replicate_rng(base_seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(replicate);
    rng
}

/// Initial state for `seed` (stream 0).
pub fn init_state(config: &ScenarioConfig, seed: u64) -> Result<GraphState> {
    GraphState::initial(config, &mut replicate_rng(seed, 0))
}

/// One run of the co-evolving process for `seed` (stream 0).
pub fn simulate(config: &ScenarioConfig, seed: u64, request: &SnapshotRequest) -> Result<SimOutput> {
    simulate_with_rng(config, replicate_rng(seed, 0), request)
}

/// One run of the mimicking process for `seed` (stream 0).
pub fn simulate_mimicking(
    config: &ScenarioConfig,
    limit: &LimitSolution,
    seed: u64,
    request: &SnapshotRequest,
) -> Result<SimOutput> {
    simulate_mimicking_with_rng(config, limit, replicate_rng(seed, 0), request)
}

/// Replicates `0..replicates` under `config.sim.base_seed`, run in parallel
/// and returned in replicate order.
pub fn run_ensemble(config: &ScenarioConfig, replicates: usize, request: &SnapshotRequest) -> Result<Vec<SimOutput>> {
    let kernels = config.kernels();
    (0..replicates as u64)
        .into_par_iter()
        .map(|r| simulate_with_kernels(config, &kernels, replicate_rng(config.sim.base_seed, r), request))
        .collect()
}

/// Mimicking-process counterpart of [`run_ensemble`].
pub fn run_mimicking_ensemble(
    config: &ScenarioConfig,
    limit: &LimitSolution,
    replicates: usize,
    request: &SnapshotRequest,
) -> Result<Vec<SimOutput>> {
    (0..replicates as u64)
        .into_par_iter()
        .map(|r| simulate_mimicking_with_rng(config, limit, replicate_rng(config.sim.base_seed, r), request))
        .collect()
}

/// Empirical type distribution `F_n(t; .)` of a state.
pub fn empirical_type_distribution(state: &GraphState) -> TypeDistribution {
    state.empirical_type_distribution()
}
