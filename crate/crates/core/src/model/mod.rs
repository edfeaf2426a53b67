//! Model types shared by the simulator, the limit solver and the graphon
//! layer: vertex states and types, type distributions, kernels and the
//! probability metrics on distribution functions.

pub mod distribution;
pub mod kernel;
pub mod levy;

pub use distribution::{DistributionView, Masses, StepCdf, TypeDistribution};
pub use kernel::{
    behavioral_control, BehavioralKernel, EdgeKernel, Infectivity, KernelSet, PairKernel, PairState, PiecewiseLinear,
};
pub use levy::{kolmogorov_distance, levy_distance};

/// Type value of a susceptible vertex.
pub const SUSCEPTIBLE_TYPE: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VertexState {
    Susceptible,
    Infected,
    Recovered,
}

impl VertexState {
    pub fn letter(self) -> char {
        match self {
            VertexState::Susceptible => 'S',
            VertexState::Infected => 'I',
            VertexState::Recovered => 'R',
        }
    }
}

/// Type of a vertex at time `t`: `-1` if susceptible, the infection age if
/// infected and `horizon + 1` if recovered.
pub fn vertex_type(state: VertexState, infection_time: f64, t: f64, horizon: f64) -> f64 {
    match state {
        VertexState::Susceptible => SUSCEPTIBLE_TYPE,
        VertexState::Infected => (t - infection_time).max(0.0),
        VertexState::Recovered => horizon + 1.0,
    }
}
