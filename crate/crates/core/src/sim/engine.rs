use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;

use super::snapshot::{Snapshot, SnapshotRequest};
use super::state::GraphState;
use super::trajectory::{Sample, Trajectory};
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::limit::LimitSolution;
use crate::model::{DistributionView, KernelSet, Masses, VertexState};

/// Event counters of one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EventCounters {
    /// Events drawn from the aggregate clock, rejected ones included.
    pub total_events: u64,
    pub infections: u64,
    pub rejected_infections: u64,
    pub recoveries: u64,
    /// Rings of the pair clocks.
    pub edge_events: u64,
    /// Pair values changed by a ring or by a recovery redraw.
    pub edge_flips: u64,
}

/// How susceptible vertices get infected.
#[derive(Clone, Copy)]
enum InfectionRule<'a> {
    /// Through active edges to infected neighbours.
    Contact,
    /// At the deterministic rate `lambda * J(t)`.
    Prescribed(&'a (dyn Fn(f64) -> f64 + Sync)),
}

/// `phi` maintained incrementally: infection times only grow and the window
/// start `t - a` only moves forward, so a cursor into the age index suffices.
struct PhiCache {
    window: f64,
    cursor: usize,
    value: f64,
    dirty: bool,
}

impl PhiCache {
    fn refresh(&mut self, state: &GraphState) {
        let start = state.clock - self.window;
        let times = &state.ages.times;
        let before = self.cursor;
        while self.cursor < times.len() && times[self.cursor] < start {
            self.cursor += 1;
        }
        if self.dirty || self.cursor != before {
            self.value = state.ages.live_from(self.cursor) as f64 / state.n as f64;
            self.dirty = false;
        }
    }
}

/// The state seen by the kernels, with `phi` taken from the cache.
struct CachedView<'a> {
    state: &'a GraphState,
    window: f64,
    phi: f64,
}

impl DistributionView for CachedView<'_> {
    fn time(&self) -> f64 {
        self.state.clock
    }

    fn horizon(&self) -> f64 {
        self.state.horizon
    }

    fn masses(&self) -> Masses {
        self.state.masses()
    }

    fn cdf(&self, y: f64) -> f64 {
        self.state.cdf(y)
    }

    fn phi(&self, window: f64) -> f64 {
        if window == self.window {
            self.phi
        } else {
            self.state.phi(window)
        }
    }
}

/// Output of one run.
#[derive(Debug, Clone)]
pub struct SimOutput {
    pub trajectory: Trajectory,
    pub snapshots: Vec<Snapshot>,
    pub counters: EventCounters,
    /// State at the horizon.
    pub final_state: GraphState,
}

struct Engine<'a> {
    config: &'a ScenarioConfig,
    kernels: &'a KernelSet,
    rule: InfectionRule<'a>,
    state: GraphState,
    rng: ChaCha8Rng,
    counters: EventCounters,
    phi: Option<PhiCache>,
}

impl<'a> Engine<'a> {
    fn view(&self) -> CachedView<'_> {
        match &self.phi {
            Some(c) => CachedView {
                state: &self.state,
                window: c.window,
                phi: c.value,
            },
            None => CachedView {
                state: &self.state,
                window: f64::NAN,
                phi: f64::NAN,
            },
        }
    }

    fn touch_phi(&mut self) {
        if let Some(c) = &mut self.phi {
            c.dirty = true;
            c.refresh(&self.state);
        }
    }

    /// Ring of a uniformly chosen non-static pair.
    fn edge_event(&mut self) {
        let alive = &self.state.alive;
        let m = alive.len();
        let a = self.rng.random_range(0..m);
        let mut b = self.rng.random_range(0..m - 1);
        if b >= a {
            b += 1;
        }
        let (i, j) = (alive.get(a), alive.get(b));
        let t = self.state.clock;
        let st = &self.state;
        let pi = {
            let view = self.view();
            match (st.states[i], st.states[j]) {
                (VertexState::Susceptible, VertexState::Susceptible) => self.kernels.pi_ss(&view),
                (VertexState::Infected, VertexState::Infected) => {
                    self.kernels
                        .pi_ii(t - st.infection_times[i], t - st.infection_times[j], &view)
                }
                (VertexState::Infected, _) => self.kernels.pi_si(t - st.infection_times[i], &view),
                (_, VertexState::Infected) => self.kernels.pi_si(t - st.infection_times[j], &view),
                _ => unreachable!("recovered vertices are not alive"),
            }
        };
        let value = self.rng.random::<f64>() < pi;
        self.counters.edge_events += 1;
        if self.state.adjacency.set(i, j, value) {
            self.counters.edge_flips += 1;
        }
    }

    /// Ring of a susceptible vertex's contact clock, thinned.
    fn infection_event(&mut self) {
        let k = self.rng.random_range(0..self.state.susceptible.len());
        let i = self.state.susceptible.get(k);
        let t = self.state.clock;
        let n = self.state.n as f64;
        let accept = match self.rule {
            InfectionRule::Contact => {
                let st = &self.state;
                if self.kernels.infectivity.is_unit() {
                    st.adjacency.row_count_in(i, &st.infected_bits) as f64 / n
                } else {
                    st.adjacency
                        .row_iter_in(i, &st.infected_bits)
                        .map(|j| self.kernels.infectivity.eval(t - st.infection_times[j]))
                        .sum::<f64>()
                        / n
                }
            }
            InfectionRule::Prescribed(force) => force(t),
        };
        assert!(accept <= 1.0 + 1e-12, "thinning probability {accept} exceeds one");
        if self.rng.random::<f64>() < accept {
            self.state.infect(i, t);
            self.counters.infections += 1;
            self.touch_phi();
        } else {
            self.counters.rejected_infections += 1;
        }
    }

    /// Recovery of a uniformly chosen infected vertex; all its pairs are
    /// redrawn at `p0` and become static.
    fn recovery_event(&mut self) {
        let k = self.rng.random_range(0..self.state.infected.len());
        let i = self.state.infected.get(k);
        self.state.recover(i);
        let p0 = self.config.model.p0;
        for j in 0..self.state.n {
            if j != i {
                let value = self.rng.random::<f64>() < p0;
                if self.state.adjacency.set(i, j, value) {
                    self.counters.edge_flips += 1;
                }
            }
        }
        self.counters.recoveries += 1;
        self.touch_phi();
    }

    fn run(mut self, request: &SnapshotRequest) -> Result<SimOutput> {
        let m = &self.config.model;
        let horizon = m.horizon;
        let budget = self.config.sim.event_budget;
        let grid = Trajectory::grid(horizon, self.config.sim.sample_points);
        let mut samples = Vec::with_capacity(grid.len());
        let mut next_sample = 0;
        let mut snapshots = Vec::with_capacity(request.times.len());
        let mut next_snapshot = 0;
        let window = self.config.phi_window();
        let lambda = m.lambda;
        let gamma = m.gamma;

        loop {
            let alive = self.state.alive.len() as f64;
            let edge_rate = gamma * alive * (alive - 1.0) / 2.0;
            let infection_rate = lambda * self.state.counts.susceptible as f64;
            let recovery_rate = self.state.counts.infected as f64;
            let total = edge_rate + infection_rate + recovery_rate;
            if !total.is_finite() {
                return Err(Error::Numerical {
                    step: self.counters.total_events as usize,
                    reason: format!("aggregate event rate {total} at t = {}", self.state.clock),
                });
            }
            let next = if total > 0.0 {
                let e: f64 = self.rng.sample(Exp1);
                self.state.clock + e / total
            } else {
                f64::INFINITY
            };
            // the state is constant on [clock, next)
            while next_sample < grid.len() && grid[next_sample] < next {
                samples.push(Sample::observe(&self.state, grid[next_sample], window));
                next_sample += 1;
            }
            while next_snapshot < request.times.len() && request.times[next_snapshot] < next {
                snapshots.push(Snapshot::take(&self.state, request.times[next_snapshot]));
                next_snapshot += 1;
            }
            if next > horizon {
                break;
            }
            self.counters.total_events += 1;
            if self.counters.total_events > budget {
                return Err(Error::EventBudget {
                    cap: budget,
                    time: self.state.clock,
                });
            }
            self.state.clock = next;
            if let Some(c) = &mut self.phi {
                c.refresh(&self.state);
            }
            let u = self.rng.random::<f64>() * total;
            if u < edge_rate {
                self.edge_event();
            } else if u < edge_rate + infection_rate {
                self.infection_event();
            } else if self.state.counts.infected > 0 {
                self.recovery_event();
            } else {
                // rounding put u past the last category; redraw the event
                self.counters.total_events -= 1;
            }
        }
        self.state.clock = horizon;
        Ok(SimOutput {
            trajectory: Trajectory::from_samples(samples, self.counters),
            snapshots,
            counters: self.counters,
            final_state: self.state,
        })
    }
}

fn start<'a>(
    config: &'a ScenarioConfig,
    kernels: &'a KernelSet,
    rule: InfectionRule<'a>,
    mut rng: ChaCha8Rng,
    request: &SnapshotRequest,
) -> Result<SimOutput> {
    request.validate(config.model.horizon)?;
    let state = GraphState::initial(config, &mut rng)?;
    let phi = kernels.phi_window().map(|window| {
        let mut c = PhiCache {
            window,
            cursor: 0,
            value: 0.0,
            dirty: true,
        };
        c.refresh(&state);
        c
    });
    Engine {
        config,
        kernels,
        rule,
        state,
        rng,
        counters: EventCounters::default(),
        phi,
    }
    .run(request)
}

/// Runs the co-evolving process with the scenario's kernels on the given
/// random stream.
pub fn simulate_with_rng(config: &ScenarioConfig, rng: ChaCha8Rng, request: &SnapshotRequest) -> Result<SimOutput> {
    let kernels = config.kernels();
    start(config, &kernels, InfectionRule::Contact, rng, request)
}

/// Runs the co-evolving process with explicit kernels.
pub fn simulate_with_kernels(
    config: &ScenarioConfig,
    kernels: &KernelSet,
    rng: ChaCha8Rng,
    request: &SnapshotRequest,
) -> Result<SimOutput> {
    start(config, kernels, InfectionRule::Contact, rng, request)
}

/// Runs the mimicking process: same edge dynamics, but susceptible vertices
/// are infected at rate `lambda * J(t)` read from `limit`.
pub fn simulate_mimicking_with_rng(
    config: &ScenarioConfig,
    limit: &LimitSolution,
    rng: ChaCha8Rng,
    request: &SnapshotRequest,
) -> Result<SimOutput> {
    if limit.horizon() < config.model.horizon {
        return Err(Error::config(
            "model.horizon",
            format!(
                "limit solved to {} but the run needs {}",
                limit.horizon(),
                config.model.horizon
            ),
        ));
    }
    let horizon = limit.horizon();
    let force = move |t: f64| limit.force_at(t.min(horizon)).unwrap_or(0.0);
    start(config, limit.kernels(), InfectionRule::Prescribed(&force), rng, request)
}

/// Runs the process with infections at the prescribed rate
/// `lambda * force(t)`, independent of the graph; `force` must stay in
/// `[0, 1]`.
pub fn simulate_prescribed(
    config: &ScenarioConfig,
    kernels: &KernelSet,
    force: &(dyn Fn(f64) -> f64 + Sync),
    rng: ChaCha8Rng,
    request: &SnapshotRequest,
) -> Result<SimOutput> {
    start(config, kernels, InfectionRule::Prescribed(force), rng, request)
}

/// `phi` of a state at time `t`, which may lie after the state's clock.
pub(crate) fn phi_at(state: &GraphState, t: f64, window: f64) -> f64 {
    let count = if window >= t {
        state.counts.infected
    } else {
        state.ages.live_since(t - window)
    };
    count as f64 / state.n as f64
}
