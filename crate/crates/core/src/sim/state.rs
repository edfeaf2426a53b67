use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::bits::{BitMatrix, BitSet};
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::model::{vertex_type, DistributionView, Masses, TypeDistribution, VertexState};

/// Fenwick tree over 0/1 indicators.
#[derive(Debug, Clone)]
struct Fenwick {
    tree: Vec<u32>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick { tree: vec![0; n + 1] }
    }

    fn add(&mut self, i: usize, delta: i32) {
        let mut k = i + 1;
        while k < self.tree.len() {
            self.tree[k] = (self.tree[k] as i32 + delta) as u32;
            k += k & k.wrapping_neg();
        }
    }

    /// Sum over `0..i`.
    fn prefix(&self, i: usize) -> usize {
        let mut k = i;
        let mut s = 0usize;
        while k > 0 {
            s += self.tree[k] as usize;
            k &= k - 1;
        }
        s
    }
}

/// Infection times of every vertex ever infected, in infection order (hence
/// non-decreasing), with a Fenwick tree marking those still infected.
#[derive(Debug, Clone)]
pub struct AgeIndex {
    pub(crate) times: Vec<f64>,
    live: Fenwick,
    live_count: usize,
}

impl AgeIndex {
    fn new(n: usize) -> Self {
        AgeIndex {
            times: Vec::with_capacity(n),
            live: Fenwick::new(n),
            live_count: 0,
        }
    }

    fn push(&mut self, time: f64) -> usize {
        debug_assert!(self.times.last().is_none_or(|&s| s <= time));
        let slot = self.times.len();
        self.times.push(time);
        self.live.add(slot, 1);
        self.live_count += 1;
        slot
    }

    fn remove(&mut self, slot: usize) {
        self.live.add(slot, -1);
        self.live_count -= 1;
    }

    /// First slot with infection time `>= s`.
    fn first_at_or_after(&self, s: f64) -> usize {
        self.times.partition_point(|&x| x < s)
    }

    /// Currently infected vertices with slot `>= slot`.
    pub(crate) fn live_from(&self, slot: usize) -> usize {
        self.live_count - self.live.prefix(slot)
    }

    /// Currently infected vertices with infection time `>= s`.
    pub fn live_since(&self, s: f64) -> usize {
        self.live_from(self.first_at_or_after(s))
    }

    pub fn live_count(&self) -> usize {
        self.live_count
    }
}

/// Vertex counts by state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub susceptible: usize,
    pub infected: usize,
    pub recovered: usize,
}

/// Full state of a finite-`n` run at the current clock.
///
/// A pair is static exactly when one endpoint has recovered, so the static
/// flags are read off the states and not stored separately.
#[derive(Debug, Clone)]
pub struct GraphState {
    pub(crate) n: usize,
    pub(crate) horizon: f64,
    pub(crate) clock: f64,
    pub(crate) states: Vec<VertexState>,
    /// `NaN` for vertices never infected.
    pub(crate) infection_times: Vec<f64>,
    pub(crate) adjacency: BitMatrix,
    pub(crate) counts: Counts,
    pub(crate) susceptible_bits: BitSet,
    pub(crate) infected_bits: BitSet,
    /// Compact lists with back-pointers for uniform selection.
    pub(crate) susceptible: IndexList,
    pub(crate) infected: IndexList,
    pub(crate) alive: IndexList,
    pub(crate) ages: AgeIndex,
    pub(crate) age_slot: Vec<u32>,
}

/// A subset of `0..n` supporting O(1) insert, remove and uniform pick.
#[derive(Debug, Clone)]
pub(crate) struct IndexList {
    items: Vec<u32>,
    pos: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl IndexList {
    fn new(n: usize) -> Self {
        IndexList {
            items: Vec::with_capacity(n),
            pos: vec![ABSENT; n],
        }
    }

    fn insert(&mut self, i: usize) {
        debug_assert_eq!(self.pos[i], ABSENT);
        self.pos[i] = self.items.len() as u32;
        self.items.push(i as u32);
    }

    fn remove(&mut self, i: usize) {
        let p = self.pos[i] as usize;
        let last = *self.items.last().expect("non-empty");
        self.items.swap_remove(p);
        if last as usize != i {
            self.pos[last as usize] = p as u32;
        }
        self.pos[i] = ABSENT;
    }

    pub(crate) fn len(&self) -> usize {
        self.items.len()
    }

    #[inline]
    pub(crate) fn get(&self, k: usize) -> usize {
        self.items[k] as usize
    }

    pub(crate) fn contains(&self, i: usize) -> bool {
        self.pos[i] != ABSENT
    }
}

impl GraphState {
    /// Draws the initial state: every pair active with probability `p0`,
    /// every vertex infected (at age 0) with probability `q0`.
    pub fn initial(config: &ScenarioConfig, rng: &mut ChaCha8Rng) -> Result<Self> {
        config.validate()?;
        let n = config.sim.n_vertices;
        if n < 2 {
            return Err(Error::config("sim.n_vertices", "need at least 2 vertices"));
        }
        let m = &config.model;
        let mut adjacency = BitMatrix::new(n);
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random::<f64>() < m.p0 {
                    adjacency.set(i, j, true);
                }
            }
        }
        let mut state = GraphState {
            n,
            horizon: m.horizon,
            clock: 0.0,
            states: vec![VertexState::Susceptible; n],
            infection_times: vec![f64::NAN; n],
            adjacency,
            counts: Counts {
                susceptible: n,
                infected: 0,
                recovered: 0,
            },
            susceptible_bits: BitSet::new(n),
            infected_bits: BitSet::new(n),
            susceptible: IndexList::new(n),
            infected: IndexList::new(n),
            alive: IndexList::new(n),
            ages: AgeIndex::new(n),
            age_slot: vec![ABSENT; n],
        };
        for i in 0..n {
            state.susceptible_bits.set(i, true);
            state.susceptible.insert(i);
            state.alive.insert(i);
        }
        for i in 0..n {
            if rng.random::<f64>() < m.q0 {
                state.infect(i, 0.0);
            }
        }
        Ok(state)
    }

    pub(crate) fn infect(&mut self, i: usize, time: f64) {
        debug_assert_eq!(self.states[i], VertexState::Susceptible);
        self.states[i] = VertexState::Infected;
        self.infection_times[i] = time;
        self.susceptible_bits.set(i, false);
        self.infected_bits.set(i, true);
        self.susceptible.remove(i);
        self.infected.insert(i);
        self.counts.susceptible -= 1;
        self.counts.infected += 1;
        self.age_slot[i] = self.ages.push(time) as u32;
    }

    /// Marks `i` recovered; the caller redraws its incident pairs.
    pub(crate) fn recover(&mut self, i: usize) {
        debug_assert_eq!(self.states[i], VertexState::Infected);
        self.states[i] = VertexState::Recovered;
        self.infected_bits.set(i, false);
        self.infected.remove(i);
        self.alive.remove(i);
        self.counts.infected -= 1;
        self.counts.recovered += 1;
        self.ages.remove(self.age_slot[i] as usize);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn counts(&self) -> Counts {
        self.counts
    }

    pub fn states(&self) -> &[VertexState] {
        &self.states
    }

    pub fn infection_times(&self) -> &[f64] {
        &self.infection_times
    }

    pub fn adjacency(&self) -> &BitMatrix {
        &self.adjacency
    }

    /// A pair is static once either endpoint has recovered.
    pub fn is_static(&self, i: usize, j: usize) -> bool {
        self.states[i] == VertexState::Recovered || self.states[j] == VertexState::Recovered
    }

    /// Type of vertex `i` at the current clock.
    pub fn vertex_type(&self, i: usize) -> f64 {
        vertex_type(self.states[i], self.infection_times[i], self.clock, self.horizon)
    }

    pub fn types(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.vertex_type(i)).collect()
    }

    /// Infected vertices with age at most `window` at the current clock.
    pub(crate) fn infected_within(&self, window: f64) -> usize {
        if window >= self.clock {
            self.counts.infected
        } else {
            self.ages.live_since(self.clock - window)
        }
    }

    /// Checks the structural invariants; returns a description of the first
    /// violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        if !self.adjacency.is_symmetric() {
            return Err("adjacency not symmetric with zero diagonal".into());
        }
        let mut c = Counts::default();
        for i in 0..self.n {
            match self.states[i] {
                VertexState::Susceptible => c.susceptible += 1,
                VertexState::Infected => {
                    c.infected += 1;
                    let age = self.clock - self.infection_times[i];
                    if !(age >= 0.0 && age <= self.clock) {
                        return Err(format!("vertex {i} has age {age} at {}", self.clock));
                    }
                }
                VertexState::Recovered => c.recovered += 1,
            }
            let alive = self.states[i] != VertexState::Recovered;
            if self.alive.contains(i) != alive
                || self.infected.contains(i) != (self.states[i] == VertexState::Infected)
                || self.infected_bits.get(i) != (self.states[i] == VertexState::Infected)
                || self.susceptible_bits.get(i) != (self.states[i] == VertexState::Susceptible)
            {
                return Err(format!("index sets disagree with the state of vertex {i}"));
            }
        }
        if c != self.counts {
            return Err(format!("counts {:?} but states give {c:?}", self.counts));
        }
        if self.ages.live_count() != c.infected {
            return Err("age index out of sync".into());
        }
        Ok(())
    }

    /// Empirical type distribution `F_n(t; .)`.
    pub fn empirical_type_distribution(&self) -> TypeDistribution {
        TypeDistribution::from_types(self.clock, self.horizon, &self.types()).expect("vertex types are valid")
    }
}

impl DistributionView for GraphState {
    fn time(&self) -> f64 {
        self.clock
    }

    fn horizon(&self) -> f64 {
        self.horizon
    }

    fn masses(&self) -> Masses {
        let n = self.n as f64;
        Masses {
            susceptible: self.counts.susceptible as f64 / n,
            infected: self.counts.infected as f64 / n,
            recovered: self.counts.recovered as f64 / n,
        }
    }

    fn cdf(&self, y: f64) -> f64 {
        let n = self.n as f64;
        let c = self.counts;
        if y < -1.0 {
            0.0
        } else if y >= self.horizon + 1.0 {
            1.0
        } else if y <= 0.0 {
            c.susceptible as f64 / n
        } else {
            (c.susceptible + self.infected_within(y)) as f64 / n
        }
    }

    fn phi(&self, window: f64) -> f64 {
        if window <= 0.0 {
            return 0.0;
        }
        self.infected_within(window) as f64 / self.n as f64
    }
}
