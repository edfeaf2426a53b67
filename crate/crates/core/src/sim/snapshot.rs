use std::fmt::Write as _;

use super::bits::BitMatrix;
use super::state::GraphState;
use crate::error::{Error, Result};
use crate::format::sig9;
use crate::model::{vertex_type, TypeDistribution, VertexState};

/// Times at which labeled adjacency snapshots are taken.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SnapshotRequest {
    pub times: Vec<f64>,
}

impl SnapshotRequest {
    pub fn none() -> Self {
        SnapshotRequest::default()
    }

    pub fn at(times: &[f64]) -> Self {
        SnapshotRequest { times: times.to_vec() }
    }

    pub fn validate(&self, horizon: f64) -> Result<()> {
        for (k, &t) in self.times.iter().enumerate() {
            if !(t.is_finite() && (0.0..=horizon).contains(&t)) {
                return Err(Error::Domain(format!("snapshot time {t} outside [0, {horizon}]")));
            }
            if k > 0 && t < self.times[k - 1] {
                return Err(Error::Domain("snapshot times must be sorted".into()));
            }
        }
        Ok(())
    }
}

/// Adjacency at one time. A labeled snapshot lists vertices by increasing
/// type, ties by original index.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub horizon: f64,
    /// `order[k]` is the original index of label `k`.
    pub order: Vec<usize>,
    pub types: Vec<f64>,
    pub states: Vec<VertexState>,
    pub adjacency: BitMatrix,
    labeled: bool,
}

impl Snapshot {
    /// Labeled snapshot of `state` at `t`; the state must be constant on
    /// `[clock, t]`.
    pub(crate) fn take(state: &GraphState, t: f64) -> Self {
        let types: Vec<f64> = (0..state.n)
            .map(|i| vertex_type(state.states[i], state.infection_times[i], t, state.horizon))
            .collect();
        Snapshot::labeled(t, state.horizon, types, state.states.clone(), &state.adjacency)
    }

    /// Sorts vertices by `(type, index)` and relabels.
    pub fn labeled(time: f64, horizon: f64, types: Vec<f64>, states: Vec<VertexState>, adjacency: &BitMatrix) -> Self {
        let mut order: Vec<usize> = (0..types.len()).collect();
        order.sort_by(|&a, &b| types[a].total_cmp(&types[b]).then(a.cmp(&b)));
        Snapshot {
            time,
            horizon,
            types: order.iter().map(|&i| types[i]).collect(),
            states: order.iter().map(|&i| states[i]).collect(),
            adjacency: adjacency.permuted(&order),
            order,
            labeled: true,
        }
    }

    /// Snapshot kept in the original vertex order.
    pub fn unlabeled(time: f64, horizon: f64, types: Vec<f64>, states: Vec<VertexState>, adjacency: BitMatrix) -> Self {
        Snapshot {
            time,
            horizon,
            order: (0..types.len()).collect(),
            types,
            states,
            adjacency,
            labeled: false,
        }
    }

    pub fn is_labeled(&self) -> bool {
        self.labeled
    }

    pub fn n(&self) -> usize {
        self.types.len()
    }

    pub fn type_distribution(&self) -> TypeDistribution {
        TypeDistribution::from_types(self.time, self.horizon, &self.types).expect("vertex types are valid")
    }

    /// One `i j` line per active pair, `i < j`, in label order.
    pub fn edge_list(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n() {
            for j in (i + 1)..self.n() {
                if self.adjacency.get(i, j) {
                    let _ = writeln!(out, "{i} {j}");
                }
            }
        }
        out
    }

    /// Header `index state type`, then one row per vertex in label order.
    pub fn vertex_table(&self) -> String {
        let mut out = String::from("index state type\n");
        for k in 0..self.n() {
            let _ = writeln!(out, "{k} {} {}", self.states[k].letter(), sig9(self.types[k]));
        }
        out
    }
}
