use super::engine::{phi_at, EventCounters};
use super::state::{Counts, GraphState};
use crate::format::csv_row;

/// Observables of a state at one sample time.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Sample {
    time: f64,
    counts: Counts,
    phi: f64,
    rho: [f64; 4],
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        f64::NAN
    } else {
        num as f64 / den as f64
    }
}

fn pairs(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

impl Sample {
    /// Observes `state`, which is constant from its clock up to `t`.
    pub(crate) fn observe(state: &GraphState, t: f64, window: f64) -> Self {
        let c = state.counts;
        let adj = &state.adjacency;
        let mut ss = 0;
        let mut si = 0;
        let mut ii = 0;
        for i in 0..state.n {
            if state.susceptible_bits.get(i) {
                ss += adj.row_count_in(i, &state.susceptible_bits);
                si += adj.row_count_in(i, &state.infected_bits);
            } else if state.infected_bits.get(i) {
                ii += adj.row_count_in(i, &state.infected_bits);
            }
        }
        let (ss, ii) = (ss / 2, ii / 2);
        let other = adj.edge_count() - ss - si - ii;
        let ss_pairs = pairs(c.susceptible);
        let si_pairs = c.susceptible * c.infected;
        let ii_pairs = pairs(c.infected);
        let other_pairs = pairs(state.n) - ss_pairs - si_pairs - ii_pairs;
        Sample {
            time: t,
            counts: c,
            phi: if window > 0.0 { phi_at(state, t, window) } else { 0.0 },
            rho: [
                ratio(ss, ss_pairs),
                ratio(si, si_pairs),
                ratio(ii, ii_pairs),
                ratio(other, other_pairs),
            ],
        }
    }
}

/// Observables of one run on a uniform grid. Edge densities are the active
/// fraction of pairs in each state class (`NaN` for an empty class); the
/// `other` class holds the pairs with a recovered endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub counts: Vec<Counts>,
    pub p_s: Vec<f64>,
    pub p_i: Vec<f64>,
    pub p_r: Vec<f64>,
    pub phi: Vec<f64>,
    pub rho_ss: Vec<f64>,
    pub rho_si: Vec<f64>,
    pub rho_ii: Vec<f64>,
    pub rho_other: Vec<f64>,
    pub counters: EventCounters,
}

pub const SIM_CSV_HEADER: &str = "t,p_S,p_I,p_R,phi,rho_SS,rho_SI,rho_II,rho_other";

impl Trajectory {
    /// `points` uniform times on `[0, horizon]`, both ends included.
    pub fn grid(horizon: f64, points: usize) -> Vec<f64> {
        match points {
            0 => Vec::new(),
            1 => vec![0.0],
            _ => {
                let h = horizon / (points - 1) as f64;
                (0..points)
                    .map(|k| if k + 1 == points { horizon } else { k as f64 * h })
                    .collect()
            }
        }
    }

    pub(crate) fn from_samples(samples: Vec<Sample>, counters: EventCounters) -> Self {
        let n = samples
            .first()
            .map(|s| (s.counts.susceptible + s.counts.infected + s.counts.recovered) as f64)
            .unwrap_or(1.0);
        let col = |f: &dyn Fn(&Sample) -> f64| samples.iter().map(f).collect::<Vec<_>>();
        Trajectory {
            times: col(&|s| s.time),
            counts: samples.iter().map(|s| s.counts).collect(),
            p_s: col(&|s| s.counts.susceptible as f64 / n),
            p_i: col(&|s| s.counts.infected as f64 / n),
            p_r: col(&|s| s.counts.recovered as f64 / n),
            phi: col(&|s| s.phi),
            rho_ss: col(&|s| s.rho[0]),
            rho_si: col(&|s| s.rho[1]),
            rho_ii: col(&|s| s.rho[2]),
            rho_other: col(&|s| s.rho[3]),
            counters,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Columns in CSV order, time excluded.
    pub fn columns(&self) -> [&[f64]; 8] {
        [
            &self.p_s,
            &self.p_i,
            &self.p_r,
            &self.phi,
            &self.rho_ss,
            &self.rho_si,
            &self.rho_ii,
            &self.rho_other,
        ]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(SIM_CSV_HEADER);
        out.push('\n');
        let cols = self.columns();
        for k in 0..self.len() {
            let mut row = vec![self.times[k]];
            row.extend(cols.iter().map(|c| c[k]));
            out.push_str(&csv_row(&row));
            out.push('\n');
        }
        out
    }
}

/// Pointwise ensemble mean and sample standard deviation of trajectories on
/// a common grid. `NaN` entries are skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub times: Vec<f64>,
    pub replicates: usize,
    /// `mean[c][k]` for column `c` in CSV order.
    pub mean: Vec<Vec<f64>>,
    pub std: Vec<Vec<f64>>,
}

impl EnsembleStats {
    pub fn new(runs: &[&Trajectory]) -> Self {
        let times = runs.first().map(|r| r.times.clone()).unwrap_or_default();
        let mut mean = Vec::new();
        let mut std = Vec::new();
        for c in 0..8 {
            let mut mc = Vec::with_capacity(times.len());
            let mut sc = Vec::with_capacity(times.len());
            for k in 0..times.len() {
                let xs: Vec<f64> = runs.iter().map(|r| r.columns()[c][k]).filter(|x| !x.is_nan()).collect();
                let m = xs.len() as f64;
                if xs.is_empty() {
                    mc.push(f64::NAN);
                    sc.push(f64::NAN);
                    continue;
                }
                let mu = xs.iter().sum::<f64>() / m;
                let var = if xs.len() > 1 {
                    xs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (m - 1.0)
                } else {
                    0.0
                };
                mc.push(mu);
                sc.push(var.sqrt());
            }
            mean.push(mc);
            std.push(sc);
        }
        EnsembleStats {
            times,
            replicates: runs.len(),
            mean,
            std,
        }
    }

    /// Mean of `p_I`.
    pub fn mean_p_i(&self) -> &[f64] {
        &self.mean[1]
    }

    /// CSV with a `mean_` and a `std_` column per observable.
    pub fn to_csv(&self) -> String {
        let names = SIM_CSV_HEADER.split(',').skip(1).collect::<Vec<_>>();
        let mut out = String::from("t");
        for n in &names {
            out.push_str(&format!(",mean_{n},std_{n}"));
        }
        out.push('\n');
        for k in 0..self.times.len() {
            let mut row = vec![self.times[k]];
            for c in 0..names.len() {
                row.push(self.mean[c][k]);
                row.push(self.std[c][k]);
            }
            out.push_str(&csv_row(&row));
            out.push('\n');
        }
        out
    }
}
