//! Finite-`n` versus limit comparison over a list of population sizes.

use rayon::prelude::*;
use serde::Serialize;
use sirgraph::format::sig9;
use sirgraph::graphon::{
    coarsen, cut_norm_estimate, empirical_graphon_coarse, l1_distance, limiting_graphon, Graphon, DEFAULT_CUT_STARTS,
};
use sirgraph::limit::LimitSolution;
use sirgraph::model::levy_distance;
use sirgraph::sim::{replicate_rng, simulate_with_kernels, SimOutput, SnapshotRequest};
use sirgraph::{Error, Result, ScenarioConfig};

/// The limiting graphon is sampled this many times finer than the comparison
/// resolution and then block-averaged.
pub const LIMIT_OVERSAMPLING: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let std = if xs.len() > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        MeanStd { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceRow {
    pub n: usize,
    pub t: f64,
    pub levy: MeanStd,
    pub graphon_l1: MeanStd,
    pub cut_lower: MeanStd,
    pub cut_upper: MeanStd,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupRow {
    pub n: usize,
    /// `sup_t |p_I^(n)(t) - p_I(t)|` over the sampling grid.
    pub sup_p_i: MeanStd,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendCheck {
    pub t: f64,
    pub levy_non_increasing: bool,
    pub graphon_l1_non_increasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub replicates: usize,
    pub resolution: usize,
    pub rows: Vec<DistanceRow>,
    pub sup: Vec<SupRow>,
    /// Absent when fewer than two sizes were compared.
    pub trends: Option<Vec<TrendCheck>>,
    pub sup_strictly_decreasing: Option<bool>,
    pub warnings: Vec<String>,
    pub events: u64,
}

struct ReplicateMetrics {
    sup_p_i: f64,
    // per time: levy, l1, cut lower, cut upper
    at: Vec<[f64; 4]>,
    events: u64,
}

/// `later <= earlier` up to `sigmas` standard errors of the difference of
/// two ensemble means.
pub fn non_increasing_within(values: &[MeanStd], replicates: usize, sigmas: f64) -> bool {
    let r = replicates.max(1) as f64;
    values.windows(2).all(|w| {
        let se = ((w[0].std.powi(2) + w[1].std.powi(2)) / r).sqrt();
        w[1].mean <= w[0].mean + sigmas * se
    })
}

fn cut_seed(base: u64, n: usize, k: usize, r: u64) -> u64 {
    base ^ (n as u64).rotate_left(40) ^ (k as u64).rotate_left(20) ^ r.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

fn replicate_metrics(
    out: &SimOutput,
    limit: &LimitSolution,
    limit_graphons: &[Graphon],
    resolution: usize,
    seed: (u64, usize, u64),
) -> Result<ReplicateMetrics> {
    let tr = &out.trajectory;
    let mut sup = 0.0f64;
    for (&t, &p) in tr.times.iter().zip(&tr.p_i) {
        sup = sup.max((p - limit.p_i_at(t)?).abs());
    }
    let mut at = Vec::with_capacity(out.snapshots.len());
    for (k, (snap, lg)) in out.snapshots.iter().zip(limit_graphons).enumerate() {
        let kk = ((snap.time / limit.dt()).round() as usize).min(limit.n_steps());
        let levy = levy_distance(
            &snap.type_distribution().to_step_cdf(),
            &limit.type_distribution(kk)?.to_step_cdf(),
        );
        let eg = empirical_graphon_coarse(snap, resolution)?;
        let l1 = l1_distance(&eg, lg)?;
        let cut = cut_norm_estimate(&eg, lg, DEFAULT_CUT_STARTS, cut_seed(seed.0, seed.1, k, seed.2))?;
        at.push([levy, l1, cut.lower, cut.upper]);
    }
    Ok(ReplicateMetrics {
        sup_p_i: sup,
        at,
        events: out.counters.total_events,
    })
}

/// Limiting graphon at `t`, block-averaged from a finer sampling.
pub fn coarse_limiting_graphon(limit: &LimitSolution, t: f64, resolution: usize) -> Result<Graphon> {
    coarsen(
        &limiting_graphon(limit, t, resolution * LIMIT_OVERSAMPLING)?,
        resolution,
    )
}

/// Runs `replicates` simulations for each size in `n_list` (streams
/// `0..replicates` under `config.sim.base_seed`) and measures them against
/// `limit` at `times`.
pub fn compare(
    config: &ScenarioConfig,
    limit: &LimitSolution,
    n_list: &[usize],
    replicates: usize,
    times: &[f64],
) -> Result<CompareReport> {
    let resolution = config.solver.graphon_resolution;
    if n_list.is_empty() {
        return Err(Error::Config {
            field: "n-list".into(),
            reason: "must name at least one size".into(),
        });
    }
    if replicates == 0 {
        return Err(Error::Config {
            field: "replicates".into(),
            reason: "must be positive".into(),
        });
    }
    for &n in n_list {
        if resolution == 0 || !n.is_multiple_of(resolution) {
            return Err(Error::Config {
                field: "solver.graphon_resolution".into(),
                reason: format!("resolution {resolution} must divide every size, not {n}"),
            });
        }
    }
    let request = SnapshotRequest::at(times);
    request.validate(config.model.horizon)?;
    let limit_graphons: Vec<Graphon> = times
        .iter()
        .map(|&t| coarse_limiting_graphon(limit, t, resolution))
        .collect::<Result<_>>()?;
    let kernels = config.kernels();
    let base = config.sim.base_seed;

    let mut rows = Vec::new();
    let mut sup = Vec::new();
    let mut events = 0;
    for &n in n_list {
        let cfg = config.clone().with_vertices(n);
        cfg.validate()?;
        let metrics: Vec<ReplicateMetrics> = (0..replicates as u64)
            .into_par_iter()
            .map(|r| {
                let out = simulate_with_kernels(&cfg, &kernels, replicate_rng(base, r), &request)?;
                replicate_metrics(&out, limit, &limit_graphons, resolution, (base, n, r))
            })
            .collect::<Result<_>>()?;
        events += metrics.iter().map(|m| m.events).sum::<u64>();
        sup.push(SupRow {
            n,
            sup_p_i: MeanStd::of(&metrics.iter().map(|m| m.sup_p_i).collect::<Vec<_>>()),
        });
        for (k, &t) in times.iter().enumerate() {
            let col = |c: usize| MeanStd::of(&metrics.iter().map(|m| m.at[k][c]).collect::<Vec<_>>());
            rows.push(DistanceRow {
                n,
                t,
                levy: col(0),
                graphon_l1: col(1),
                cut_lower: col(2),
                cut_upper: col(3),
            });
        }
    }

    let mut warnings = Vec::new();
    let (trends, sup_strictly_decreasing) = if n_list.len() < 2 {
        warnings.push("only one size given; convergence trend check skipped".to_string());
        (None, None)
    } else {
        let trends = times
            .iter()
            .map(|&t| {
                let series: Vec<&DistanceRow> = rows.iter().filter(|r| r.t == t).collect();
                let levy: Vec<MeanStd> = series.iter().map(|r| r.levy).collect();
                let l1: Vec<MeanStd> = series.iter().map(|r| r.graphon_l1).collect();
                TrendCheck {
                    t,
                    levy_non_increasing: non_increasing_within(&levy, replicates, 2.0),
                    graphon_l1_non_increasing: non_increasing_within(&l1, replicates, 2.0),
                }
            })
            .collect::<Vec<_>>();
        for tc in &trends {
            if !tc.levy_non_increasing {
                warnings.push(format!("Levy distance at t = {} increases with n", tc.t));
            }
            if !tc.graphon_l1_non_increasing {
                warnings.push(format!("graphon L1 distance at t = {} increases with n", tc.t));
            }
        }
        let dec = sup.windows(2).all(|w| w[1].sup_p_i.mean < w[0].sup_p_i.mean);
        if !dec {
            warnings.push("sup |p_I^(n) - p_I| is not strictly decreasing in n".to_string());
        }
        (Some(trends), Some(dec))
    };

    Ok(CompareReport {
        replicates,
        resolution,
        rows,
        sup,
        trends,
        sup_strictly_decreasing,
        warnings,
        events,
    })
}

impl CompareReport {
    pub fn distances_csv(&self) -> String {
        let mut s = String::from(
            "n,t,levy_mean,levy_std,graphon_l1_mean,graphon_l1_std,cut_lower_mean,cut_lower_std,cut_upper_mean,cut_upper_std\n",
        );
        for r in &self.rows {
            let cells = [
                r.t,
                r.levy.mean,
                r.levy.std,
                r.graphon_l1.mean,
                r.graphon_l1.std,
                r.cut_lower.mean,
                r.cut_lower.std,
                r.cut_upper.mean,
                r.cut_upper.std,
            ];
            s.push_str(&r.n.to_string());
            for c in cells {
                s.push(',');
                s.push_str(&sig9(c));
            }
            s.push('\n');
        }
        s
    }

    pub fn sup_csv(&self) -> String {
        let mut s = String::from("n,sup_p_I_mean,sup_p_I_std\n");
        for r in &self.sup {
            s.push_str(&format!("{},{},{}\n", r.n, sig9(r.sup_p_i.mean), sig9(r.sup_p_i.std)));
        }
        s
    }
}
