use serde::Serialize;
use sirgraph::analysis::{gamma_sweep, summarize, EpidemicSummary, GammaSweep};
use sirgraph::format::sig9;
use sirgraph::graphon::{
    cut_norm_estimate, empirical_graphon, empirical_graphon_coarse, l1_distance, limiting_graphon, Graphon,
    DEFAULT_CUT_STARTS, MAX_REFINED_RESOLUTION,
};
use sirgraph::limit::{solve, CharacteristicsReport, LimitSolution};
use sirgraph::sim::{run_ensemble, simulate, EnsembleStats, EventCounters, Snapshot, SnapshotRequest};
use sirgraph::{Error, Result, ScenarioConfig};

use crate::args::{Common, SimOptions};
use crate::compare::{coarse_limiting_graphon, compare, CompareReport};
use crate::manifest::OutputDir;

/// What a command did besides writing files.
#[derive(Debug, Default)]
pub struct RunInfo {
    pub streams: Vec<u64>,
    pub events: u64,
    pub simulated_runs: u64,
    pub warnings: Vec<String>,
}

/// Scenario file plus command-line overrides, validated.
pub fn effective_config(common: &Common, sim: Option<&SimOptions>) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::from_path(&common.config)?;
    if let Some(s) = common.seed {
        cfg.sim.base_seed = s;
    }
    if let Some(s) = common.steps {
        cfg.solver.n_steps = s;
    }
    if let Some(r) = common.resolution {
        cfg.solver.graphon_resolution = r;
    }
    if let Some(sim) = sim {
        if let Some(n) = sim.vertices {
            cfg.sim.n_vertices = n;
        }
        if let Some(b) = sim.event_budget {
            cfg.sim.event_budget = b;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn time_label(t: f64) -> String {
    format!("{t}")
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e)
}

#[derive(Serialize)]
struct SolveSummary<'a> {
    n_steps: usize,
    dt: f64,
    summary: &'a EpidemicSummary,
    characteristics: CharacteristicsReport,
}

fn write_solution(out: &mut OutputDir, sol: &LimitSolution) -> Result<()> {
    let summary = summarize(sol)?;
    out.write("trajectory.csv", sol.trajectory_csv().as_bytes())
        .map_err(io)?;
    out.write("cohorts.csv", sol.cohort_csv().as_bytes()).map_err(io)?;
    out.write_json(
        "summary.json",
        &SolveSummary {
            n_steps: sol.n_steps(),
            dt: sol.dt(),
            summary: &summary,
            characteristics: sol.check_characteristics(),
        },
    )
    .map_err(io)
}

pub fn cmd_solve(cfg: &ScenarioConfig, out: &mut OutputDir) -> Result<RunInfo> {
    let sol = solve(cfg)?;
    write_solution(out, &sol)?;
    Ok(RunInfo::default())
}

fn empirical_for_image(snap: &Snapshot, resolution: usize) -> Result<Graphon> {
    if snap.n() <= MAX_REFINED_RESOLUTION {
        empirical_graphon(snap)
    } else {
        empirical_graphon_coarse(snap, resolution)
    }
}

#[derive(Serialize)]
struct ReplicateSummary {
    replicate: u64,
    counters: EventCounters,
    final_susceptible: usize,
    final_infected: usize,
    final_recovered: usize,
}

#[derive(Serialize)]
struct SimulateSummary {
    n_vertices: usize,
    replicates: usize,
    base_seed: u64,
    snapshot_times: Vec<f64>,
    runs: Vec<ReplicateSummary>,
}

pub fn cmd_simulate(
    cfg: &ScenarioConfig,
    replicates: usize,
    snapshots: &[f64],
    out: &mut OutputDir,
) -> Result<RunInfo> {
    if replicates == 0 {
        return Err(Error::Config {
            field: "replicates".into(),
            reason: "must be positive".into(),
        });
    }
    let request = SnapshotRequest::at(snapshots);
    request.validate(cfg.model.horizon)?;
    let runs = run_ensemble(cfg, replicates, &request)?;
    let width = (replicates - 1).max(1).to_string().len().max(4);
    let mut info = RunInfo::default();
    let mut summaries = Vec::new();
    for (r, run) in runs.iter().enumerate() {
        let tag = format!("{r:0width$}");
        out.write(
            &format!("replicates/replicate_{tag}.csv"),
            run.trajectory.to_csv().as_bytes(),
        )
        .map_err(io)?;
        for snap in &run.snapshots {
            let stem = format!("snapshots/replicate_{tag}/t_{}", time_label(snap.time));
            out.write(&format!("{stem}.edges"), snap.edge_list().as_bytes())
                .map_err(io)?;
            out.write(&format!("{stem}.vertices"), snap.vertex_table().as_bytes())
                .map_err(io)?;
            let g = empirical_for_image(snap, cfg.solver.graphon_resolution)?;
            out.write(&format!("{stem}.empirical.pgm"), &g.to_pgm()).map_err(io)?;
        }
        let c = run.final_state.counts();
        summaries.push(ReplicateSummary {
            replicate: r as u64,
            counters: run.counters,
            final_susceptible: c.susceptible,
            final_infected: c.infected,
            final_recovered: c.recovered,
        });
        info.streams.push(r as u64);
        info.events += run.counters.total_events;
    }
    let trajectories: Vec<_> = runs.iter().map(|r| &r.trajectory).collect();
    out.write("ensemble.csv", EnsembleStats::new(&trajectories).to_csv().as_bytes())
        .map_err(io)?;
    out.write_json(
        "summary.json",
        &SimulateSummary {
            n_vertices: cfg.sim.n_vertices,
            replicates,
            base_seed: cfg.sim.base_seed,
            snapshot_times: snapshots.to_vec(),
            runs: summaries,
        },
    )
    .map_err(io)?;
    info.simulated_runs = replicates as u64;
    Ok(info)
}

pub fn cmd_compare(
    cfg: &ScenarioConfig,
    n_list: &[usize],
    replicates: usize,
    times: &[f64],
    out: &mut OutputDir,
) -> Result<RunInfo> {
    let sol = solve(cfg)?;
    let report: CompareReport = compare(cfg, &sol, n_list, replicates, times)?;
    out.write("distances.csv", report.distances_csv().as_bytes())
        .map_err(io)?;
    out.write("sup_p_i.csv", report.sup_csv().as_bytes()).map_err(io)?;
    out.write_json("compare.json", &report).map_err(io)?;
    Ok(RunInfo {
        streams: (0..replicates as u64).collect(),
        events: report.events,
        simulated_runs: (replicates * n_list.len()) as u64,
        warnings: report.warnings.clone(),
    })
}

#[derive(Serialize)]
struct SweepReport<'a> {
    p0: f64,
    c: f64,
    sweep: &'a GammaSweep,
}

pub fn cmd_analyze(cfg: &ScenarioConfig, gammas: &[f64], out: &mut OutputDir) -> Result<RunInfo> {
    // fail on the sweep precondition before spending time on the solve
    let sweep = if gammas.is_empty() {
        None
    } else {
        Some(gamma_sweep(cfg, gammas)?)
    };
    let sol = solve(cfg)?;
    let summary = summarize(&sol)?;
    out.write_json("summary.json", &summary).map_err(io)?;
    if let Some(sweep) = sweep {
        out.write("gamma_sweep.csv", sweep.to_csv().as_bytes()).map_err(io)?;
        out.write_json(
            "gamma_sweep.json",
            &SweepReport {
                p0: sweep.p0,
                c: sweep.c,
                sweep: &sweep,
            },
        )
        .map_err(io)?;
    }
    Ok(RunInfo::default())
}

pub fn cmd_graphon(cfg: &ScenarioConfig, times: &[f64], out: &mut OutputDir) -> Result<RunInfo> {
    let r = cfg.solver.graphon_resolution;
    let n = cfg.sim.n_vertices;
    if r == 0 || !n.is_multiple_of(r) {
        return Err(Error::Config {
            field: "solver.graphon_resolution".into(),
            reason: format!("resolution {r} must divide sim.n_vertices = {n}"),
        });
    }
    let request = SnapshotRequest::at(times);
    request.validate(cfg.model.horizon)?;
    let sol = solve(cfg)?;
    let run = simulate(cfg, cfg.sim.base_seed, &request)?;
    let mut table = String::from("t,graphon_l1,cut_lower,cut_upper\n");
    for (k, snap) in run.snapshots.iter().enumerate() {
        let label = time_label(snap.time);
        let lim = limiting_graphon(&sol, snap.time, r)?;
        out.write(&format!("graphon/limiting_t_{label}.pgm"), &lim.to_pgm())
            .map_err(io)?;
        out.write(&format!("graphon/limiting_t_{label}.csv"), lim.to_csv().as_bytes())
            .map_err(io)?;
        let emp = empirical_for_image(snap, r)?;
        out.write(&format!("graphon/empirical_t_{label}.pgm"), &emp.to_pgm())
            .map_err(io)?;
        let coarse = empirical_graphon_coarse(snap, r)?;
        let target = coarse_limiting_graphon(&sol, snap.time, r)?;
        let l1 = l1_distance(&coarse, &target)?;
        let cut = cut_norm_estimate(&coarse, &target, DEFAULT_CUT_STARTS, cfg.sim.base_seed ^ k as u64)?;
        table.push_str(&format!(
            "{},{},{},{}\n",
            sig9(snap.time),
            sig9(l1),
            sig9(cut.lower),
            sig9(cut.upper)
        ));
    }
    out.write("graphon_distances.csv", table.as_bytes()).map_err(io)?;
    Ok(RunInfo {
        streams: vec![0],
        events: run.counters.total_events,
        simulated_runs: 1,
        warnings: Vec::new(),
    })
}
