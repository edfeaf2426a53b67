//! Command-line front end: reads a scenario file, runs one subcommand and
//! writes plot-ready files plus a `manifest.json` listing each of them with
//! its SHA-256 digest.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration or usage error,
//! 3 numerical failure, 4 resource cap (event budget) reached.

pub mod args;
pub mod commands;
pub mod compare;
pub mod manifest;

use std::ffi::OsString;
use std::time::Instant;

use clap::Parser;
use sirgraph::Error;

use crate::args::{Cli, Command};
use crate::commands::{effective_config, RunInfo};
use crate::manifest::{sha256_hex, Metrics, OutputDir, RunManifest, Seeds, MANIFEST_FILE};

/// Thread-count override; results do not depend on it.
pub const THREADS_ENV: &str = "SIRGRAPH_THREADS";

pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::Parse(_) | Error::Domain(_) | Error::Contract(_) => EXIT_CONFIG,
        Error::Numerical { .. } => EXIT_NUMERICAL,
        Error::EventBudget { .. } => EXIT_RESOURCE,
        Error::Io(_) => EXIT_IO,
    }
}

fn execute(cli: &Cli) -> Result<RunManifest, Error> {
    let start = Instant::now();
    let common = cli.command.common();
    let raw = std::fs::read(&common.config)?;
    let mut out;
    let (cfg, info): (_, RunInfo) = match &cli.command {
        Command::Solve { common } => {
            let cfg = effective_config(common, None)?;
            out = OutputDir::create(&common.out)?;
            let info = commands::cmd_solve(&cfg, &mut out)?;
            (cfg, info)
        }
        Command::Simulate {
            common,
            sim,
            replicates,
            snapshots,
        } => {
            let cfg = effective_config(common, Some(sim))?;
            out = OutputDir::create(&common.out)?;
            let reps = replicates.unwrap_or(cfg.sim.replicates);
            let info = commands::cmd_simulate(&cfg, reps, snapshots, &mut out)?;
            (cfg, info)
        }
        Command::Compare {
            common,
            sim,
            n_list,
            replicates,
            times,
        } => {
            let cfg = effective_config(common, Some(sim))?;
            out = OutputDir::create(&common.out)?;
            let reps = replicates.unwrap_or(cfg.sim.replicates);
            let info = commands::cmd_compare(&cfg, n_list, reps, times, &mut out)?;
            (cfg, info)
        }
        Command::Analyze { common, gammas } => {
            let cfg = effective_config(common, None)?;
            out = OutputDir::create(&common.out)?;
            let info = commands::cmd_analyze(&cfg, gammas, &mut out)?;
            (cfg, info)
        }
        Command::Graphon { common, sim, times } => {
            let cfg = effective_config(common, Some(sim))?;
            out = OutputDir::create(&common.out)?;
            let info = commands::cmd_graphon(&cfg, times, &mut out)?;
            (cfg, info)
        }
    };
    for w in &info.warnings {
        eprintln!("warning: {w}");
    }
    let root = out.root().to_path_buf();
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        subcommand: cli.command.name().to_string(),
        config_sha256: sha256_hex(cfg.to_toml_string().as_bytes()),
        config_file_sha256: sha256_hex(&raw),
        seeds: Seeds {
            base_seed: cfg.sim.base_seed,
            streams: info.streams,
        },
        files: out.into_files(),
        metrics: Metrics {
            wall_clock_seconds: start.elapsed().as_secs_f64(),
            events: info.events,
            simulated_runs: info.simulated_runs,
        },
    };
    let mut text = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
    text.push('\n');
    std::fs::write(root.join(MANIFEST_FILE), text)?;
    Ok(manifest)
}

fn thread_count() -> Result<Option<usize>, String> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(Some(k)),
            _ => Err(format!("{THREADS_ENV} must be a positive integer, got {v:?}")),
        },
    }
}

/// Runs a parsed command on a pool sized by [`THREADS_ENV`].
pub fn run(cli: &Cli) -> Result<RunManifest, Error> {
    let threads = thread_count().map_err(|reason| Error::Config {
        field: THREADS_ENV.into(),
        reason,
    })?;
    match threads {
        None => execute(cli),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(std::io::Error::other)?;
            pool.install(|| execute(cli))
        }
    }
}

/// Full entry point: parses `args`, runs, reports and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match run(&cli) {
        Ok(m) => {
            eprintln!(
                "wrote {} files to {}",
                m.files.len() + 1,
                cli.command.common().out.display()
            );
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
