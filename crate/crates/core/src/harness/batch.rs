use std::path::Path;

use rayon::prelude::*;

use super::config::RunConfig;
use super::episode::EpisodeRunner;
use super::log::EpisodeLog;
use super::metrics::aggregate_metrics;
use crate::error::{Error, Result};

/// Environment variable holding the worker count for batch runs.
pub const WORKERS_ENV: &str = "SAFE_MOTION_WORKERS";

/// Worker count from [`WORKERS_ENV`], falling back to the available parallelism.
pub fn worker_count() -> Result<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::InvalidArgument(format!(
                "{WORKERS_ENV} must be a positive integer, got `{v}`"
            ))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

/// Seed of episode `index` in a batch starting at `base_seed`.
pub fn episode_seed(base_seed: u64, index: usize) -> u64 {
    base_seed.wrapping_add(index as u64)
}

/// Runs `episodes` episodes on `workers` threads; logs come back in episode order.
pub fn run_batch(config: &RunConfig, episodes: usize, base_seed: u64, workers: usize) -> Result<Vec<EpisodeLog>> {
    let runner = EpisodeRunner::new(config.clone())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        (0..episodes)
            .into_par_iter()
            .map(|i| runner.run(i, episode_seed(base_seed, i)))
            .collect()
    })
}

pub fn episode_file_name(index: usize) -> String {
    format!("episode_{index:04}.jsonl")
}

pub const TIMINGS_HEADER: &str = "episode,seed,steps,episode_s,gate_s,propose_mean_s,propose_max_s";

pub fn timings_csv(logs: &[EpisodeLog]) -> String {
    let mut out = format!("{TIMINGS_HEADER}\n");
    for l in logs {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            l.header.episode,
            l.header.seed,
            l.steps.len(),
            l.timings.episode_s,
            l.timings.gate_s,
            l.timings.propose_mean(),
            l.timings.propose_max()
        ));
    }
    out
}

/// Writes one JSONL file per episode plus `summary.csv` and `timings.csv` into `dir`.
pub fn write_batch(logs: &[EpisodeLog], dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io_at(dir, e))?;
    for l in logs {
        l.write_jsonl(dir.join(episode_file_name(l.header.episode)))?;
    }
    if !logs.is_empty() {
        let path = dir.join("summary.csv");
        std::fs::write(&path, aggregate_metrics(logs)?.to_csv()).map_err(|e| Error::io_at(&path, e))?;
    }
    let path = dir.join("timings.csv");
    std::fs::write(&path, timings_csv(logs)).map_err(|e| Error::io_at(&path, e))?;
    Ok(())
}

/// Reads every `*.jsonl` file in `dir`, sorted by name.
pub fn read_logs(dir: impl AsRef<Path>) -> Result<Vec<EpisodeLog>> {
    let dir = dir.as_ref();
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::io_at(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    paths.sort();
    paths.iter().map(EpisodeLog::read_jsonl).collect()
}
