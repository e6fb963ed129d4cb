//! Episode runner, agents, logs and metrics.
//!
//! Each episode is written as JSON lines: a header with the full configuration and its
//! SHA-256 digest, one line per decision step with dense measurements, and a footer with
//! totals. Wall-clock timings are kept out of the log so that replays compare bit-exactly.

mod agent;
mod batch;
mod config;
mod episode;
mod log;
mod metrics;

pub use agent::{make_agent, Agent, RandomAgent, ScriptAgent};
pub use batch::{
    episode_file_name, episode_seed, read_logs, run_batch, timings_csv, worker_count, write_batch, TIMINGS_HEADER,
    WORKERS_ENV,
};
pub use config::{AgentSpec, LimitSet, RunConfig};
pub use episode::{replay, run_episode, EpisodeRunner};
pub use log::{
    CollisionRecord, EpisodeLog, EpisodeStats, EpisodeTimings, KinematicPeaks, LogHeader, LogLine, StepRecord,
    TorqueRecord, LOG_SCHEMA,
};
pub use metrics::{aggregate_metrics, MetricsSummary, SUMMARY_SCHEMA};
