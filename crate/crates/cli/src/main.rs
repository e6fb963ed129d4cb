use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use safe_motion::baseline_ft::{run_ft_demo, FtDemo};
use safe_motion::collision::closest_pair;
use safe_motion::dynamics::static_torques;
use safe_motion::harness::{
    aggregate_metrics, read_logs, replay, run_batch, worker_count, write_batch, AgentSpec, EpisodeLog, LimitSet,
    MetricsSummary, RunConfig,
};
use safe_motion::robot_model::{load_scene_file, CollisionPair, SceneDoc};
use safe_motion::safety_gate::ProtectionMode;
use safe_motion::task_env::{ProximityPenalty, TargetMode};
use safe_motion::{Error, Result};
use serde_json::json;

const DEFAULT_DEMO: &str = include_str!("../../core/fixtures/ft_demo.json");

#[derive(Parser)]
#[command(
    name = "safe-motion",
    version,
    about = "Safety layer for learned manipulator control"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct RunArgs {
    /// Scene file (JSON)
    #[arg(long)]
    scene: PathBuf,
    /// Protection mode: none, c or ct
    #[arg(long, default_value = "ct")]
    mode: ProtectionMode,
    /// Limit set: a (full) or b (reduced)
    #[arg(long, default_value = "a")]
    limits: LimitSet,
    /// Override the scene's safety distance, in m
    #[arg(long)]
    safety_distance: Option<f64>,
    /// Episode count
    #[arg(long, default_value_t = 100)]
    episodes: usize,
    /// Seed of the first episode; episode i uses seed + i
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `random`, or a JSON file with one action array per decision step
    #[arg(long, default_value = "random")]
    agent: String,
    /// Target mode: alt or sim
    #[arg(long, default_value = "sim")]
    target_mode: TargetMode,
    /// Proximity penalty threshold D, in m
    #[arg(long)]
    penalty_d: Option<f64>,
    /// Episode duration, in s
    #[arg(long, default_value_t = 8.0)]
    duration: f64,
    /// Collision check frequency, in Hz
    #[arg(long, default_value_t = 20.0)]
    f_c: f64,
    /// Distance measurement frequency, in Hz
    #[arg(long, default_value_t = RunConfig::DEFAULT_MEASURE_HZ)]
    measure_hz: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Run episodes and write one JSONL log per episode plus summary.csv and timings.csv
    Run {
        #[command(flatten)]
        args: RunArgs,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Aggregate episode logs (files or directories) into a CSV summary
    Metrics {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Write the CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the velocity-damper demo next to the gate and write per-sample CSV
    FtDemo {
        /// Demo scenario file; the bundled scenario when omitted
        #[arg(long)]
        fixture: Option<PathBuf>,
        /// Write the CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a scene file and report its home-pose clearances
    CheckScene { scene: PathBuf },
    /// Report wall-clock times per episode and per decision
    Bench {
        #[command(flatten)]
        args: RunArgs,
    },
    /// Re-run an episode log and compare it byte for byte
    Replay { log: PathBuf },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io_at(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn run_config(a: &RunArgs) -> Result<RunConfig> {
    let scene: SceneDoc = read_json(&a.scene)?;
    let mut c = RunConfig::new(scene, a.mode);
    c.limits = a.limits;
    c.safety_distance_m = a.safety_distance;
    c.episode.duration_s = a.duration;
    c.episode.target_mode = a.target_mode;
    c.episode.penalty = a.penalty_d.map(|d| ProximityPenalty {
        threshold_m: d,
        max: ProximityPenalty::DEFAULT_MAX,
    });
    c.gate.f_c = a.f_c;
    c.measure_hz = a.measure_hz;
    if a.agent != "random" {
        c.agent = AgentSpec::Script {
            actions: read_json(Path::new(&a.agent))?,
        };
    }
    Ok(c)
}

fn collect_logs(inputs: &[PathBuf]) -> Result<Vec<EpisodeLog>> {
    let mut logs = vec![];
    for p in inputs {
        if p.is_dir() {
            logs.extend(read_logs(p)?);
        } else {
            logs.push(EpisodeLog::read_jsonl(p)?);
        }
    }
    Ok(logs)
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn summary_json(m: &MetricsSummary) -> serde_json::Value {
    serde_json::to_value(m).expect("summary serializes")
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { args, out } => {
            let config = run_config(&args)?;
            let logs = run_batch(&config, args.episodes, args.seed, worker_count()?)?;
            write_batch(&logs, &out)?;
            let failed: Vec<_> = logs
                .iter()
                .filter_map(|l| l.stats.error.as_ref().map(|e| (l.header.episode, e)))
                .collect();
            if args.episodes > 0 {
                println!("{}", summary_json(&aggregate_metrics(&logs)?));
            }
            if let Some((episode, e)) = failed.first() {
                return Err(Error::Invariant(format!("episode {episode} aborted: {e}")));
            }
            Ok(())
        }
        Command::Metrics { inputs, out } => {
            let logs = collect_logs(&inputs)?;
            emit(&aggregate_metrics(&logs)?.to_csv(), &out)
        }
        Command::FtDemo { fixture, out } => {
            let demo: FtDemo = match fixture {
                Some(p) => read_json(&p)?,
                None => serde_json::from_str(DEFAULT_DEMO)?,
            };
            let report = run_ft_demo(&demo)?;
            let mut csv = String::from("controller,t,distance,rate,min_rate,feasible,adapted\n");
            for r in &report.rows {
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    r.controller, r.t, r.distance, r.rate, r.min_rate, r.feasible, r.adapted
                ));
            }
            emit(&csv, &out)?;
            eprintln!(
                "{}",
                json!({
                    "baseline_infeasible_steps": report.baseline_infeasible_steps,
                    "baseline_first_infeasible": report.baseline_first_infeasible,
                    "baseline_min_distance": report.baseline_min_distance,
                    "gate_min_distance": report.gate_min_distance,
                    "gate_min_distance_checked": report.gate_min_distance_checked,
                    "gate_adapted_steps": report.gate_adapted_steps,
                })
            );
            Ok(())
        }
        Command::CheckScene { scene } => {
            let s = load_scene_file(&scene)?;
            let home = s.home();
            let closest = closest_pair(&s, &home, 0.0)?;
            let tau = static_torques(&s, &home)?;
            let load = tau
                .iter()
                .zip(s.joint_limits())
                .map(|(t, l)| l.normalize_torque(*t).abs())
                .fold(0.0, f64::max);
            let link_link = s
                .pairs
                .iter()
                .filter(|p| matches!(p, CollisionPair::LinkLink { .. }))
                .count();
            let clear = closest.as_ref().is_none_or(|c| c.distance >= s.safety_distance);
            println!(
                "{}",
                json!({
                    "valid": true,
                    "robots": s.robots.iter().map(|r| json!({"name": r.name, "dof": r.dof()})).collect::<Vec<_>>(),
                    "dof": s.dof(),
                    "obstacles": s.obstacles.len(),
                    "obstacle_link_pairs": s.pairs.len() - link_link,
                    "link_link_pairs": link_link,
                    "safety_distance_m": s.safety_distance,
                    "home_closest": closest,
                    "home_clear": clear,
                    "home_max_gravity_torque_ratio": load,
                })
            );
            if clear {
                Ok(())
            } else {
                Err(Error::Validation("home pose lies inside the safety distance".into()))
            }
        }
        Command::Bench { args } => {
            let config = run_config(&args)?;
            let budget = config.episode.duration_s;
            let logs = run_batch(&config, args.episodes, args.seed, 1)?;
            let wall: Vec<f64> = logs.iter().map(|l| l.timings.episode_s).collect();
            let gate: Vec<f64> = logs.iter().map(|l| l.timings.gate_s).collect();
            let propose: Vec<f64> = logs.iter().flat_map(|l| l.timings.propose_s.iter().copied()).collect();
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len().max(1) as f64;
            let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
            let dt = 1.0 / config.gate.f_n;
            println!(
                "{}",
                json!({
                    "mode": config.mode.label(),
                    "dof": logs.first().map(|l| l.stats.final_state.p.len()),
                    "episodes": logs.len(),
                    "episode_duration_s": budget,
                    "episode_wall_mean_s": mean(&wall),
                    "episode_wall_max_s": max(&wall),
                    "gate_mean_s": mean(&gate),
                    "propose_mean_s": mean(&propose),
                    "propose_max_s": max(&propose),
                    "real_time": max(&wall) < budget && mean(&propose) < dt,
                })
            );
            Ok(())
        }
        Command::Replay { log } => {
            let text = std::fs::read_to_string(&log)?;
            let parsed = EpisodeLog::from_jsonl(&text)?;
            let again = replay(&parsed.header)?.to_jsonl();
            let identical = again == text;
            println!(
                "{}",
                json!({"identical": identical, "digest": parsed.header.digest, "seed": parsed.header.seed})
            );
            if identical {
                Ok(())
            } else {
                Err(Error::Invariant("replayed log differs from the file".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({"error": e.kind(), "message": e.to_string()}));
            ExitCode::FAILURE
        }
    }
}
