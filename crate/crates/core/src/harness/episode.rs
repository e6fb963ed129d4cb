use std::time::Instant;

use super::agent::make_agent;
use super::config::RunConfig;
use super::log::{
    CollisionRecord, EpisodeLog, EpisodeStats, EpisodeTimings, KinematicPeaks, LogHeader, StepRecord, TorqueRecord,
    LOG_SCHEMA,
};
use crate::collision::scene_pair_distances;
use crate::dynamics::{measure_torques, ControllerModel, FilterHistory};
use crate::error::Result;
use crate::kinematic_limits::{sample_setpoints, sample_times, TrajectorySegment};
use crate::robot_model::{CollisionPair, Scene};
use crate::task_env::{env_reset, env_step};

/// Runs episodes of one configuration; the resolved scene is shared between runs.
#[derive(Debug, Clone)]
pub struct EpisodeRunner {
    pub config: RunConfig,
    pub scene: Scene,
    pub digest: String,
    controller: ControllerModel,
    link_link: Vec<usize>,
}

impl EpisodeRunner {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let scene = config.resolve_scene()?;
        let controller = ControllerModel::uniform(scene.dof(), config.gate.controller_time_constant)?;
        let link_link = scene
            .pairs
            .iter()
            .enumerate()
            .filter(|(_, p)| matches!(p, CollisionPair::LinkLink { .. }))
            .map(|(i, _)| i)
            .collect();
        Ok(EpisodeRunner {
            digest: config.digest(),
            config,
            scene,
            controller,
            link_link,
        })
    }

    /// Runs one episode. Errors after the start end the episode early; the log is still
    /// returned with the error recorded in its footer.
    pub fn run(&self, episode: usize, seed: u64) -> Result<EpisodeLog> {
        let started = Instant::now();
        let cfg = &self.config;
        let scene = &self.scene;
        let (mut env, mut obs) = env_reset(scene, &cfg.episode, cfg.mode, cfg.gate.clone(), seed)?;
        let mut agent = make_agent(&cfg.agent, seed);
        let mut history = env.gate.filter.clone();
        let mut timings = EpisodeTimings::default();
        let mut steps = Vec::with_capacity(env.total_steps());
        let mut error = None;
        let mut total_reward = 0.0;
        while !env.is_done() {
            let k = env.step;
            let m = agent.act(&obs, scene.dof());
            let t0 = Instant::now();
            let stepped = env_step(&mut env, &m);
            timings.gate_s += t0.elapsed().as_secs_f64();
            let (next_obs, reward, done, info) = match stepped {
                Ok(x) => x,
                Err(e) => {
                    error = Some(e.to_string());
                    break;
                }
            };
            obs = next_obs;
            total_reward += reward;
            let out = &info.outcome;
            timings.propose_s.push(out.proposal.timings.total);
            let measured = self.measure(&out.executed, &history, done);
            let (distances, link_link_distances, torques, kinematics, next_history) = match measured {
                Ok(x) => x,
                Err(e) => {
                    error = Some(e.to_string());
                    break;
                }
            };
            history = next_history;
            steps.push(StepRecord {
                step: k,
                t: k as f64 / cfg.gate.f_n,
                action: m,
                action_clamped: out.proposal.action_clamped,
                segment: out.executed.clone(),
                candidate_safe: out.proposal.safe,
                adapted: out.adapted,
                braking: env.gate.braking,
                backup_duration: env.gate.backup.duration,
                collision: out.proposal.collision.as_ref().map(CollisionRecord::from),
                torque: out.proposal.torque.as_ref().map(TorqueRecord::from),
                reward,
                penalty: info.penalty,
                reached: info.reached.clone(),
                distances,
                link_link_distances,
                torques,
                kinematics,
            });
        }
        timings.episode_s = started.elapsed().as_secs_f64();
        let stats = self.stats(&steps, env.reached.clone(), total_reward, env.gate.state.clone(), error);
        Ok(EpisodeLog {
            header: LogHeader {
                schema: LOG_SCHEMA.into(),
                digest: self.digest.clone(),
                episode,
                seed,
                config: cfg.clone(),
            },
            steps,
            stats,
            timings,
        })
    }

    #[allow(clippy::type_complexity)]
    fn measure(
        &self,
        segment: &TrajectorySegment,
        history: &FilterHistory,
        last: bool,
    ) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>, KinematicPeaks, FilterHistory)> {
        let scene = &self.scene;
        let segs = std::slice::from_ref(segment);
        let limits = scene.joint_limits();

        let times = sample_times(segs, self.config.measure_hz)?;
        let keep = if last { times.len() } else { times.len() - 1 };
        let mut distances = Vec::with_capacity(keep);
        let mut link_link = vec![];
        let mut q = Vec::new();
        for s in &times[..keep] {
            segment.eval_positions(s.sigma, &mut q);
            let d = scene_pair_distances(scene, &q)?;
            distances.push(d.iter().map(|p| p.distance).fold(f64::INFINITY, f64::min));
            if !self.link_link.is_empty() {
                link_link.push(
                    self.link_link
                        .iter()
                        .map(|&i| d[i].distance)
                        .fold(f64::INFINITY, f64::min),
                );
            }
        }

        let (rows, next) = measure_torques(scene, segs, &self.controller, self.config.gate.f_s, history)?;
        let torques = rows
            .iter()
            .map(|(_, tau)| {
                tau.iter()
                    .zip(&limits)
                    .map(|(t, l)| l.normalize_torque(*t).abs())
                    .fold(0.0, f64::max)
            })
            .collect();

        let mut peaks = KinematicPeaks::default();
        for (i, l) in limits.iter().enumerate() {
            peaks.jerk = peaks.jerk.max(l.normalize_jerk(segment.jerk(i)).abs());
        }
        for (_, s) in sample_setpoints(segs, self.config.kinematics_hz)? {
            for (i, l) in limits.iter().enumerate() {
                peaks.position = peaks.position.max(l.normalize_position(s.p[i]).abs());
                peaks.velocity = peaks.velocity.max(l.normalize_velocity(s.v[i]).abs());
                peaks.acceleration = peaks.acceleration.max(l.normalize_acceleration(s.a[i]).abs());
            }
        }
        Ok((distances, link_link, torques, peaks, next))
    }

    fn stats(
        &self,
        steps: &[StepRecord],
        targets_reached: Vec<usize>,
        total_reward: f64,
        final_state: crate::kinematic_limits::KinematicState,
        error: Option<String>,
    ) -> EpisodeStats {
        let s = self.scene.safety_distance;
        let all_d = || steps.iter().flat_map(|r| r.distances.iter().copied());
        let all_t = || steps.iter().flat_map(|r| r.torques.iter().copied());
        let closest = all_d().fold(f64::INFINITY, f64::min);
        EpisodeStats {
            steps: steps.len(),
            adapted: steps.iter().filter(|r| r.adapted).count(),
            distance_samples: all_d().count(),
            safety_zone_samples: all_d().filter(|d| *d < s).count(),
            closest_distance: closest.is_finite().then_some(closest),
            link_link_violations: steps
                .iter()
                .flat_map(|r| r.link_link_distances.iter())
                .filter(|d| **d < s)
                .count(),
            torque_samples: all_t().count(),
            torque_violations: all_t().filter(|t| *t > 1.0).count(),
            kinematics: steps.iter().fold(KinematicPeaks::default(), |a, r| a.max(r.kinematics)),
            max_torque: all_t().fold(0.0, f64::max),
            targets_reached,
            total_reward,
            final_state,
            error,
        }
    }
}

/// Runs a single episode of `config`.
pub fn run_episode(config: &RunConfig, episode: usize, seed: u64) -> Result<EpisodeLog> {
    EpisodeRunner::new(config.clone())?.run(episode, seed)
}

/// Re-runs the episode described by a log header.
pub fn replay(header: &LogHeader) -> Result<EpisodeLog> {
    run_episode(&header.config, header.episode, header.seed)
}
