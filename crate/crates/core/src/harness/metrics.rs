use serde::{Deserialize, Serialize};

use super::log::{EpisodeLog, KinematicPeaks};
use crate::error::{Error, Result};

pub const SUMMARY_SCHEMA: &str = "safe-motion/summary/1";

/// Aggregate over a batch of episodes of one configuration.
///
/// Fractions are pooled over all steps or samples of the batch; extremes are taken over all
/// samples; per-episode quantities are means over episodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub digest: String,
    pub episodes: usize,
    pub steps: usize,
    pub adaptation_rate: f64,
    /// Smallest measured pair distance; negative values are penetrations.
    pub closest_distance: Option<f64>,
    pub penetration: bool,
    /// Fraction of distance samples below the safety distance.
    pub safety_zone_fraction: f64,
    pub distance_samples: usize,
    pub closest_link_link: Option<f64>,
    pub link_link_violations: usize,
    /// Longest stored backup after any step, in seconds.
    pub max_deceleration_time: f64,
    pub interventions: usize,
    /// Mean length of a run of consecutive adapted steps, in seconds.
    pub mean_influence_time: f64,
    /// Mean duration of the backup stored right before an intervention, in seconds.
    pub mean_deceleration_time_prior: f64,
    pub torque_violation_episode_fraction: f64,
    pub torque_violation_samples: usize,
    pub max_normalized: KinematicPeaks,
    pub max_normalized_torque: f64,
    /// Mean targets reached per episode, per robot.
    pub targets_reached: Vec<f64>,
    pub episodes_with_errors: usize,
    /// Wall-clock seconds per episode; absent for logs read back from disk.
    pub wall_clock_mean: Option<f64>,
    pub wall_clock_max: Option<f64>,
    pub propose_mean: Option<f64>,
    pub propose_max: Option<f64>,
}

fn safety_distance(log: &EpisodeLog) -> f64 {
    let c = &log.header.config;
    c.safety_distance_m.unwrap_or(c.scene.safety_distance_m)
}

pub fn aggregate_metrics(logs: &[EpisodeLog]) -> Result<MetricsSummary> {
    let first = logs
        .first()
        .ok_or_else(|| Error::InvalidArgument("no logs to aggregate".into()))?;
    for l in logs {
        if l.header.digest != first.header.digest {
            return Err(Error::MixedConfig(first.header.digest.clone(), l.header.digest.clone()));
        }
    }
    let s = safety_distance(first);
    let dt = 1.0 / first.header.config.gate.f_n;
    let robots = first.header.config.scene.robots.len();

    let mut steps = 0;
    let mut adapted = 0;
    let mut closest = f64::INFINITY;
    let mut closest_ll = f64::INFINITY;
    let mut zone = 0;
    let mut samples = 0;
    let mut ll_violations = 0;
    let mut max_decel: f64 = 0.0;
    let mut runs = vec![];
    let mut prior = vec![];
    let mut torque_episodes = 0;
    let mut torque_samples = 0;
    let mut peaks = KinematicPeaks::default();
    let mut max_torque: f64 = 0.0;
    let mut reached = vec![0.0; robots];
    let mut errors = 0;
    for log in logs {
        let mut episode_torque = false;
        let mut run = 0usize;
        for (k, r) in log.steps.iter().enumerate() {
            steps += 1;
            max_decel = max_decel.max(r.backup_duration);
            if r.adapted {
                adapted += 1;
                if run == 0 {
                    prior.push(if k == 0 { 0.0 } else { log.steps[k - 1].backup_duration });
                }
                run += 1;
            } else if run > 0 {
                runs.push(run);
                run = 0;
            }
            for d in &r.distances {
                closest = closest.min(*d);
                zone += (*d < s) as usize;
                samples += 1;
            }
            for d in &r.link_link_distances {
                closest_ll = closest_ll.min(*d);
                ll_violations += (*d < s) as usize;
            }
            for t in &r.torques {
                max_torque = max_torque.max(*t);
                if *t > 1.0 {
                    torque_samples += 1;
                    episode_torque = true;
                }
            }
            peaks = peaks.max(r.kinematics);
        }
        if run > 0 {
            runs.push(run);
        }
        torque_episodes += episode_torque as usize;
        for (i, n) in log.stats.targets_reached.iter().enumerate().take(robots) {
            reached[i] += *n as f64;
        }
        errors += log.stats.error.is_some() as usize;
    }
    let n = logs.len() as f64;
    let mean = |v: &[f64]| {
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    let influence: Vec<f64> = runs.iter().map(|r| *r as f64 * dt).collect();
    let timed: Vec<_> = logs.iter().filter(|l| l.timings.episode_s > 0.0).collect();
    let wall: Vec<f64> = timed.iter().map(|l| l.timings.episode_s).collect();
    let propose: Vec<f64> = timed.iter().flat_map(|l| l.timings.propose_s.iter().copied()).collect();
    let finite = |x: f64| x.is_finite().then_some(x);
    Ok(MetricsSummary {
        digest: first.header.digest.clone(),
        episodes: logs.len(),
        steps,
        adaptation_rate: if steps == 0 { 0.0 } else { adapted as f64 / steps as f64 },
        closest_distance: finite(closest),
        penetration: closest < 0.0,
        safety_zone_fraction: if samples == 0 {
            0.0
        } else {
            zone as f64 / samples as f64
        },
        distance_samples: samples,
        closest_link_link: finite(closest_ll),
        link_link_violations: ll_violations,
        max_deceleration_time: max_decel,
        interventions: runs.len(),
        mean_influence_time: mean(&influence),
        mean_deceleration_time_prior: mean(&prior),
        torque_violation_episode_fraction: torque_episodes as f64 / n,
        torque_violation_samples: torque_samples,
        max_normalized: peaks,
        max_normalized_torque: max_torque,
        targets_reached: reached.iter().map(|r| r / n).collect(),
        episodes_with_errors: errors,
        wall_clock_mean: (!wall.is_empty()).then(|| mean(&wall)),
        wall_clock_max: (!wall.is_empty()).then(|| wall.iter().copied().fold(0.0, f64::max)),
        propose_mean: (!propose.is_empty()).then(|| mean(&propose)),
        propose_max: (!propose.is_empty()).then(|| propose.iter().copied().fold(0.0, f64::max)),
    })
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl MetricsSummary {
    pub const CSV_HEADER: &'static str = "schema,digest,episodes,steps,adaptation_rate,closest_distance,penetration,\
safety_zone_fraction,distance_samples,closest_link_link,link_link_violations,max_deceleration_time,interventions,\
mean_influence_time,mean_deceleration_time_prior,torque_violation_episode_fraction,torque_violation_samples,\
max_position,max_velocity,max_acceleration,max_jerk,max_torque,targets_reached,episodes_with_errors,\
wall_clock_mean,wall_clock_max,propose_mean,propose_max";

    /// One CSV data row matching [`Self::CSV_HEADER`]; per-robot targets are joined with `;`.
    pub fn csv_row(&self) -> String {
        let targets: Vec<String> = self.targets_reached.iter().map(|t| t.to_string()).collect();
        [
            SUMMARY_SCHEMA.to_string(),
            self.digest.clone(),
            self.episodes.to_string(),
            self.steps.to_string(),
            self.adaptation_rate.to_string(),
            opt(self.closest_distance),
            self.penetration.to_string(),
            self.safety_zone_fraction.to_string(),
            self.distance_samples.to_string(),
            opt(self.closest_link_link),
            self.link_link_violations.to_string(),
            self.max_deceleration_time.to_string(),
            self.interventions.to_string(),
            self.mean_influence_time.to_string(),
            self.mean_deceleration_time_prior.to_string(),
            self.torque_violation_episode_fraction.to_string(),
            self.torque_violation_samples.to_string(),
            self.max_normalized.position.to_string(),
            self.max_normalized.velocity.to_string(),
            self.max_normalized.acceleration.to_string(),
            self.max_normalized.jerk.to_string(),
            self.max_normalized_torque.to_string(),
            targets.join(";"),
            self.episodes_with_errors.to_string(),
            opt(self.wall_clock_mean),
            opt(self.wall_clock_max),
            opt(self.propose_mean),
            opt(self.propose_max),
        ]
        .join(",")
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}\n", Self::CSV_HEADER, self.csv_row())
    }
}
