use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::collision::CollisionVerdict;
use crate::dynamics::TorqueVerdict;
use crate::error::{Error, Result};
use crate::kinematic_limits::{KinematicState, TrajectorySegment};

pub const LOG_SCHEMA: &str = "safe-motion/episode-log/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub schema: String,
    pub digest: String,
    pub episode: usize,
    pub seed: u64,
    pub config: RunConfig,
}

/// Collision verdict of the candidate; the distance is absent when no pair was checked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionRecord {
    pub safe: bool,
    pub min_distance: Option<f64>,
    pub first_violation: Option<f64>,
    pub violating_pair: Option<usize>,
}

impl From<&CollisionVerdict> for CollisionRecord {
    fn from(v: &CollisionVerdict) -> Self {
        CollisionRecord {
            safe: v.safe,
            min_distance: v.min_distance.is_finite().then_some(v.min_distance),
            first_violation: v.first_violation,
            violating_pair: v.violating_pair,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorqueRecord {
    pub safe: bool,
    pub max_normalized: f64,
    pub first_violation: Option<f64>,
    pub violating_joint: Option<usize>,
}

impl From<&TorqueVerdict> for TorqueRecord {
    fn from(v: &TorqueVerdict) -> Self {
        TorqueRecord {
            safe: v.safe,
            max_normalized: v.max_normalized,
            first_violation: v.first_violation,
            violating_joint: v.violating_joint,
        }
    }
}

/// Largest normalized magnitude of each kinematic quantity over the dense samples of a step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct KinematicPeaks {
    pub position: f64,
    pub velocity: f64,
    pub acceleration: f64,
    pub jerk: f64,
}

impl KinematicPeaks {
    pub fn max(self, o: KinematicPeaks) -> KinematicPeaks {
        KinematicPeaks {
            position: self.position.max(o.position),
            velocity: self.velocity.max(o.velocity),
            acceleration: self.acceleration.max(o.acceleration),
            jerk: self.jerk.max(o.jerk),
        }
    }

    pub fn largest(&self) -> f64 {
        self.position.max(self.velocity).max(self.acceleration).max(self.jerk)
    }
}

/// One decision step with its dense measurements.
///
/// Distance and torque samples cover `[t, t + dt)`; the final step also includes its end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub action: Vec<f64>,
    pub action_clamped: bool,
    pub segment: TrajectorySegment,
    pub candidate_safe: bool,
    pub adapted: bool,
    pub braking: bool,
    /// Duration of the stored backup after the step.
    pub backup_duration: f64,
    pub collision: Option<CollisionRecord>,
    pub torque: Option<TorqueRecord>,
    pub reward: f64,
    pub penalty: f64,
    pub reached: Vec<usize>,
    /// Smallest pair distance per measurement sample.
    pub distances: Vec<f64>,
    /// Smallest link-link distance per measurement sample; empty without link-link pairs.
    pub link_link_distances: Vec<f64>,
    /// Largest normalized joint torque per torque sample.
    pub torques: Vec<f64>,
    pub kinematics: KinematicPeaks,
}

/// Totals of one episode, written as the last log line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeStats {
    pub steps: usize,
    pub adapted: usize,
    pub distance_samples: usize,
    pub safety_zone_samples: usize,
    pub closest_distance: Option<f64>,
    pub link_link_violations: usize,
    pub torque_samples: usize,
    pub torque_violations: usize,
    pub kinematics: KinematicPeaks,
    pub max_torque: f64,
    pub targets_reached: Vec<usize>,
    pub total_reward: f64,
    pub final_state: KinematicState,
    /// Set when the episode stopped early on an error.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogLine {
    Header(LogHeader),
    Step(StepRecord),
    Footer(EpisodeStats),
}

/// Wall-clock measurements kept out of the deterministic log.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTimings {
    /// Seconds per propose call.
    pub propose_s: Vec<f64>,
    /// Seconds spent in the gate (propose and commit) over the episode.
    pub gate_s: f64,
    /// Seconds for the whole episode including measurements.
    pub episode_s: f64,
}

impl EpisodeTimings {
    pub fn propose_mean(&self) -> f64 {
        if self.propose_s.is_empty() {
            0.0
        } else {
            self.propose_s.iter().sum::<f64>() / self.propose_s.len() as f64
        }
    }

    pub fn propose_max(&self) -> f64 {
        self.propose_s.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub header: LogHeader,
    pub steps: Vec<StepRecord>,
    pub stats: EpisodeStats,
    pub timings: EpisodeTimings,
}

impl EpisodeLog {
    /// JSON-lines encoding: header, one line per step, footer.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut push = |line: &LogLine| {
            out.push_str(&serde_json::to_string(line).expect("log line serializes"));
            out.push('\n');
        };
        push(&LogLine::Header(self.header.clone()));
        for s in &self.steps {
            push(&LogLine::Step(s.clone()));
        }
        push(&LogLine::Footer(self.stats.clone()));
        out
    }

    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let at = |e| Error::io_at(path, e);
        let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(at)?);
        f.write_all(self.to_jsonl().as_bytes()).map_err(at)?;
        f.flush().map_err(at)
    }

    /// Parses a log; timings are not part of the file and come back empty.
    pub fn from_jsonl(text: &str) -> Result<Self> {
        Self::from_lines(text.lines().map(|l| Ok(l.to_string())))
    }

    pub fn read_jsonl(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::io::BufReader::new(std::fs::File::open(path).map_err(|e| Error::io_at(path, e))?);
        Self::from_lines(f.lines().map(|l| l.map_err(|e| Error::io_at(path, e))))
    }

    fn from_lines(lines: impl Iterator<Item = Result<String>>) -> Result<Self> {
        let mut header = None;
        let mut steps = vec![];
        let mut stats = None;
        for (n, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: LogLine = serde_json::from_str(&line).map_err(|e| Error::Parse {
                path: format!("line {}", n + 1),
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
            match parsed {
                LogLine::Header(h) => header = Some(h),
                LogLine::Step(s) => steps.push(s),
                LogLine::Footer(f) => stats = Some(f),
            }
        }
        let header = header.ok_or_else(|| Error::InvalidArgument("log has no header line".into()))?;
        if header.schema != LOG_SCHEMA {
            return Err(Error::InvalidArgument(format!(
                "unsupported log schema `{}`",
                header.schema
            )));
        }
        Ok(EpisodeLog {
            header,
            steps,
            stats: stats.ok_or_else(|| Error::InvalidArgument("log has no footer line".into()))?,
            timings: EpisodeTimings::default(),
        })
    }
}
