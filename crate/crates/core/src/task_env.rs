//! Reaching task: every robot moves its last link toward target points.
//!
//! Observation layout, all entries `f64`:
//!
//! 1. normalized joint positions, one per joint, in scene joint order;
//! 2. normalized joint velocities;
//! 3. normalized joint accelerations;
//! 4. target positions (x, y, z), one target per robot, in robot order;
//! 5. target position minus last-link frame origin, per target;
//! 6. in alternating mode only, one activity flag (0 or 1) per target.

use nalgebra::{Isometry3, Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::collision::{pair_distance, Shape};
use crate::error::{Error, Result};
use crate::kinematic_limits::KinematicState;
use crate::robot_model::Scene;
use crate::safety_gate::{gate_step, init_gate, GateConfig, GateState, ProtectionMode, StepOutcome};

/// Attempts per target before spawning gives up.
pub const MAX_SPAWN_ATTEMPTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TargetMode {
    /// One active target, handed to the robots in turn.
    Alternating,
    /// One active target per robot.
    Simultaneous,
}

impl std::str::FromStr for TargetMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "alt" | "alternating" => Ok(TargetMode::Alternating),
            "sim" | "simultaneous" => Ok(TargetMode::Simultaneous),
            _ => Err(Error::InvalidArgument(format!(
                "unknown target mode `{s}` (expected alt or sim)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetPoint {
    pub position: [f64; 3],
    pub robot: usize,
    pub active: bool,
}

/// Axis-aligned box that target points are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpawnRegion {
    pub min_m: [f64; 3],
    pub max_m: [f64; 3],
}

impl Default for SpawnRegion {
    fn default() -> Self {
        SpawnRegion {
            min_m: [-1.0, -1.0, 0.05],
            max_m: [1.0, 1.0, 1.3],
        }
    }
}

impl SpawnRegion {
    fn contains(&self, p: &Point3<f64>) -> bool {
        (0..3).all(|i| p[i] >= self.min_m[i] && p[i] <= self.max_m[i])
    }
}

/// Penalty on candidates whose clearance margin `min distance - S` falls below `threshold_m`.
/// It ramps linearly from 0 at the threshold to `max` at a margin of 0 and below.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProximityPenalty {
    pub threshold_m: f64,
    pub max: f64,
}

impl ProximityPenalty {
    pub const DEFAULT_MAX: f64 = 0.5;

    pub fn value(&self, margin: f64) -> f64 {
        if margin >= self.threshold_m {
            0.0
        } else {
            self.max * ((self.threshold_m - margin) / self.threshold_m).min(1.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    pub duration_s: f64,
    pub target_mode: TargetMode,
    pub reach_threshold_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty: Option<ProximityPenalty>,
    #[serde(default)]
    pub spawn_region: SpawnRegion,
    /// Extra clearance beyond `S` required between a new target and every obstacle.
    pub spawn_clearance_m: f64,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        EpisodeConfig {
            duration_s: 8.0,
            target_mode: TargetMode::Simultaneous,
            reach_threshold_m: 0.05,
            penalty: None,
            spawn_region: SpawnRegion::default(),
            spawn_clearance_m: 0.05,
        }
    }
}

impl EpisodeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s.is_finite() && self.duration_s >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "duration must be >= 0, got {}",
                self.duration_s
            )));
        }
        if !(self.reach_threshold_m.is_finite() && self.reach_threshold_m > 0.0) {
            return Err(Error::InvalidArgument("reach threshold must be > 0".into()));
        }
        if let Some(p) = self.penalty {
            if !(p.threshold_m > 0.0 && p.max >= 0.0 && p.max.is_finite()) {
                return Err(Error::InvalidArgument(
                    "penalty threshold must be > 0 and maximum >= 0".into(),
                ));
            }
        }
        let r = &self.spawn_region;
        if !(0..3).all(|i| r.min_m[i] < r.max_m[i]) {
            return Err(Error::InvalidArgument("spawn region min must be below max".into()));
        }
        Ok(())
    }

    /// Decision steps in one episode.
    pub fn steps(&self, f_n: f64) -> usize {
        (self.duration_s * f_n).round() as usize
    }
}

/// Per-step details beyond the reward.
#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    pub outcome: StepOutcome,
    pub penalty: f64,
    /// Robots whose target was reached in this step.
    pub reached: Vec<usize>,
    /// Distance of every active target to its link after the step, before respawning.
    pub distances: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct TaskEnv {
    pub scene: Scene,
    pub config: EpisodeConfig,
    pub gate: GateState,
    pub targets: Vec<TargetPoint>,
    /// Targets reached per robot.
    pub reached: Vec<usize>,
    pub step: usize,
    rng: ChaCha8Rng,
}

fn tracked_points(scene: &Scene, q: &[f64]) -> Result<Vec<Point3<f64>>> {
    Ok(scene
        .forward_kinematics(q)?
        .iter()
        .map(|frames| {
            frames
                .last()
                .map(|f| Point3::from(f.translation.vector))
                .unwrap_or_else(Point3::origin)
        })
        .collect())
}

fn distance(a: &Point3<f64>, b: &[f64; 3]) -> f64 {
    (Point3::from(*b) - a).norm()
}

/// Draws a reachable point for `robot`: uniform joint configurations are pushed through
/// forward kinematics until the last link lands inside the region with enough clearance.
fn spawn_target(scene: &Scene, config: &EpisodeConfig, robot: usize, rng: &mut ChaCha8Rng) -> Result<[f64; 3]> {
    let offsets = scene.joint_offsets();
    let limits = scene.joint_limits();
    let mut q = scene.home();
    let dofs = scene.robots[robot].dof();
    let probe = Shape::Sphere { radius_m: 0.0 };
    let required = scene.safety_distance + config.spawn_clearance_m;
    for _ in 0..MAX_SPAWN_ATTEMPTS {
        for j in offsets[robot]..offsets[robot] + dofs {
            q[j] = rng.gen_range(limits[j].p_min..=limits[j].p_max);
        }
        let p = tracked_points(scene, &q)?[robot];
        if !config.spawn_region.contains(&p) {
            continue;
        }
        let at = Isometry3::translation(p.x, p.y, p.z);
        let mut clear = true;
        for o in &scene.obstacles {
            if pair_distance(&probe, &at, &o.body.shape, o.body.isometry())?.distance < required {
                clear = false;
                break;
            }
        }
        if clear {
            return Ok([p.x, p.y, p.z]);
        }
    }
    Err(Error::InvalidArgument(format!(
        "no target for robot {robot} found in {MAX_SPAWN_ATTEMPTS} attempts; check the spawn region"
    )))
}

/// Starts an episode at the home pose.
pub fn env_reset(
    scene: &Scene,
    config: &EpisodeConfig,
    mode: ProtectionMode,
    gate_config: GateConfig,
    seed: u64,
) -> Result<(TaskEnv, Vec<f64>)> {
    config.validate()?;
    let gate = init_gate(scene, KinematicState::at_rest(scene.home()), mode, gate_config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut targets = Vec::with_capacity(scene.robots.len());
    for r in 0..scene.robots.len() {
        targets.push(TargetPoint {
            position: spawn_target(scene, config, r, &mut rng)?,
            robot: r,
            active: config.target_mode == TargetMode::Simultaneous || r == 0,
        });
    }
    let env = TaskEnv {
        scene: scene.clone(),
        config: config.clone(),
        gate,
        targets,
        reached: vec![0; scene.robots.len()],
        step: 0,
        rng,
    };
    let obs = env_observe(&env)?;
    Ok((env, obs))
}

/// Observation vector; see the module documentation for the layout.
pub fn env_observe(env: &TaskEnv) -> Result<Vec<f64>> {
    let s = &env.gate.state;
    let limits = env.scene.joint_limits();
    let mut obs = Vec::with_capacity(env.observation_len());
    obs.extend(s.p.iter().zip(&limits).map(|(p, l)| l.normalize_position(*p)));
    obs.extend(s.v.iter().zip(&limits).map(|(v, l)| l.normalize_velocity(*v)));
    obs.extend(s.a.iter().zip(&limits).map(|(a, l)| l.normalize_acceleration(*a)));
    let points = tracked_points(&env.scene, &s.p)?;
    for t in &env.targets {
        obs.extend(t.position);
    }
    for t in &env.targets {
        let rel: Vector3<f64> = Point3::from(t.position) - points[t.robot];
        obs.extend(rel.iter());
    }
    if env.config.target_mode == TargetMode::Alternating {
        obs.extend(env.targets.iter().map(|t| if t.active { 1.0 } else { 0.0 }));
    }
    Ok(obs)
}

impl TaskEnv {
    pub fn observation_len(&self) -> usize {
        let n = self.scene.dof();
        let t = self.targets.len();
        let flags = if self.config.target_mode == TargetMode::Alternating {
            t
        } else {
            0
        };
        3 * n + 6 * t + flags
    }

    pub fn total_steps(&self) -> usize {
        self.config.steps(self.gate.config.f_n)
    }

    pub fn is_done(&self) -> bool {
        self.step >= self.total_steps()
    }

    /// Distance of every target to the last link of its robot.
    pub fn target_distances(&self) -> Result<Vec<f64>> {
        let points = tracked_points(&self.scene, &self.gate.state.p)?;
        Ok(self
            .targets
            .iter()
            .map(|t| distance(&points[t.robot], &t.position))
            .collect())
    }
}

/// Advances the episode by one decision step. Returns observation, reward, done flag and details.
pub fn env_step(env: &mut TaskEnv, m: &[f64]) -> Result<(Vec<f64>, f64, bool, StepInfo)> {
    if env.is_done() {
        return Err(Error::InvalidArgument("episode already finished".into()));
    }
    let before = env.target_distances()?;
    let outcome = gate_step(&mut env.gate, &env.scene, m)?;
    let after = env.target_distances()?;
    env.step += 1;

    let mut reward = 0.0;
    for (i, t) in env.targets.iter().enumerate() {
        if t.active {
            reward += before[i] - after[i];
        }
    }
    let penalty = match (env.config.penalty, &outcome.proposal.collision) {
        (Some(p), Some(v)) => p.value(v.min_distance - env.scene.safety_distance),
        _ => 0.0,
    };
    reward -= penalty;

    let reached: Vec<usize> = env
        .targets
        .iter()
        .zip(&after)
        .filter(|(t, d)| t.active && **d < env.config.reach_threshold_m)
        .map(|(t, _)| t.robot)
        .collect();
    for &r in &reached {
        env.reached[r] += 1;
        match env.config.target_mode {
            TargetMode::Simultaneous => {
                env.targets[r].position = spawn_target(&env.scene, &env.config, r, &mut env.rng)?;
            }
            TargetMode::Alternating => {
                let next = (r + 1) % env.targets.len();
                env.targets[r].active = false;
                env.targets[next].position = spawn_target(&env.scene, &env.config, next, &mut env.rng)?;
                env.targets[next].active = true;
            }
        }
    }
    let obs = env_observe(env)?;
    let done = env.is_done();
    Ok((
        obs,
        reward,
        done,
        StepInfo {
            outcome,
            penalty,
            reached,
            distances: after,
        },
    ))
}
