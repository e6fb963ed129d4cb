//! Commit-or-fallback decision loop around the learned policy.
//!
//! Every decision step the agent's action becomes a candidate interval followed by a
//! braking continuation. The interval is executed only if the whole candidate passes
//! the checks of the active protection mode; otherwise the first interval of the
//! continuation verified in the previous step is executed instead.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::braking::{braking_trajectory, BrakeLimits, BrakingTrajectory};
use crate::collision::{check_trajectory_collisions, scene_pair_distances, CheckMode, CollisionVerdict};
use crate::dynamics::{check_torques_with_history, static_torques, ControllerModel, FilterHistory, TorqueVerdict};
use crate::error::{Error, Result};
use crate::kinematic_limits::{
    feasible_acceleration_range, map_action, sample_times, AccelerationRange, KinematicState, TrajectorySegment,
    CONTIGUITY_TOL,
};
use crate::robot_model::Scene;

/// Which checks the gate runs on a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ProtectionMode {
    /// No collision or torque checks.
    None,
    /// Collision checks.
    Collision,
    /// Collision and torque checks.
    CollisionAndTorque,
}

impl ProtectionMode {
    pub fn checks_collisions(self) -> bool {
        self != ProtectionMode::None
    }

    pub fn checks_torques(self) -> bool {
        self == ProtectionMode::CollisionAndTorque
    }

    /// Short label used in reports: `--`, `C` or `CT`.
    pub fn label(self) -> &'static str {
        match self {
            ProtectionMode::None => "--",
            ProtectionMode::Collision => "C",
            ProtectionMode::CollisionAndTorque => "CT",
        }
    }
}

impl std::str::FromStr for ProtectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "NONE" | "--" => Ok(ProtectionMode::None),
            "C" | "COLLISION" => Ok(ProtectionMode::Collision),
            "CT" | "COLLISION_AND_TORQUE" => Ok(ProtectionMode::CollisionAndTorque),
            _ => Err(Error::InvalidArgument(format!(
                "unknown protection mode `{s}` (expected NONE, C or CT)"
            ))),
        }
    }
}

/// Rates and models used by the gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateConfig {
    /// Decision frequency f_N in Hz.
    pub f_n: f64,
    /// Collision check frequency f_C in Hz.
    pub f_c: f64,
    /// Torque check frequency f_S in Hz.
    pub f_s: f64,
    /// Braking acceleration as a fraction of the joint acceleration limits.
    pub brake_acc_fraction: f64,
    /// Braking jerk as a fraction of the joint jerk limits.
    pub brake_jerk_fraction: f64,
    /// Controller time constant in seconds.
    pub controller_time_constant: f64,
}

impl Default for GateConfig {
    fn default() -> Self {
        GateConfig {
            f_n: 10.0,
            f_c: 20.0,
            f_s: 240.0,
            brake_acc_fraction: BrakeLimits::DEFAULT_ACC_FRACTION,
            brake_jerk_fraction: 1.0,
            controller_time_constant: ControllerModel::DEFAULT_TIME_CONSTANT,
        }
    }
}

impl GateConfig {
    pub fn dt(&self) -> f64 {
        1.0 / self.f_n
    }

    pub fn validate(&self) -> Result<()> {
        for (name, f) in [("f_n", self.f_n), ("f_c", self.f_c), ("f_s", self.f_s)] {
            if !(f.is_finite() && f > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be > 0, got {f}")));
            }
        }
        if !(self.controller_time_constant.is_finite() && self.controller_time_constant > 0.0) {
            return Err(Error::InvalidArgument("controller time constant must be > 0".into()));
        }
        Ok(())
    }
}

/// Gate state at a decision boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateState {
    pub state: KinematicState,
    /// Verified continuation starting at `state`; empty when the robot is at rest.
    pub backup: BrakingTrajectory,
    pub mode: ProtectionMode,
    pub config: GateConfig,
    /// Currently executing the backup.
    pub braking: bool,
    /// Controller filter history at the boundary.
    pub filter: FilterHistory,
    /// Decision steps committed so far.
    pub step: usize,
}

/// Wall-clock time spent in each part of a proposal, in seconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub range: f64,
    pub braking: f64,
    pub collision: f64,
    pub torque: f64,
    pub total: f64,
}

/// A checked candidate, computed without changing the gate.
#[derive(Debug, Clone, PartialEq)]
pub struct Proposal {
    pub range: AccelerationRange,
    pub segment: TrajectorySegment,
    pub continuation: BrakingTrajectory,
    pub action_clamped: bool,
    pub collision: Option<CollisionVerdict>,
    pub torque: Option<TorqueVerdict>,
    pub safe: bool,
    pub timings: Timings,
}

/// Result of one committed decision step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub executed: TrajectorySegment,
    /// The backup replaced the agent's interval.
    pub adapted: bool,
    pub proposal: Proposal,
}

fn precondition(kind: &'static str, detail: impl Into<String>) -> Error {
    Error::Precondition {
        kind,
        detail: detail.into(),
    }
}

/// Validates the start and returns a gate with an empty backup.
pub fn init_gate(scene: &Scene, start: KinematicState, mode: ProtectionMode, config: GateConfig) -> Result<GateState> {
    config.validate()?;
    start.check_finite()?;
    if start.dof() != scene.dof() {
        return Err(Error::Dimension {
            expected: scene.dof(),
            actual: start.dof(),
        });
    }
    if !start.v.iter().chain(&start.a).all(|x| *x == 0.0) {
        return Err(precondition(
            "not stationary",
            "start velocity and acceleration must be zero",
        ));
    }
    for (i, (p, l)) in start.p.iter().zip(scene.joint_limits()).enumerate() {
        if *p < l.p_min || *p > l.p_max {
            return Err(precondition(
                "kinematic limits",
                format!("joint {i} position {p} outside [{}, {}]", l.p_min, l.p_max),
            ));
        }
    }
    for (i, d) in scene_pair_distances(scene, &start.p)?.iter().enumerate() {
        if d.distance < scene.safety_distance {
            return Err(precondition(
                "collision precondition",
                format!(
                    "pair {i} at distance {} below safety distance {}",
                    d.distance, scene.safety_distance
                ),
            ));
        }
    }
    if mode.checks_torques() {
        let tau = static_torques(scene, &start.p)?;
        for (i, (t, l)) in tau.iter().zip(scene.joint_limits()).enumerate() {
            if *t > l.tau_max || *t < l.tau_min {
                return Err(precondition(
                    "torque precondition",
                    format!("joint {i} gravity torque {t} outside [{}, {}]", l.tau_min, l.tau_max),
                ));
            }
        }
    }
    Ok(GateState {
        filter: FilterHistory::at_rest(&start.p),
        state: start,
        backup: BrakingTrajectory {
            segments: vec![],
            fallback: vec![],
            duration: 0.0,
        },
        mode,
        config,
        braking: false,
        step: 0,
    })
}

/// Filtered positions at the end of `segment`, continuing from `history`.
fn advance_filter(
    history: &FilterHistory,
    segment: &TrajectorySegment,
    controller: &ControllerModel,
    f_s: f64,
) -> Result<FilterHistory> {
    let segs = std::slice::from_ref(segment);
    let times = sample_times(segs, f_s)?;
    let mut u = Vec::with_capacity(times.len());
    for s in times {
        let mut q = Vec::new();
        segment.eval_positions(s.sigma, &mut q);
        u.push(q);
    }
    Ok(crate::dynamics::filter_positions(controller, f_s, history, &u))
}

impl GateState {
    fn controller(&self) -> ControllerModel {
        ControllerModel::default_for(self.state.dof()).with_time_constant(self.config.controller_time_constant)
    }

    /// Builds and checks the candidate for action `m` without changing the gate.
    pub fn propose(&self, scene: &Scene, m: &[f64]) -> Result<Proposal> {
        let t0 = Instant::now();
        let dt = self.config.dt();
        let limits = scene.joint_limits();
        let mut timings = Timings::default();

        let range = feasible_acceleration_range(&self.state, &limits, dt)?;
        let mapped = map_action(m, &range)?;
        let segment = TrajectorySegment::new(dt, self.state.clone(), mapped.a_end)?;
        timings.range = t0.elapsed().as_secs_f64();

        let t1 = Instant::now();
        let brake =
            BrakeLimits::from_fractions(&limits, self.config.brake_acc_fraction, self.config.brake_jerk_fraction)?;
        let continuation = braking_trajectory(&segment.end_state(), &limits, &brake, dt)?;
        timings.braking = t1.elapsed().as_secs_f64();

        let mut candidate = Vec::with_capacity(1 + continuation.segments.len());
        candidate.push(segment.clone());
        candidate.extend(continuation.segments.iter().cloned());

        let mut safe = true;
        let mut collision = None;
        if self.mode.checks_collisions() {
            let t = Instant::now();
            let v = check_trajectory_collisions(
                scene,
                &candidate,
                self.config.f_c,
                scene.safety_distance,
                CheckMode::EarlyExit,
            )?;
            safe &= v.safe;
            collision = Some(v);
            timings.collision = t.elapsed().as_secs_f64();
        }
        let mut torque = None;
        if self.mode.checks_torques() && safe {
            let t = Instant::now();
            let v = check_torques_with_history(scene, &candidate, &self.controller(), self.config.f_s, &self.filter)?;
            safe &= v.safe;
            torque = Some(v);
            timings.torque = t.elapsed().as_secs_f64();
        }
        timings.total = t0.elapsed().as_secs_f64();
        Ok(Proposal {
            range,
            segment,
            continuation,
            action_clamped: mapped.clamped,
            collision,
            torque,
            safe,
            timings,
        })
    }

    /// Executes the proposal if it is safe, otherwise the first interval of the backup
    /// (or a zero-motion hold once the backup is used up).
    pub fn commit(&mut self, proposal: Proposal) -> Result<StepOutcome> {
        let dt = self.config.dt();
        if proposal.segment.start != self.state {
            return Err(Error::Invariant("proposal was computed for a different state".into()));
        }
        let (executed, adapted) = if proposal.safe {
            self.backup = proposal.continuation.clone();
            self.braking = false;
            (proposal.segment.clone(), false)
        } else {
            self.braking = true;
            if self.backup.segments.is_empty() {
                if !self.state.is_stationary(1e-9) {
                    return Err(Error::Invariant(format!(
                        "backup exhausted while moving: {:?}",
                        self.state
                    )));
                }
                (
                    TrajectorySegment::new(dt, self.state.clone(), vec![0.0; self.state.dof()])?,
                    true,
                )
            } else {
                let first = self.backup.segments.remove(0);
                self.backup.fallback.remove(0);
                self.backup.duration = self.backup.segments.len() as f64 * dt;
                (first, true)
            }
        };
        let gap = executed.start.max_gap(&self.state);
        if gap > CONTIGUITY_TOL {
            return Err(Error::Invariant(format!(
                "backup does not start at the current state (gap {gap:e})"
            )));
        }
        self.filter = advance_filter(&self.filter, &executed, &self.controller(), self.config.f_s)?;
        self.state = executed.end_state();
        if let Some(first) = self.backup.segments.first() {
            let gap = first.start.max_gap(&self.state);
            if gap > CONTIGUITY_TOL {
                return Err(Error::Invariant(format!(
                    "backup does not start at the new state (gap {gap:e})"
                )));
            }
        }
        self.step += 1;
        Ok(StepOutcome {
            executed,
            adapted,
            proposal,
        })
    }
}

/// One full decision step: propose, then commit.
pub fn gate_step(gate: &mut GateState, scene: &Scene, m: &[f64]) -> Result<StepOutcome> {
    let p = gate.propose(scene, m)?;
    gate.commit(p)
}
