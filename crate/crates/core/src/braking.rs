//! Braking trajectories that bring every joint to rest under reduced limits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematic_limits::stopping::{
    is_stopped, segment_within_pv, stop_run, stop_step, Step, LIMIT_TOL, MAX_STOP_STEPS,
};
use crate::kinematic_limits::{JointState, KinematicState, TrajectorySegment};
use crate::robot_model::JointLimits;

/// Residual velocity and acceleration reported as exactly zero at the end of a stop.
pub const SNAP_TOL: f64 = 1e-6;

/// Acceleration and jerk bounds of one joint while braking.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrakeJointLimits {
    pub a_min: f64,
    pub a_max: f64,
    pub j_min: f64,
    pub j_max: f64,
}

/// Per-joint braking bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrakeLimits {
    pub joints: Vec<BrakeJointLimits>,
}

impl BrakeLimits {
    /// Default acceleration share of the full limits while braking.
    pub const DEFAULT_ACC_FRACTION: f64 = 0.75;

    /// Scales the full acceleration and jerk limits by the given fractions.
    pub fn from_fractions(limits: &[JointLimits], acc_fraction: f64, jerk_fraction: f64) -> Result<Self> {
        for (name, f) in [("acceleration", acc_fraction), ("jerk", jerk_fraction)] {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "brake {name} fraction must be in (0, 1], got {f}"
                )));
            }
        }
        Ok(BrakeLimits {
            joints: limits
                .iter()
                .map(|l| BrakeJointLimits {
                    a_min: l.a_min * acc_fraction,
                    a_max: l.a_max * acc_fraction,
                    j_min: l.j_min * jerk_fraction,
                    j_max: l.j_max * jerk_fraction,
                })
                .collect(),
        })
    }

    /// 75 % of the acceleration limits with the full jerk limits.
    pub fn default_for(limits: &[JointLimits]) -> Self {
        Self::from_fractions(limits, Self::DEFAULT_ACC_FRACTION, 1.0).expect("default fractions are valid")
    }

    /// Checks that every brake interval lies inside the full one and straddles zero.
    pub fn validate(&self, limits: &[JointLimits]) -> Result<()> {
        if self.joints.len() != limits.len() {
            return Err(Error::Dimension {
                expected: limits.len(),
                actual: self.joints.len(),
            });
        }
        for (i, (b, l)) in self.joints.iter().zip(limits).enumerate() {
            let ok = l.a_min <= b.a_min
                && b.a_min < 0.0
                && 0.0 < b.a_max
                && b.a_max <= l.a_max
                && l.j_min <= b.j_min
                && b.j_min < 0.0
                && 0.0 < b.j_max
                && b.j_max <= l.j_max;
            if !ok {
                return Err(Error::InvalidArgument(format!(
                    "brake limits of joint {i} not contained in joint limits: {b:?}"
                )));
            }
        }
        Ok(())
    }

    fn applied_to(&self, joint: usize, full: &JointLimits) -> JointLimits {
        let b = &self.joints[joint];
        JointLimits {
            a_min: b.a_min,
            a_max: b.a_max,
            j_min: b.j_min,
            j_max: b.j_max,
            ..*full
        }
    }
}

/// Stop of all joints; joints that come to rest early hold zero acceleration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrakingTrajectory {
    pub segments: Vec<TrajectorySegment>,
    /// `fallback[k][i]`: segment `k` of joint `i` needed the full limits.
    pub fallback: Vec<Vec<bool>>,
    pub duration: f64,
}

impl BrakingTrajectory {
    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn fallback_count(&self) -> usize {
        self.fallback.iter().flatten().filter(|f| **f).count()
    }

    /// Final state with sub-tolerance velocity and acceleration snapped to zero.
    pub fn terminal_state(&self) -> Option<KinematicState> {
        let mut s = self.segments.last()?.end_state();
        for x in s.v.iter_mut().chain(s.a.iter_mut()) {
            if x.abs() < SNAP_TOL {
                *x = 0.0;
            }
        }
        Some(s)
    }
}

/// End accelerations that stop one joint: the reduced-limit stop whenever it exists
/// from the current state, otherwise one full-limit step before trying again.
fn joint_stop(
    start: JointState,
    full: &JointLimits,
    brake: &JointLimits,
    dt: f64,
) -> std::result::Result<Vec<f64>, String> {
    let dump = |s: JointState| format!("p={:e} v={:e} a={:e} limits={full:?} dt={dt}", s.p, s.v, s.a);
    let mut s = start;
    let mut out = Vec::new();
    while !is_stopped(s) {
        if out.len() >= MAX_STOP_STEPS {
            return Err(dump(start));
        }
        let mut run = Vec::new();
        if stop_run(s, brake, full, dt, false, |_, x| run.push(x)) {
            out.extend(run);
            break;
        }
        let x = match stop_step(s.v, s.a, full.a_min, full.a_max, full.j_min, full.j_max, dt) {
            Step::Next(x) | Step::Reversal(x) => x,
            Step::Empty => return Err(dump(s)),
        };
        if !segment_within_pv(s, x, full, dt) {
            return Err(dump(s));
        }
        out.push(x);
        s = s.advance((x - s.a) / dt, dt);
    }
    Ok(out)
}

fn within_brake(seg: &TrajectorySegment, joint: usize, b: &BrakeJointLimits) -> bool {
    let (a0, a1) = (seg.start.a[joint], seg.a_end[joint]);
    let j = seg.jerk(joint);
    let jt = LIMIT_TOL / seg.duration;
    [a0, a1]
        .iter()
        .all(|a| *a >= b.a_min - LIMIT_TOL && *a <= b.a_max + LIMIT_TOL)
        && j >= b.j_min - jt
        && j <= b.j_max + jt
}

/// Brakes every joint to rest with the greedy jerk-limited policy.
pub fn braking_trajectory(
    start: &KinematicState,
    limits: &[JointLimits],
    brake: &BrakeLimits,
    dt: f64,
) -> Result<BrakingTrajectory> {
    start.check_finite()?;
    if limits.len() != start.dof() {
        return Err(Error::Dimension {
            expected: start.dof(),
            actual: limits.len(),
        });
    }
    brake.validate(limits)?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!("interval must be > 0, got {dt}")));
    }
    let mut plans = Vec::with_capacity(start.dof());
    for (i, lim) in limits.iter().enumerate() {
        let plan = joint_stop(start.joint(i), lim, &brake.applied_to(i, lim), dt)
            .map_err(|dump| Error::Unreachable { joint: i, dump })?;
        plans.push(plan);
    }
    let steps = plans.iter().map(Vec::len).max().unwrap_or(0);
    let mut segments = Vec::with_capacity(steps);
    let mut fallback = Vec::with_capacity(steps);
    let mut state = start.clone();
    for k in 0..steps {
        let a_end = plans.iter().map(|p| p.get(k).copied().unwrap_or(0.0)).collect();
        let seg = TrajectorySegment {
            duration: dt,
            start: state,
            a_end,
        };
        fallback.push(
            (0..seg.dof())
                .map(|i| !within_brake(&seg, i, &brake.joints[i]))
                .collect(),
        );
        state = seg.end_state();
        segments.push(seg);
    }
    Ok(BrakingTrajectory {
        duration: steps as f64 * dt,
        segments,
        fallback,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lim(a: f64, j: f64) -> JointLimits {
        JointLimits {
            p_min: -100.0,
            p_max: 100.0,
            v_min: -2.0,
            v_max: 2.0,
            a_min: -a,
            a_max: a,
            j_min: -j,
            j_max: j,
            tau_min: -1.0,
            tau_max: 1.0,
        }
    }

    #[test]
    fn stationary_start_gives_empty_trajectory() {
        let l = [lim(4.0, 40.0); 3];
        let t = braking_trajectory(
            &KinematicState::at_rest(vec![0.1, 0.2, 0.3]),
            &l,
            &BrakeLimits::default_for(&l),
            0.1,
        )
        .unwrap();
        assert!(t.is_empty());
        assert_eq!(t.duration, 0.0);
    }

    #[test]
    fn unit_velocity_stop_takes_five_intervals() {
        let l = [lim(4.0, 30.0)];
        let b = BrakeLimits::from_fractions(&l, 0.75, 1.0).unwrap();
        let start = KinematicState {
            p: vec![0.0],
            v: vec![1.0],
            a: vec![0.0],
        };
        let t = braking_trajectory(&start, &l, &b, 0.1).unwrap();
        assert_eq!(t.segments.len(), 5);
        assert_eq!(t.fallback_count(), 0);
        let end = t.terminal_state().unwrap();
        assert_eq!((end.v[0], end.a[0]), (0.0, 0.0));
    }

    #[test]
    fn early_joints_hold_zero_acceleration() {
        let l = [lim(4.0, 40.0); 2];
        let start = KinematicState {
            p: vec![0.0, 0.0],
            v: vec![1.5, 0.1],
            a: vec![0.0, 0.0],
        };
        let t = braking_trajectory(&start, &l, &BrakeLimits::default_for(&l), 0.1).unwrap();
        let last = t.segments.last().unwrap();
        assert_eq!(last.a_end[1], 0.0);
        assert!(last.start.v[1].abs() < 1e-12);
    }

    #[test]
    fn brake_limits_outside_full_limits_are_rejected() {
        let l = [lim(4.0, 40.0)];
        let b = BrakeLimits {
            joints: vec![BrakeJointLimits {
                a_min: -5.0,
                a_max: 3.0,
                j_min: -40.0,
                j_max: 40.0,
            }],
        };
        assert!(b.validate(&l).is_err());
    }

    #[test]
    fn velocity_beyond_limit_is_unreachable() {
        let l = [lim(4.0, 40.0)];
        let start = KinematicState {
            p: vec![99.99],
            v: vec![2.0],
            a: vec![4.0],
        };
        let err = braking_trajectory(&start, &l, &BrakeLimits::default_for(&l), 0.1).unwrap_err();
        assert!(matches!(err, Error::Unreachable { joint: 0, .. }));
    }
}
