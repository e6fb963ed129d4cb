use serde::{Deserialize, Serialize};

use super::segment::{JointState, KinematicState};
use super::stopping::{is_feasible, stop_step, Step};
use crate::error::{Error, Result};
use crate::robot_model::JointLimits;

/// Bisection tolerance on the range edges, rad/s².
pub const RANGE_TOL: f64 = 1e-8;

/// Per-joint admissible end accelerations for the next interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccelerationRange {
    pub a_next_min: Vec<f64>,
    pub a_next_max: Vec<f64>,
}

impl AccelerationRange {
    pub fn dof(&self) -> usize {
        self.a_next_min.len()
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.a_next_min
            .iter()
            .zip(&self.a_next_max)
            .map(|(lo, hi)| 0.5 * (lo + hi))
            .collect()
    }
}

/// Result of mapping a normalized action into an acceleration range.
#[derive(Debug, Clone, PartialEq)]
pub struct MappedAction {
    pub a_end: Vec<f64>,
    /// Some input component was outside [-1, 1] and got clamped.
    pub clamped: bool,
}

/// Linear map of `m ∈ [-1, 1]` onto `[a_next_min, a_next_max]` per joint.
pub fn map_action(m: &[f64], range: &AccelerationRange) -> Result<MappedAction> {
    if m.len() != range.dof() {
        return Err(Error::Dimension {
            expected: range.dof(),
            actual: m.len(),
        });
    }
    let mut clamped = false;
    let a_end = m
        .iter()
        .zip(range.a_next_min.iter().zip(&range.a_next_max))
        .map(|(&mi, (&lo, &hi))| {
            let c = if mi.is_nan() { 0.0 } else { mi.clamp(-1.0, 1.0) };
            clamped |= c != mi;
            (lo + (1.0 + c) / 2.0 * (hi - lo)).clamp(lo, hi)
        })
        .collect();
    Ok(MappedAction { a_end, clamped })
}

/// End-acceleration interval for one joint, or a state dump when it is empty.
pub(crate) fn joint_range(s: JointState, lim: &JointLimits, dt: f64) -> std::result::Result<(f64, f64), String> {
    let dump = || format!("p={:e} v={:e} a={:e} limits={lim:?} dt={dt}", s.p, s.v, s.a);
    let anchor = match stop_step(s.v, s.a, lim.a_min, lim.a_max, lim.j_min, lim.j_max, dt) {
        Step::Next(x) | Step::Reversal(x) => x,
        Step::Empty => return Err(dump()),
    };
    if !is_feasible(s, anchor, lim, dt) {
        return Err(dump());
    }
    let box_lo = lim.a_min.max(s.a + lim.j_min * dt);
    let box_hi = lim.a_max.min(s.a + lim.j_max * dt);
    let edge = |target: f64| {
        if is_feasible(s, target, lim, dt) {
            return target;
        }
        let (mut good, mut bad) = (anchor, target);
        while (bad - good).abs() > RANGE_TOL {
            let mid = 0.5 * (good + bad);
            if is_feasible(s, mid, lim, dt) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        good
    };
    let lo = edge(box_lo.min(anchor));
    let hi = edge(box_hi.max(anchor));
    Ok((lo, hi))
}

/// Range of end accelerations for which the next interval and a subsequent stop both
/// respect every kinematic limit.
pub fn feasible_acceleration_range(
    state: &KinematicState,
    limits: &[JointLimits],
    dt: f64,
) -> Result<AccelerationRange> {
    state.check_finite()?;
    if limits.len() != state.dof() {
        return Err(Error::Dimension {
            expected: state.dof(),
            actual: limits.len(),
        });
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!("interval must be > 0, got {dt}")));
    }
    let mut out = AccelerationRange {
        a_next_min: Vec::with_capacity(state.dof()),
        a_next_max: Vec::with_capacity(state.dof()),
    };
    for (i, lim) in limits.iter().enumerate() {
        let (lo, hi) = joint_range(state.joint(i), lim, dt).map_err(|dump| Error::EmptyRange { joint: i, dump })?;
        out.a_next_min.push(lo);
        out.a_next_max.push(hi);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lim() -> JointLimits {
        JointLimits {
            p_min: -2.0,
            p_max: 2.0,
            v_min: -1.5,
            v_max: 1.5,
            a_min: -10.0,
            a_max: 10.0,
            j_min: -200.0,
            j_max: 200.0,
            tau_min: -1.0,
            tau_max: 1.0,
        }
    }

    #[test]
    fn stationary_midpoint_is_full_box() {
        let (lo, hi) = joint_range(JointState { p: 0.0, v: 0.0, a: 0.0 }, &lim(), 0.1).unwrap();
        assert_eq!((lo, hi), (-10.0, 10.0));
    }

    #[test]
    fn at_upper_position_bound() {
        // Limit checks carry 1e-10 of slack, which admits end accelerations of order 1e-8.
        let (_, hi) = joint_range(JointState { p: 2.0, v: 0.0, a: 0.0 }, &lim(), 0.1).unwrap();
        assert!(hi <= 1e-7, "{hi}");
    }

    #[test]
    fn at_velocity_bound() {
        let (_, hi) = joint_range(JointState { p: 0.0, v: 1.5, a: 0.0 }, &lim(), 0.1).unwrap();
        assert!(hi <= 0.0);
    }

    #[test]
    fn map_action_endpoints() {
        let r = AccelerationRange {
            a_next_min: vec![-2.0],
            a_next_max: vec![6.0],
        };
        assert_eq!(map_action(&[-1.0], &r).unwrap().a_end, vec![-2.0]);
        assert_eq!(map_action(&[1.0], &r).unwrap().a_end, vec![6.0]);
        assert_eq!(map_action(&[0.0], &r).unwrap().a_end, vec![2.0]);
        let c = map_action(&[3.0], &r).unwrap();
        assert!(c.clamped);
        assert_eq!(c.a_end, vec![6.0]);
    }

    #[test]
    fn unreachable_state_is_reported() {
        let err = feasible_acceleration_range(
            &KinematicState {
                p: vec![1.99],
                v: vec![1.5],
                a: vec![10.0],
            },
            &[lim()],
            0.1,
        )
        .unwrap_err();
        assert!(matches!(err, Error::EmptyRange { joint: 0, .. }));
    }
}
