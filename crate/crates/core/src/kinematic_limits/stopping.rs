//! Greedy jerk-limited stopping policy shared by the range computation and braking.
//!
//! Each step picks, per joint, the acceleration that reduces the speed fastest while
//! still allowing the acceleration to be ramped back to zero (at the maximum jerk)
//! without the velocity crossing zero. When every admissible step crosses zero anyway,
//! the step is chosen so that the velocity returns to zero once the acceleration has
//! been ramped back, which keeps the reversal as short as possible.

use super::segment::{segment_extrema, JointState};
use crate::robot_model::JointLimits;

/// Absolute slack on every limit comparison.
pub(crate) const LIMIT_TOL: f64 = 1e-10;
/// Velocity and acceleration magnitude treated as stopped.
pub(crate) const STOP_TOL: f64 = 1e-12;
/// Velocity undershoot absorbed as rounding noise.
const UNDERSHOOT_TOL: f64 = 1e-12;
/// Upper bound on the length of a stopping run.
pub(crate) const MAX_STOP_STEPS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Step {
    /// Next end acceleration; the velocity stays on its side of zero.
    Next(f64),
    /// No admissible step avoids crossing zero velocity; carries the least bad one.
    Reversal(f64),
    /// The acceleration/jerk box is empty from the current acceleration.
    Empty,
}

pub(crate) fn is_stopped(s: JointState) -> bool {
    s.v.abs() <= STOP_TOL && s.a.abs() <= STOP_TOL
}

/// Next end acceleration of the stopping policy under the given acceleration and jerk
/// bounds.
pub(crate) fn stop_step(v: f64, a: f64, a_min: f64, a_max: f64, j_min: f64, j_max: f64, dt: f64) -> Step {
    let moving_up = v > 0.0 || (v == 0.0 && a > 0.0);
    let moving_down = v < 0.0 || (v == 0.0 && a < 0.0);
    if moving_up {
        stop_step_positive(v, a, a_min, a_max, j_min, j_max, dt)
    } else if moving_down {
        match stop_step_positive(-v, -a, -a_max, -a_min, -j_max, -j_min, dt) {
            Step::Next(x) => Step::Next(-x),
            Step::Reversal(x) => Step::Reversal(-x),
            Step::Empty => Step::Empty,
        }
    } else {
        Step::Next(0.0)
    }
}

/// Velocity change while ramping acceleration `x < 0` back to zero in steps of `delta`.
fn ramp_dv(x: f64, delta: f64, dt: f64) -> f64 {
    if x >= 0.0 {
        return 0.0;
    }
    let n = (-x / delta).floor();
    dt * ((n + 0.5) * x + delta * n * (n + 1.0) / 2.0)
}

fn stop_step_positive(v: f64, a: f64, a_min: f64, a_max: f64, j_min: f64, j_max: f64, dt: f64) -> Step {
    let lo = a_min.max(a + j_min * dt);
    let hi = a_max.min(a + j_max * dt);
    if lo > hi + LIMIT_TOL {
        return Step::Empty;
    }
    let hi = hi.max(lo);
    let (up, down) = (j_max * dt, -j_min * dt);
    // Velocity once the acceleration has been ramped from x back to zero; continuous
    // and nondecreasing in x.
    let residual = |x: f64| v + dt * (a + x) / 2.0 + ramp_dv(x, up, dt) - ramp_dv(-x, down, dt);
    if residual(lo) >= 0.0 {
        return Step::Next(lo);
    }
    let cap = 0.0f64.max(lo).min(hi);
    let r_cap = residual(cap);
    if r_cap >= -UNDERSHOOT_TOL {
        return Step::Next(if r_cap >= 0.0 { root(residual, lo, cap) } else { cap });
    }
    if residual(hi) <= 0.0 {
        return Step::Reversal(hi);
    }
    Step::Reversal(root(residual, cap, hi))
}

/// Zero of a nondecreasing function with `f(lo) < 0 <= f(hi)`.
fn root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // The function is linear on the final bracket.
    let (fl, fh) = (f(lo), f(hi));
    if fh > fl {
        (lo - fl * (hi - lo) / (fh - fl)).clamp(lo, hi)
    } else {
        hi
    }
}

/// Whether one interval from `s` to `a_end` keeps position and velocity inside the
/// bounds of `check`.
pub(crate) fn segment_within_pv(s: JointState, a_end: f64, check: &JointLimits, dt: f64) -> bool {
    let ex = segment_extrema(s, a_end, dt);
    ex.p_min >= check.p_min - LIMIT_TOL
        && ex.p_max <= check.p_max + LIMIT_TOL
        && ex.v_min >= check.v_min - LIMIT_TOL
        && ex.v_max <= check.v_max + LIMIT_TOL
}

/// Runs the stopping policy from `start` with the acceleration/jerk bounds of `step`,
/// checking position and velocity against `check` along the way. `visit` receives
/// every interval's start state and end acceleration. Returns whether a stop was
/// reached without violating any bound (and without reversal unless allowed).
pub(crate) fn stop_run(
    start: JointState,
    step: &JointLimits,
    check: &JointLimits,
    dt: f64,
    allow_reversal: bool,
    mut visit: impl FnMut(JointState, f64),
) -> bool {
    let mut s = start;
    for _ in 0..MAX_STOP_STEPS {
        if is_stopped(s) {
            return true;
        }
        let x = match stop_step(s.v, s.a, step.a_min, step.a_max, step.j_min, step.j_max, dt) {
            Step::Next(x) => x,
            Step::Reversal(x) if allow_reversal => x,
            _ => return false,
        };
        if !segment_within_pv(s, x, check, dt) {
            return false;
        }
        visit(s, x);
        s = s.advance((x - s.a) / dt, dt);
    }
    false
}

/// Whether ending the next interval at `a_end` respects every kinematic limit now and
/// leaves a state from which the stopping policy reaches rest within the limits.
pub(crate) fn is_feasible(s: JointState, a_end: f64, lim: &JointLimits, dt: f64) -> bool {
    if !a_end.is_finite()
        || a_end < lim.a_min - LIMIT_TOL
        || a_end > lim.a_max + LIMIT_TOL
        || a_end < s.a + lim.j_min * dt - LIMIT_TOL
        || a_end > s.a + lim.j_max * dt + LIMIT_TOL
    {
        return false;
    }
    if !segment_within_pv(s, a_end, lim, dt) {
        return false;
    }
    let end = s.advance((a_end - s.a) / dt, dt);
    stop_run(end, lim, lim, dt, true, |_, _| {})
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stationary_stays() {
        assert_eq!(stop_step(0.0, 0.0, -1.0, 1.0, -10.0, 10.0, 0.1), Step::Next(0.0));
    }

    #[test]
    fn mirror_symmetry() {
        let up = stop_step(0.7, 0.3, -3.0, 2.0, -30.0, 20.0, 0.1);
        let down = stop_step(-0.7, -0.3, -2.0, 3.0, -20.0, 30.0, 0.1);
        match (up, down) {
            (Step::Next(x), Step::Next(y)) => assert_eq!(x, -y),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn final_ramp_lands_on_zero() {
        let lim = JointLimits {
            p_min: -100.0,
            p_max: 100.0,
            v_min: -2.0,
            v_max: 2.0,
            a_min: -3.0,
            a_max: 3.0,
            j_min: -30.0,
            j_max: 30.0,
            tau_min: -1.0,
            tau_max: 1.0,
        };
        let mut steps = 0;
        let mut last = JointState { p: 0.0, v: 1.0, a: 0.0 };
        let ok = stop_run(last, &lim, &lim, 0.1, false, |s, x| {
            steps += 1;
            last = s.advance((x - s.a) / 0.1, 0.1);
        });
        assert!(ok);
        // 1 rad/s at 3 rad/s² and 30 rad/s³: five intervals.
        assert_eq!(steps, 5);
        assert!(last.v.abs() < 1e-12 && last.a.abs() < 1e-12);
    }

    #[test]
    fn undershoot_reports_reversal() {
        // Tiny velocity with strongly negative acceleration: the jerk cannot bring the
        // acceleration back before the velocity crosses zero.
        // Returning the velocity to zero then needs a positive end acceleration:
        // 0.01 + 0.05 (-2 + x) + 0.05 x = 0 gives x = 0.9.
        match stop_step(0.01, -2.0, -3.0, 3.0, -30.0, 30.0, 0.1) {
            Step::Reversal(x) => assert!((x - 0.9).abs() < 1e-12, "{x}"),
            other => panic!("{other:?}"),
        }
    }
}
