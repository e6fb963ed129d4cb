//! Minimal continuous-time stopping time, found by enumerating jerk switching times on a
//! 1 ms grid.

pub const GRID: f64 = 1e-3;

/// Profiles: jerk `-j_down` for `t1`, constant acceleration for `t2`, then jerk `+j_up`
/// until the acceleration is zero. Returns the shortest profile whose final velocity is
/// not positive, for a start with `v0 > 0`.
pub fn min_stop_time(v0: f64, a0: f64, a_floor: f64, j_down: f64, j_up: f64) -> f64 {
    // Switching times on the grid, plus the exact time the acceleration floor is reached.
    let t_floor = ((a0 - a_floor) / j_down).max(0.0);
    let mut t1s: Vec<f64> = (0..).map(|k| k as f64 * GRID).take_while(|t| *t < t_floor).collect();
    t1s.push(t_floor);
    let mut best = f64::INFINITY;
    for t1 in t1s {
        let a1 = a0 - j_down * t1;
        if a1 > 0.0 {
            continue;
        }
        let v1 = v0 + a0 * t1 - j_down * t1 * t1 / 2.0;
        let t3 = -a1 / j_up;
        let ramp = a1 * t3 / 2.0;
        let mut k2 = 0usize;
        loop {
            let t2 = k2 as f64 * GRID;
            let total = t1 + t2 + t3;
            if total >= best {
                break;
            }
            if v1 + a1 * t2 + ramp <= 0.0 {
                best = total;
                break;
            }
            if a1 == 0.0 || k2 > 1_000_000 {
                break;
            }
            k2 += 1;
        }
    }
    best
}

/// Fewest intervals of length `dt` that stop a joint with `v0 > 0` when every interval
/// ends on an acceleration from a grid of at least `cells` values over `[a_lo, a_hi]`
/// (zero included), velocity stays nonnegative at interval boundaries and the interval
/// jerk stays within `[j_lo, j_hi]`. The grid spacing divides the smaller jerk bound
/// times `dt`, so a full-jerk interval lands on a grid point. For each grid acceleration
/// the reachable velocities form an interval, which is propagated forward.
#[allow(clippy::too_many_arguments)]
pub fn min_stop_intervals(
    v0: f64,
    a0: f64,
    a_lo: f64,
    a_hi: f64,
    j_lo: f64,
    j_hi: f64,
    dt: f64,
    cells: usize,
) -> usize {
    let step = j_hi.min(-j_lo) * dt;
    let h = step / (step * cells as f64 / (a_hi - a_lo)).ceil();
    let first = (a_lo / h).ceil() as i64;
    let last = (a_hi / h).floor() as i64;
    let xs: Vec<f64> = (first..=last).map(|i| i as f64 * h).collect();
    let zero = (-first) as usize;
    let n = xs.len();
    let empty = (f64::INFINITY, f64::NEG_INFINITY);
    let mut reach = vec![empty; n];
    let eps = 1e-12;
    for (i, &x) in xs.iter().enumerate() {
        let jerk = (x - a0) / dt;
        if jerk >= j_lo - eps && jerk <= j_hi + eps {
            let v = v0 + dt * (a0 + x) / 2.0;
            if v >= -eps {
                reach[i] = (v, v);
            }
        }
    }
    for k in 1..10_000 {
        if reach[zero].0 <= eps && reach[zero].1 >= -eps {
            return k;
        }
        let mut next = vec![empty; n];
        for (i, &(lo, hi)) in reach.iter().enumerate() {
            if lo > hi {
                continue;
            }
            let x = xs[i];
            let j_first = (((x + j_lo * dt) / h - 1e-9).ceil() as i64 - first).max(0) as usize;
            let j_last = ((((x + j_hi * dt) / h + 1e-9).floor() as i64 - first).max(0) as usize).min(n - 1);
            for (t, &y) in xs.iter().enumerate().take(j_last + 1).skip(j_first) {
                let dv = dt * (x + y) / 2.0;
                let (nlo, nhi) = ((lo + dv).max(0.0), hi + dv);
                if nhi < -eps {
                    continue;
                }
                let e = &mut next[t];
                e.0 = e.0.min(nlo);
                e.1 = e.1.max(nhi);
            }
        }
        reach = next;
    }
    usize::MAX
}

use super::joint_limits;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use safe_motion::braking::{BrakeLimits, BrakingTrajectory};
use safe_motion::kinematic_limits::KinematicState;
use safe_motion::robot_model::JointLimits;

/// Decision interval of the randomized braking instances.
pub const DT: f64 = 0.1;

/// A moving 1-DOF start with generous position and velocity room that can stop without
/// reversing.
pub fn random_instance(rng: &mut ChaCha8Rng) -> (JointLimits, BrakeLimits, KinematicState) {
    let a = rng.gen_range(2.0..20.0);
    let j = if rng.gen_bool(0.5) {
        2.0 * a / DT
    } else {
        rng.gen_range(5.0..400.0)
    };
    let lim = joint_limits(1000.0, 10.0, a, j);
    let brake = BrakeLimits::default_for(&[lim]);
    let b = brake.joints[0];
    loop {
        let v0: f64 = rng.gen_range(0.05..3.0);
        let a0 = rng.gen_range(b.a_min..b.a_max);
        if a0 < 0.0 && v0 < a0 * a0 / (2.0 * j) + a0.abs() * DT {
            continue;
        }
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let start = KinematicState {
            p: vec![0.0],
            v: vec![sign * v0],
            a: vec![sign * a0],
        };
        return (lim, brake, start);
    }
}

pub fn terminal_ok(t: &BrakingTrajectory) -> bool {
    let end = t.segments.last().unwrap().end_state();
    end.v[0].abs() < 1e-6 && end.a[0].abs() < 1e-6
}

/// Mirrored bounds so that the start velocity is positive.
pub fn positive_frame(brake: &BrakeLimits, start: &KinematicState) -> (f64, f64, f64, f64, f64, f64, f64) {
    let s = start.v[0].signum();
    let b = brake.joints[0];
    if s > 0.0 {
        (start.v[0], start.a[0], b.a_min, b.a_max, b.j_min, b.j_max, s)
    } else {
        (-start.v[0], -start.a[0], -b.a_max, -b.a_min, -b.j_max, -b.j_min, s)
    }
}
