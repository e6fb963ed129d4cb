//! Independent reference for the stopping policy and the feasible range, simulated on a
//! 1 kHz sub-grid with per-substep extremum refinement.

use safe_motion::robot_model::JointLimits;

pub const SUBSTEPS: usize = 100;
const TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug)]
pub struct St {
    pub p: f64,
    pub v: f64,
    pub a: f64,
}

fn adv(s: St, j: f64, t: f64) -> St {
    St {
        p: s.p + s.v * t + s.a * t * t / 2.0 + j * t * t * t / 6.0,
        v: s.v + s.a * t + j * t * t / 2.0,
        a: s.a + j * t,
    }
}

/// Velocity left after ending at `x` and then moving the acceleration to zero as fast
/// as the jerk bounds allow, simulated step by step.
fn ramp_residual(v: f64, a: f64, x: f64, j_lo: f64, j_hi: f64, dt: f64) -> f64 {
    let mut vv = v + dt * (a + x) / 2.0;
    let mut aa = x;
    while aa != 0.0 {
        let na = if aa < 0.0 {
            (aa + j_hi * dt).min(0.0)
        } else {
            (aa + j_lo * dt).max(0.0)
        };
        vv += dt * (aa + na) / 2.0;
        aa = na;
    }
    vv
}

fn bisect(f: impl Fn(f64) -> f64, mut l: f64, mut r: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (l + r);
        if f(m) < 0.0 {
            l = m;
        } else {
            r = m;
        }
    }
    r
}

fn step_pos(v: f64, a: f64, a_lo: f64, a_hi: f64, j_lo: f64, j_hi: f64, dt: f64) -> Option<f64> {
    let lo = a_lo.max(a + j_lo * dt);
    let hi = a_hi.min(a + j_hi * dt);
    if lo > hi + TOL {
        return None;
    }
    let hi = hi.max(lo);
    let f = |x: f64| ramp_residual(v, a, x, j_lo, j_hi, dt);
    if f(lo) >= 0.0 {
        return Some(lo);
    }
    if f(hi) <= 0.0 {
        return Some(hi);
    }
    Some(bisect(f, lo, hi))
}

/// Next acceleration of the stopping policy (reversal allowed).
pub fn policy_step(s: St, lim: &JointLimits, dt: f64) -> Option<f64> {
    if s.v > 0.0 || (s.v == 0.0 && s.a > 0.0) {
        step_pos(s.v, s.a, lim.a_min, lim.a_max, lim.j_min, lim.j_max, dt)
    } else if s.v < 0.0 || (s.v == 0.0 && s.a < 0.0) {
        step_pos(-s.v, -s.a, -lim.a_max, -lim.a_min, -lim.j_max, -lim.j_min, dt).map(|x| -x)
    } else {
        Some(0.0)
    }
}

/// Checks one interval on the sub-grid, refining velocity and position extrema inside
/// every substep.
pub fn interval_ok(s: St, a_end: f64, lim: &JointLimits, dt: f64) -> bool {
    let j = (a_end - s.a) / dt;
    let h = dt / SUBSTEPS as f64;
    let ok =
        |x: St| x.p >= lim.p_min - TOL && x.p <= lim.p_max + TOL && x.v >= lim.v_min - TOL && x.v <= lim.v_max + TOL;
    let mut cur = s;
    if !ok(cur) {
        return false;
    }
    for _ in 0..SUBSTEPS {
        let next = adv(cur, j, h);
        if !ok(next) {
            return false;
        }
        if cur.a * next.a < 0.0 {
            let t = -cur.a / j;
            if !ok(adv(cur, j, t)) {
                return false;
            }
        }
        if cur.v * next.v < 0.0 {
            let (mut l, mut r) = (0.0, h);
            for _ in 0..80 {
                let m = 0.5 * (l + r);
                if adv(cur, j, m).v * cur.v > 0.0 {
                    l = m;
                } else {
                    r = m;
                }
            }
            if !ok(adv(cur, j, 0.5 * (l + r))) {
                return false;
            }
        }
        cur = next;
    }
    true
}

pub fn end_of(s: St, a_end: f64, dt: f64) -> St {
    adv(s, (a_end - s.a) / dt, dt)
}

pub fn feasible(s: St, a_end: f64, lim: &JointLimits, dt: f64) -> bool {
    if a_end < lim.a_min - TOL
        || a_end > lim.a_max + TOL
        || a_end < s.a + lim.j_min * dt - TOL
        || a_end > s.a + lim.j_max * dt + TOL
    {
        return false;
    }
    if !interval_ok(s, a_end, lim, dt) {
        return false;
    }
    let mut cur = end_of(s, a_end, dt);
    for _ in 0..10_000 {
        if cur.v.abs() <= 1e-12 && cur.a.abs() <= 1e-12 {
            return true;
        }
        let Some(x) = policy_step(cur, lim, dt) else {
            return false;
        };
        if !interval_ok(cur, x, lim, dt) {
            return false;
        }
        cur = end_of(cur, x, dt);
    }
    false
}

/// Grid search over `grid` candidates in the acceleration/jerk box, then bisection of
/// the outermost feasible points against their infeasible neighbours.
pub fn range(s: St, lim: &JointLimits, dt: f64, grid: usize) -> Option<(f64, f64)> {
    let lo = lim.a_min.max(s.a + lim.j_min * dt);
    let hi = lim.a_max.min(s.a + lim.j_max * dt).max(lo);
    let xs: Vec<f64> = (0..grid)
        .map(|i| lo + (hi - lo) * i as f64 / (grid - 1) as f64)
        .collect();
    let good: Vec<usize> = (0..grid).filter(|&i| feasible(s, xs[i], lim, dt)).collect();
    let (&first, &last) = (good.first()?, good.last()?);
    let refine = |mut g: f64, mut b: f64| {
        for _ in 0..60 {
            let m = 0.5 * (g + b);
            if feasible(s, m, lim, dt) {
                g = m;
            } else {
                b = m;
            }
        }
        g
    };
    let r_lo = if first == 0 {
        xs[0]
    } else {
        refine(xs[first], xs[first - 1])
    };
    let r_hi = if last == grid - 1 {
        xs[grid - 1]
    } else {
        refine(xs[last], xs[last + 1])
    };
    Some((r_lo, r_hi))
}
