use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-joint position (rad), velocity (rad/s) and acceleration (rad/s²) setpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KinematicState {
    pub p: Vec<f64>,
    pub v: Vec<f64>,
    pub a: Vec<f64>,
}

impl KinematicState {
    /// Stationary state at `p`.
    pub fn at_rest(p: Vec<f64>) -> Self {
        let n = p.len();
        KinematicState {
            p,
            v: vec![0.0; n],
            a: vec![0.0; n],
        }
    }

    pub fn dof(&self) -> usize {
        self.p.len()
    }

    pub fn joint(&self, i: usize) -> JointState {
        JointState {
            p: self.p[i],
            v: self.v[i],
            a: self.a[i],
        }
    }

    pub fn is_stationary(&self, tol: f64) -> bool {
        self.v.iter().chain(&self.a).all(|x| x.abs() <= tol)
    }

    /// Largest absolute componentwise difference.
    pub fn max_gap(&self, other: &KinematicState) -> f64 {
        self.p
            .iter()
            .zip(&other.p)
            .chain(self.v.iter().zip(&other.v))
            .chain(self.a.iter().zip(&other.a))
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        if self.v.len() != self.p.len() || self.a.len() != self.p.len() {
            return Err(Error::Dimension {
                expected: self.p.len(),
                actual: self.v.len().max(self.a.len()),
            });
        }
        if self.p.iter().chain(&self.v).chain(&self.a).all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidArgument("kinematic state has non-finite values".into()))
        }
    }
}

/// Single-joint kinematic state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointState {
    pub p: f64,
    pub v: f64,
    pub a: f64,
}

impl JointState {
    /// State after `sigma` seconds of constant jerk `jerk`.
    #[inline]
    pub fn advance(&self, jerk: f64, sigma: f64) -> JointState {
        let s2 = sigma * sigma;
        JointState {
            p: self.p + self.v * sigma + self.a * s2 / 2.0 + jerk * s2 * sigma / 6.0,
            v: self.v + self.a * sigma + jerk * s2 / 2.0,
            a: self.a + jerk * sigma,
        }
    }
}

/// Extreme position and velocity over one linear-acceleration interval.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Extrema {
    pub p_min: f64,
    pub p_max: f64,
    pub v_min: f64,
    pub v_max: f64,
}

/// Closed-form extrema: velocity peaks where the acceleration crosses zero, position
/// peaks at the roots of the velocity quadratic.
pub(crate) fn segment_extrema(start: JointState, a_end: f64, dt: f64) -> Extrema {
    let jerk = (a_end - start.a) / dt;
    let end = start.advance(jerk, dt);
    let mut ex = Extrema {
        p_min: start.p.min(end.p),
        p_max: start.p.max(end.p),
        v_min: start.v.min(end.v),
        v_max: start.v.max(end.v),
    };
    let mut visit = |sigma: f64| {
        if sigma > 0.0 && sigma < dt {
            let s = start.advance(jerk, sigma);
            ex.p_min = ex.p_min.min(s.p);
            ex.p_max = ex.p_max.max(s.p);
            ex.v_min = ex.v_min.min(s.v);
            ex.v_max = ex.v_max.max(s.v);
        }
    };
    if jerk != 0.0 {
        visit(-start.a / jerk);
    }
    // v(σ) = v0 + a0 σ + (jerk/2) σ²
    let (qa, qb, qc) = (0.5 * jerk, start.a, start.v);
    if qa == 0.0 {
        if qb != 0.0 {
            visit(-qc / qb);
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            let t = -0.5 * (qb + sq.copysign(qb));
            if t != 0.0 {
                visit(t / qa);
                visit(qc / t);
            } else {
                visit(0.0);
            }
        }
    }
    ex
}

/// One decision interval with linearly interpolated acceleration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySegment {
    /// Interval length Δt = 1/f_N in seconds.
    pub duration: f64,
    pub start: KinematicState,
    pub a_end: Vec<f64>,
}

impl TrajectorySegment {
    pub fn new(duration: f64, start: KinematicState, a_end: Vec<f64>) -> Result<Self> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "segment duration must be > 0, got {duration}"
            )));
        }
        start.check_finite()?;
        if a_end.len() != start.dof() {
            return Err(Error::Dimension {
                expected: start.dof(),
                actual: a_end.len(),
            });
        }
        Ok(TrajectorySegment { duration, start, a_end })
    }

    /// Zero-motion segment holding `state` (velocity and acceleration forced to zero).
    pub fn hold(duration: f64, p: Vec<f64>) -> Self {
        let n = p.len();
        TrajectorySegment {
            duration,
            start: KinematicState::at_rest(p),
            a_end: vec![0.0; n],
        }
    }

    pub fn dof(&self) -> usize {
        self.a_end.len()
    }

    pub fn jerk(&self, joint: usize) -> f64 {
        (self.a_end[joint] - self.start.a[joint]) / self.duration
    }

    /// Setpoints at `sigma` seconds into the segment.
    pub fn integrate(&self, sigma: f64) -> Result<KinematicState> {
        if !(0.0..=self.duration).contains(&sigma) {
            return Err(Error::OutOfRange {
                sigma,
                duration: self.duration,
            });
        }
        Ok(self.eval(sigma))
    }

    pub(crate) fn eval(&self, sigma: f64) -> KinematicState {
        let n = self.dof();
        let mut out = KinematicState {
            p: Vec::with_capacity(n),
            v: Vec::with_capacity(n),
            a: Vec::with_capacity(n),
        };
        for i in 0..n {
            let s = self.start.joint(i).advance(self.jerk(i), sigma);
            out.p.push(s.p);
            out.v.push(s.v);
            out.a.push(s.a);
        }
        out
    }

    pub(crate) fn eval_positions(&self, sigma: f64, out: &mut Vec<f64>) {
        out.clear();
        out.extend((0..self.dof()).map(|i| self.start.joint(i).advance(self.jerk(i), sigma).p));
    }

    pub fn end_state(&self) -> KinematicState {
        self.eval(self.duration)
    }
}

/// Closed-form setpoints of `segment` at `sigma`.
pub fn integrate_segment(segment: &TrajectorySegment, sigma: f64) -> Result<KinematicState> {
    segment.integrate(sigma)
}

/// Tolerance for chaining segments end to start.
pub const CONTIGUITY_TOL: f64 = 1e-9;

pub(crate) fn check_contiguous(segments: &[TrajectorySegment]) -> Result<()> {
    for (k, w) in segments.windows(2).enumerate() {
        let gap = w[0].end_state().max_gap(&w[1].start);
        if gap > CONTIGUITY_TOL {
            return Err(Error::Discontinuous { index: k, gap });
        }
    }
    Ok(())
}

/// Sample instant expressed as a segment index and local time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleTime {
    pub t: f64,
    pub segment: usize,
    pub sigma: f64,
}

/// Times `0, 1/f, 2/f, …` over the chain, plus the final endpoint.
///
/// When every segment spans an integral number of sample periods the local time is
/// computed from integer counts, so the same instant reached from different chain
/// origins yields bit-identical setpoints.
pub fn sample_times(segments: &[TrajectorySegment], f: f64) -> Result<Vec<SampleTime>> {
    if !(f.is_finite() && f > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sampling frequency must be > 0, got {f}"
        )));
    }
    if segments.is_empty() {
        return Ok(vec![]);
    }
    let dt0 = segments[0].duration;
    let per = dt0 * f;
    let per_round = per.round();
    let uniform = segments.iter().all(|s| s.duration == dt0);
    let mut out = Vec::new();
    let mut total: f64 = segments.iter().map(|s| s.duration).sum();
    if uniform && per_round >= 1.0 && (per - per_round).abs() < 1e-9 {
        let m = per_round as usize;
        for (k, _) in segments.iter().enumerate() {
            for i in 0..m {
                out.push(SampleTime {
                    t: (k * m + i) as f64 / f,
                    segment: k,
                    sigma: i as f64 / f,
                });
            }
        }
        total = (segments.len() * m) as f64 / f;
    } else {
        let mut start = 0.0;
        let mut k = 0usize;
        let mut idx = 0usize;
        loop {
            let t = idx as f64 / f;
            if t >= total - 1e-12 {
                break;
            }
            while k + 1 < segments.len() && t >= start + segments[k].duration {
                start += segments[k].duration;
                k += 1;
            }
            out.push(SampleTime {
                t,
                segment: k,
                sigma: (t - start).clamp(0.0, segments[k].duration),
            });
            idx += 1;
        }
    }
    let last = segments.len() - 1;
    out.push(SampleTime {
        t: total,
        segment: last,
        sigma: segments[last].duration,
    });
    Ok(out)
}

/// Time-stamped setpoints along a contiguous chain of segments.
pub fn sample_setpoints(segments: &[TrajectorySegment], f: f64) -> Result<Vec<(f64, KinematicState)>> {
    check_contiguous(segments)?;
    Ok(sample_times(segments, f)?
        .into_iter()
        .map(|s| (s.t, segments[s.segment].eval(s.sigma)))
        .collect())
}
