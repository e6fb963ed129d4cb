use serde::{Deserialize, Serialize};

use super::controller::{apply_controller, ControllerModel, Discrete};
use super::rne::inverse_dynamics;
use crate::error::{Error, Result};
use crate::kinematic_limits::{check_contiguous, sample_times, TrajectorySegment};
use crate::robot_model::{JointLimits, Scene};

/// Outcome of checking joint torques along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorqueVerdict {
    pub safe: bool,
    /// Largest torque normalized by the limit on its side.
    pub max_normalized: f64,
    pub first_violation: Option<f64>,
    pub violating_joint: Option<usize>,
    pub samples_checked: usize,
}

impl TorqueVerdict {
    fn new() -> Self {
        TorqueVerdict {
            safe: true,
            max_normalized: 0.0,
            first_violation: None,
            violating_joint: None,
            samples_checked: 0,
        }
    }

    fn record(&mut self, t: f64, tau: &[f64], limits: &[JointLimits]) {
        self.samples_checked += 1;
        for (i, (x, l)) in tau.iter().zip(limits).enumerate() {
            self.max_normalized = self.max_normalized.max(l.normalize_torque(*x).abs());
            if self.safe && (*x > l.tau_max || *x < l.tau_min) {
                self.safe = false;
                self.first_violation = Some(t);
                self.violating_joint = Some(i);
            }
        }
    }
}

/// Inverse dynamics for every robot of the scene on concatenated joint vectors.
pub fn scene_inverse_dynamics(scene: &Scene, q: &[f64], qd: &[f64], qdd: &[f64]) -> Result<Vec<f64>> {
    let n = scene.dof();
    for v in [q, qd, qdd] {
        if v.len() != n {
            return Err(Error::Dimension {
                expected: n,
                actual: v.len(),
            });
        }
    }
    let mut out = Vec::with_capacity(n);
    let mut off = 0;
    for r in &scene.robots {
        let k = r.dof();
        out.extend(inverse_dynamics(
            r,
            &q[off..off + k],
            &qd[off..off + k],
            &qdd[off..off + k],
            &scene.gravity,
        )?);
        off += k;
    }
    Ok(out)
}

fn setpoint_rows(segments: &[TrajectorySegment], f_s: f64) -> Result<Vec<(f64, Vec<f64>)>> {
    check_contiguous(segments)?;
    let mut rows = Vec::new();
    for s in sample_times(segments, f_s)? {
        let mut q = Vec::new();
        segments[s.segment].eval_positions(s.sigma, &mut q);
        rows.push((s.t, q));
    }
    Ok(rows)
}

/// Samples setpoints at `f_s`, filters them through the controller model starting from
/// the first setpoint, and checks inverse-dynamics torques at every sample.
pub fn check_trajectory_torques(
    scene: &Scene,
    segments: &[TrajectorySegment],
    controller: &ControllerModel,
    f_s: f64,
) -> Result<TorqueVerdict> {
    let rows = setpoint_rows(segments, f_s)?;
    let limits = scene.joint_limits();
    let mut verdict = TorqueVerdict::new();
    if rows.is_empty() {
        return Ok(verdict);
    }
    let u: Vec<Vec<f64>> = rows.iter().map(|r| r.1.clone()).collect();
    let y = apply_controller(controller, &u, f_s)?;
    for (k, (t, _)) in rows.iter().enumerate() {
        let tau = scene_inverse_dynamics(scene, &y.q[k], &y.qd[k], &y.qdd[k])?;
        verdict.record(*t, &tau, &limits);
        if !verdict.safe {
            break;
        }
    }
    Ok(verdict)
}

/// Filtered positions at the last two samples before a decision boundary, together with
/// the setpoint at the boundary. Carrying it across boundaries makes torques computed
/// piecewise identical to torques computed over the whole executed trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterHistory {
    /// Filtered position one sample before the boundary.
    pub prev: Vec<f64>,
    /// Filtered position at the boundary.
    pub cur: Vec<f64>,
}

impl FilterHistory {
    /// A robot that has been resting at `q`.
    pub fn at_rest(q: &[f64]) -> Self {
        FilterHistory {
            prev: q.to_vec(),
            cur: q.to_vec(),
        }
    }
}

/// Filtered positions `y[0..]` for setpoints `u[0..]`, where `y[0]` comes from `history`.
fn filter_from(disc: &[Discrete], history: &FilterHistory, u: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut y = Vec::with_capacity(u.len());
    y.push(history.cur.clone());
    for w in u.windows(2) {
        let last = y.last().unwrap();
        y.push(
            (0..disc.len())
                .map(|i| disc[i].step(last[i], w[0][i], w[1][i]))
                .collect(),
        );
    }
    y
}

fn torque_at(scene: &Scene, before: &[f64], at: &[f64], after: &[f64], h: f64) -> Result<Vec<f64>> {
    let qd: Vec<f64> = (0..at.len()).map(|i| (after[i] - before[i]) / (2.0 * h)).collect();
    let qdd: Vec<f64> = (0..at.len())
        .map(|i| (after[i] - 2.0 * at[i] + before[i]) / (h * h))
        .collect();
    scene_inverse_dynamics(scene, at, &qd, &qdd)
}

/// Filter state after `u[1..]`, where `u[0]` is the setpoint at the boundary of `history`.
pub(crate) fn filter_positions(
    controller: &ControllerModel,
    f_s: f64,
    history: &FilterHistory,
    u: &[Vec<f64>],
) -> FilterHistory {
    let y = filter_from(&controller.discretize(f_s), history, u);
    match y.len() {
        0 | 1 => history.clone(),
        n => FilterHistory {
            prev: y[n - 2].clone(),
            cur: y[n - 1].clone(),
        },
    }
}

/// `(time, torques)` rows of a torque measurement.
pub type TorqueRows = Vec<(f64, Vec<f64>)>;

/// Torques at every `f_s` sample of `segments` except the last, continuing the filter
/// from `history`. Returns `(time, torques)` rows and the history at the final sample.
pub fn measure_torques(
    scene: &Scene,
    segments: &[TrajectorySegment],
    controller: &ControllerModel,
    f_s: f64,
    history: &FilterHistory,
) -> Result<(TorqueRows, FilterHistory)> {
    let rows = setpoint_rows(segments, f_s)?;
    let u: Vec<Vec<f64>> = rows.iter().map(|r| r.1.clone()).collect();
    let y = filter_from(&controller.discretize(f_s), history, &u);
    let h = 1.0 / f_s;
    let mut out = Vec::with_capacity(y.len().saturating_sub(1));
    for k in 0..y.len().saturating_sub(1) {
        let before = if k == 0 { &history.prev } else { &y[k - 1] };
        out.push((rows[k].0, torque_at(scene, before, &y[k], &y[k + 1], h)?));
    }
    let next = match y.len() {
        0 => history.clone(),
        1 => history.clone(),
        n => FilterHistory {
            prev: y[n - 2].clone(),
            cur: y[n - 1].clone(),
        },
    };
    Ok((out, next))
}

/// Checks the torques a controller seeded with `history` would produce along the
/// candidate, while the filter settles at the final setpoint afterwards, and when
/// holding that setpoint indefinitely.
pub(crate) fn check_torques_with_history(
    scene: &Scene,
    segments: &[TrajectorySegment],
    controller: &ControllerModel,
    f_s: f64,
    history: &FilterHistory,
) -> Result<TorqueVerdict> {
    let mut rows = setpoint_rows(segments, f_s)?;
    let limits = scene.joint_limits();
    let mut verdict = TorqueVerdict::new();
    let Some(last) = rows.last().cloned() else {
        return Ok(verdict);
    };
    // Residual lag decays below e^-28 of its initial size.
    let tail = (28.0 * controller.slowest() * f_s).ceil() as usize;
    let h = 1.0 / f_s;
    for k in 1..=tail {
        rows.push((last.0 + k as f64 * h, last.1.clone()));
    }
    let u: Vec<Vec<f64>> = rows.iter().map(|r| r.1.clone()).collect();
    let y = filter_from(&controller.discretize(f_s), history, &u);
    for k in 0..y.len() - 1 {
        let before = if k == 0 { &history.prev } else { &y[k - 1] };
        let tau = torque_at(scene, before, &y[k], &y[k + 1], h)?;
        verdict.record(rows[k].0, &tau, &limits);
        if !verdict.safe {
            return Ok(verdict);
        }
    }
    let zero = vec![0.0; last.1.len()];
    let hold = scene_inverse_dynamics(scene, &last.1, &zero, &zero)?;
    verdict.record(f64::INFINITY, &hold, &limits);
    Ok(verdict)
}

/// Gravity torques at a static configuration.
pub fn static_torques(scene: &Scene, q: &[f64]) -> Result<Vec<f64>> {
    let zero = vec![0.0; q.len()];
    scene_inverse_dynamics(scene, q, &zero, &zero)
}
