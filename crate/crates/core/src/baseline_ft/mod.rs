//! Velocity-damper collision avoidance, kept as a comparison baseline.
//!
//! Each decision step the predicted acceleration is projected onto the kinematic range
//! intersected with linearized damper constraints. When that set is empty the baseline has
//! no fallback and executes the raw prediction.

mod demo;
mod qp;

pub use demo::{run_ft_demo, DemoRow, FtDemo, FtDemoReport};
pub use qp::{solve_box_qp, LinearConstraint, QpSolution, QP_TOL};

use serde::{Deserialize, Serialize};

use crate::collision::{scene_pair_distances, Shape};
use crate::error::{Error, Result};
use crate::kinematic_limits::{feasible_acceleration_range, map_action, KinematicState, TrajectorySegment};
use crate::robot_model::{CollisionPair, JointLimits, Scene};

/// Finite-difference step for the distance Jacobian, in rad.
pub const JACOBIAN_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DamperParams {
    /// Distance the approach must stop at, in m.
    pub ds: f64,
    /// Distance below which the damper becomes active, in m.
    pub di: f64,
    /// Approach rate allowed at the influence distance, in m/s.
    pub xi: f64,
}

impl DamperParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.ds >= 0.0 && self.ds < self.di && self.di.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "need 0 <= ds < di, got ds={} di={}",
                self.ds, self.di
            )));
        }
        if !(self.xi > 0.0 && self.xi.is_finite()) {
            return Err(Error::InvalidArgument(format!("xi must be > 0, got {}", self.xi)));
        }
        Ok(())
    }
}

/// Lowest admissible rate of change of a pair distance `d`; `-inf` outside the influence zone.
pub fn damper_min_rate(d: f64, params: &DamperParams) -> f64 {
    if d > params.di {
        f64::NEG_INFINITY
    } else {
        -params.xi * (d - params.ds) / (params.di - params.ds)
    }
}

/// One constrained pair in a damper step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DamperConstraint {
    pub pair: usize,
    pub distance: f64,
    /// Predicted distance rate at the end of the interval for the executed acceleration.
    pub rate: f64,
    pub min_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DamperStep {
    pub segment: TrajectorySegment,
    pub feasible: bool,
    pub constraints: Vec<DamperConstraint>,
}

fn differentiable(shape: &Shape) -> bool {
    !matches!(shape, Shape::Box { .. })
}

fn check_geometry(scene: &Scene) -> Result<()> {
    let link_ok = |r: &crate::robot_model::LinkRef| -> Result<()> {
        for g in &scene.link(*r).geometry {
            if !differentiable(&g.shape) {
                return Err(Error::UnsupportedPair("box", "velocity damper"));
            }
        }
        Ok(())
    };
    for p in &scene.pairs {
        match p {
            CollisionPair::ObstacleLink { obstacle, link } => {
                if !differentiable(&scene.obstacles[*obstacle].body.shape) {
                    return Err(Error::UnsupportedPair("box", "velocity damper"));
                }
                link_ok(link)?;
            }
            CollisionPair::LinkLink { a, b } => {
                link_ok(a)?;
                link_ok(b)?;
            }
        }
    }
    Ok(())
}

/// Central-difference gradient of every pair distance with respect to the joint positions.
fn distance_jacobian(scene: &Scene, q: &[f64]) -> Result<Vec<Vec<f64>>> {
    let mut jac = vec![vec![0.0; q.len()]; scene.pairs.len()];
    let mut probe = q.to_vec();
    for j in 0..q.len() {
        probe[j] = q[j] + JACOBIAN_STEP;
        let up = scene_pair_distances(scene, &probe)?;
        probe[j] = q[j] - JACOBIAN_STEP;
        let down = scene_pair_distances(scene, &probe)?;
        probe[j] = q[j];
        for k in 0..jac.len() {
            jac[k][j] = (up[k].distance - down[k].distance) / (2.0 * JACOBIAN_STEP);
        }
    }
    Ok(jac)
}

/// Chooses the end acceleration closest to the mapped prediction that keeps every pair inside
/// its influence zone at or above its damper rate at the end of the interval.
pub fn damper_step(
    state: &KinematicState,
    m: &[f64],
    scene: &Scene,
    params: &DamperParams,
    limits: &[JointLimits],
    dt: f64,
) -> Result<DamperStep> {
    params.validate()?;
    check_geometry(scene)?;
    let range = feasible_acceleration_range(state, limits, dt)?;
    let mapped = map_action(m, &range)?;
    let distances = scene_pair_distances(scene, &state.p)?;
    let active: Vec<usize> = (0..distances.len())
        .filter(|k| distances[*k].distance <= params.di)
        .collect();
    if active.is_empty() {
        return Ok(DamperStep {
            segment: TrajectorySegment::new(dt, state.clone(), mapped.a_end)?,
            feasible: true,
            constraints: vec![],
        });
    }
    let jac = distance_jacobian(scene, &state.p)?;
    // end velocity v + dt (a + x) / 2 is affine in the end acceleration x
    let base: Vec<f64> = (0..state.dof()).map(|i| state.v[i] + 0.5 * dt * state.a[i]).collect();
    let cons: Vec<LinearConstraint> = active
        .iter()
        .map(|&k| {
            let g = &jac[k];
            let min_rate = damper_min_rate(distances[k].distance, params);
            LinearConstraint {
                g: g.iter().map(|x| 0.5 * dt * x).collect(),
                b: min_rate - g.iter().zip(&base).map(|(x, y)| x * y).sum::<f64>(),
            }
        })
        .collect();
    let sol = solve_box_qp(&mapped.a_end, &range.a_next_min, &range.a_next_max, &cons);
    let a_end = if sol.feasible { sol.x } else { mapped.a_end };
    let constraints = active
        .iter()
        .zip(&cons)
        .map(|(&k, c)| DamperConstraint {
            pair: k,
            distance: distances[k].distance,
            rate: c.residual(&a_end) + damper_min_rate(distances[k].distance, params),
            min_rate: damper_min_rate(distances[k].distance, params),
        })
        .collect();
    Ok(DamperStep {
        segment: TrajectorySegment::new(dt, state.clone(), a_end)?,
        feasible: sol.feasible,
        constraints,
    })
}
