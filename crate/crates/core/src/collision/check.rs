//! Pair distances for whole scenes and sampled trajectory checks.

use nalgebra::Isometry3;
use serde::{Deserialize, Serialize};

use super::distance::{placed_distance, DistanceReport, Proximity};
use super::shape::Placed;
use crate::error::{Error, Result};
use crate::kinematic_limits::{check_contiguous, sample_times, TrajectorySegment};
use crate::robot_model::{CollisionPair, LinkRef, Scene};

/// Outcome of checking one trajectory against the safety distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionVerdict {
    pub safe: bool,
    /// Minimum over checked samples and pairs; infinite when the scene has no pairs.
    pub min_distance: f64,
    /// Time since the start of the trajectory of the first sample below the safety distance.
    pub first_violation: Option<f64>,
    pub violating_pair: Option<usize>,
    pub samples_checked: usize,
}

/// Whether checking stops at the first violation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CheckMode {
    #[default]
    EarlyExit,
    FullMinimum,
}

fn link_primitives(scene: &Scene, poses: &[Vec<Isometry3<f64>>], r: LinkRef) -> Vec<Placed> {
    let pose = &poses[r.robot][r.link];
    scene
        .link(r)
        .geometry
        .iter()
        .map(|g| Placed::new(&g.shape, &(pose * g.isometry())))
        .collect()
}

fn closest(a: &[Placed], b: &[Placed]) -> Result<Proximity> {
    let mut best: Option<Proximity> = None;
    for pa in a {
        for pb in b {
            let d = placed_distance(pa, pb).ok_or(Error::UnsupportedPair("link", "primitive"))?;
            if best.is_none_or(|x| d.distance < x.distance) {
                best = Some(d);
            }
        }
    }
    best.ok_or_else(|| Error::Validation("collision pair references a body without geometry".into()))
}

/// Closest points of every declared pair at configuration `q` (concatenated joints).
pub fn scene_pair_distances(scene: &Scene, q: &[f64]) -> Result<Vec<Proximity>> {
    let poses = scene.forward_kinematics(q)?;
    scene
        .pairs
        .iter()
        .map(|pair| match *pair {
            CollisionPair::ObstacleLink { obstacle, link } => {
                let o = &scene.obstacles[obstacle].body;
                closest(
                    &[Placed::new(&o.shape, o.isometry())],
                    &link_primitives(scene, &poses, link),
                )
            }
            CollisionPair::LinkLink { a, b } => {
                closest(&link_primitives(scene, &poses, a), &link_primitives(scene, &poses, b))
            }
        })
        .collect()
}

/// Smallest pair distance at `q` as a report, or `None` without pairs.
pub fn closest_pair(scene: &Scene, q: &[f64], time: f64) -> Result<Option<DistanceReport>> {
    let d = scene_pair_distances(scene, q)?;
    Ok(d.iter()
        .enumerate()
        .min_by(|x, y| x.1.distance.total_cmp(&y.1.distance))
        .map(|(pair, p)| DistanceReport {
            pair,
            distance: p.distance,
            time,
            witness_a: p.point_a.coords.into(),
            witness_b: p.point_b.coords.into(),
        }))
}

/// Samples the trajectory at `f_c` and checks every declared pair against `safety_distance`.
pub fn check_trajectory_collisions(
    scene: &Scene,
    segments: &[TrajectorySegment],
    f_c: f64,
    safety_distance: f64,
    mode: CheckMode,
) -> Result<CollisionVerdict> {
    if !(safety_distance.is_finite() && safety_distance >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "safety distance must be >= 0, got {safety_distance}"
        )));
    }
    check_contiguous(segments)?;
    let mut verdict = CollisionVerdict {
        safe: true,
        min_distance: f64::INFINITY,
        first_violation: None,
        violating_pair: None,
        samples_checked: 0,
    };
    let mut q = Vec::new();
    for s in sample_times(segments, f_c)? {
        segments[s.segment].eval_positions(s.sigma, &mut q);
        verdict.samples_checked += 1;
        for (i, p) in scene_pair_distances(scene, &q)?.iter().enumerate() {
            verdict.min_distance = verdict.min_distance.min(p.distance);
            if p.distance < safety_distance && verdict.safe {
                verdict.safe = false;
                verdict.first_violation = Some(s.t);
                verdict.violating_pair = Some(i);
            }
        }
        if !verdict.safe && mode == CheckMode::EarlyExit {
            break;
        }
    }
    Ok(verdict)
}
