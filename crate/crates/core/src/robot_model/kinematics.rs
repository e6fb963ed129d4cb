use nalgebra::{Isometry3, UnitQuaternion};

use super::model::RobotModel;
use crate::error::{Error, Result};

/// World pose of every link frame for joint positions `q`, composed base to tip.
pub fn forward_kinematics(model: &RobotModel, q: &[f64]) -> Result<Vec<Isometry3<f64>>> {
    if q.len() != model.dof() {
        return Err(Error::Dimension {
            expected: model.dof(),
            actual: q.len(),
        });
    }
    let mut out = Vec::with_capacity(q.len());
    let mut frame = model.base_iso;
    for (link, &angle) in model.links.iter().zip(q) {
        frame = frame * link.origin_iso * UnitQuaternion::from_axis_angle(&link.axis, angle);
        out.push(frame);
    }
    Ok(out)
}
