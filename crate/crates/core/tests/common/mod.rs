#![allow(dead_code)]

pub mod brake_oracle;
pub mod chains;
pub mod kin_oracle;
pub mod lagrange;
pub mod scenes;

use safe_motion::robot_model::JointLimits;

pub fn joint_limits(p: f64, v: f64, a: f64, j: f64) -> JointLimits {
    JointLimits {
        p_min: -p,
        p_max: p,
        v_min: -v,
        v_max: v,
        a_min: -a,
        a_max: a,
        j_min: -j,
        j_max: j,
        tau_min: -100.0,
        tau_max: 100.0,
    }
}
