//! Randomized serial chains for dynamics tests.

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use safe_motion::collision::Shape;
use safe_motion::robot_model::{Attached, Friction, JointLimits, LinkModel, Pose, RobotModel};

pub fn wide_limits(tau: f64) -> JointLimits {
    JointLimits {
        p_min: -3.0,
        p_max: 3.0,
        v_min: -2.0,
        v_max: 2.0,
        a_min: -10.0,
        a_max: 10.0,
        j_min: -200.0,
        j_max: 200.0,
        tau_min: -tau,
        tau_max: tau,
    }
}

pub fn random_chain(rng: &mut ChaCha8Rng, dof: usize) -> RobotModel {
    let mut links = Vec::new();
    for _ in 0..dof {
        let axis = Vector3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        )
        .normalize();
        let origin = Pose {
            translation_m: [
                rng.gen_range(-0.3..0.3),
                rng.gen_range(-0.3..0.3),
                rng.gen_range(0.0..0.4),
            ],
            rotation_rpy_rad: [
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-3.0..3.0),
            ],
        };
        let a = Matrix3::from_fn(|_, _| rng.gen_range(-0.1..0.1));
        let inertia = a * a.transpose() + Matrix3::identity() * 1e-3;
        let com = Vector3::new(
            rng.gen_range(-0.1..0.1),
            rng.gen_range(-0.1..0.1),
            rng.gen_range(0.0..0.2),
        );
        let geometry = vec![Attached::new(Shape::Sphere { radius_m: 0.05 }, Pose::default())];
        links.push(LinkModel::new(axis, origin, rng.gen_range(0.5..3.0), com, inertia, geometry).unwrap());
    }
    RobotModel::new(
        "chain",
        Pose::default(),
        links,
        vec![wide_limits(100.0); dof],
        vec![Friction::default(); dof],
        vec![0.0; dof],
    )
    .unwrap()
}
