use nalgebra::{Matrix3, Vector3};
use safe_motion::collision::Shape;
use safe_motion::robot_model::{
    Attached, CollisionPair, Friction, JointLimits, LinkModel, LinkRef, Obstacle, Pose, RobotModel, Scene,
};

/// A horizontal 1 m arm turning about z with a 0.1 m sphere at its tip, next to a wall
/// filling `y <= -0.5`. Tip clearance at angle `q` is `sin(q) + 0.4`.
pub fn swing(tau: f64, gravity: Vector3<f64>) -> Scene {
    let lim = JointLimits {
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
    };
    let link = LinkModel::new(
        Vector3::z(),
        Pose::default(),
        1.0,
        Vector3::new(1.0, 0.0, 0.0),
        Matrix3::identity() * 0.01,
        vec![Attached::new(
            Shape::Sphere { radius_m: 0.1 },
            Pose::from_translation(1.0, 0.0, 0.0),
        )],
    )
    .unwrap();
    let robot = RobotModel::new(
        "swing",
        Pose::default(),
        vec![link],
        vec![lim],
        vec![Friction::default()],
        vec![0.0],
    )
    .unwrap();
    let wall = Obstacle {
        name: "wall".into(),
        body: Attached::new(
            Shape::HalfSpace {
                normal: [0.0, 1.0, 0.0],
                offset_m: -0.5,
            },
            Pose::default(),
        ),
    };
    Scene::new(
        vec![robot],
        vec![wall],
        vec![CollisionPair::ObstacleLink {
            obstacle: 0,
            link: LinkRef { robot: 0, link: 0 },
        }],
        0.05,
        gravity,
    )
    .unwrap()
}

pub fn swing_clearance(q: f64) -> f64 {
    q.sin() + 0.4
}

pub fn fixture(name: &str) -> Scene {
    safe_motion::robot_model::load_scene_file(format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

/// The two-robot fixture plus a third arm placed behind the pair.
pub fn three_robots() -> Scene {
    let text = std::fs::read_to_string(format!("{}/fixtures/two_robot.json", env!("CARGO_MANIFEST_DIR"))).unwrap();
    let mut doc: safe_motion::robot_model::SceneDoc = serde_json::from_str(&text).unwrap();
    let mut third = doc.robots[0].clone();
    third.name = "rear".into();
    third.base_pose = Pose::from_translation(-1.0, 0.0, 0.0);
    doc.robots.push(third);
    doc.into_scene().unwrap()
}

pub fn fixture_doc(name: &str) -> safe_motion::robot_model::SceneDoc {
    let text = std::fs::read_to_string(format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap();
    serde_json::from_str(&text).unwrap()
}
