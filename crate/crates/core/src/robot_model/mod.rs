//! Robots, obstacles, limits and scenes.

mod kinematics;
mod limits;
mod model;
mod scene;

pub use kinematics::forward_kinematics;
pub use limits::{derive_jerk_limit, scale_limits, JointLimits, LimitScale};
pub use model::{Attached, Friction, LinkModel, Pose, RobotModel};
pub use scene::{load_scene, load_scene_file, CollisionPair, LinkRef, Obstacle, Scene, SceneDoc};
