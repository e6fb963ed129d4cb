//! Distance queries between primitives and sampled trajectory checks.

mod check;
mod distance;
mod shape;

pub use check::{check_trajectory_collisions, closest_pair, scene_pair_distances, CheckMode, CollisionVerdict};
pub use distance::{is_supported, pair_distance, DistanceReport, Proximity};
pub use shape::Shape;
