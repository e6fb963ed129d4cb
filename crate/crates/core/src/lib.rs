//! Safety layer for learned motion control of serial manipulators.
//!
//! An agent proposes normalized per-joint actions at a fixed decision rate. Each action
//! is mapped into a range of end accelerations that keeps every kinematic limit
//! satisfiable forever, and the resulting motion (followed by a braking continuation)
//! is checked for collisions and torque limits before it is executed. Unsafe proposals
//! are replaced by the previously verified braking motion.

mod error;

pub mod baseline_ft;
pub mod braking;
pub mod collision;
pub mod dynamics;
pub mod harness;
pub mod kinematic_limits;
pub mod robot_model;
pub mod safety_gate;
pub mod task_env;

pub use error::{Error, Result};
