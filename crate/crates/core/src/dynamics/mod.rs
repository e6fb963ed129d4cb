//! Inverse dynamics, the controller lag model and torque-limit checks.

mod controller;
mod rne;
mod torque;

pub use controller::{apply_controller, ControllerModel, FilteredTrajectory};
pub use rne::inverse_dynamics;
pub(crate) use torque::{check_torques_with_history, filter_positions};
pub use torque::{
    check_trajectory_torques, measure_torques, scene_inverse_dynamics, static_torques, FilterHistory, TorqueRows,
    TorqueVerdict,
};
