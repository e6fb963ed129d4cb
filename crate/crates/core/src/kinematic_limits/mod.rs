//! Feasible next-step accelerations, action mapping and segment integration.

mod range;
mod segment;
pub(crate) mod stopping;

pub use range::{feasible_acceleration_range, map_action, AccelerationRange, MappedAction, RANGE_TOL};
pub(crate) use segment::check_contiguous;
pub use segment::{
    integrate_segment, sample_setpoints, sample_times, JointState, KinematicState, SampleTime, TrajectorySegment,
    CONTIGUITY_TOL,
};
