use nalgebra::{Isometry3, Point3, Unit, Vector3};
use serde::{Deserialize, Serialize};

/// Convex collision primitive, expressed in its own local frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Sphere {
        radius_m: f64,
    },
    /// Segment `a_m`–`b_m` swept by a sphere. Coincident endpoints degenerate to a sphere.
    Capsule {
        a_m: [f64; 3],
        b_m: [f64; 3],
        radius_m: f64,
    },
    /// Axis-aligned in the local frame, centered at the origin.
    Box {
        half_extents_m: [f64; 3],
    },
    /// Solid region `{x : normal·x <= offset_m}`; `normal` points out of the solid.
    HalfSpace {
        normal: [f64; 3],
        offset_m: f64,
    },
}

impl Shape {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Shape::Sphere { .. } => "sphere",
            Shape::Capsule { .. } => "capsule",
            Shape::Box { .. } => "box",
            Shape::HalfSpace { .. } => "half_space",
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            Shape::Sphere { radius_m } => {
                if !(radius_m.is_finite() && *radius_m > 0.0) {
                    return Err(format!("sphere radius must be > 0, got {radius_m}"));
                }
            }
            Shape::Capsule { a_m, b_m, radius_m } => {
                if !(finite(a_m) && finite(b_m)) {
                    return Err("capsule endpoints must be finite".into());
                }
                if !(radius_m.is_finite() && *radius_m > 0.0) {
                    return Err(format!("capsule radius must be > 0, got {radius_m}"));
                }
            }
            Shape::Box { half_extents_m } => {
                if !half_extents_m.iter().all(|h| h.is_finite() && *h > 0.0) {
                    return Err(format!("box half extents must be > 0, got {half_extents_m:?}"));
                }
            }
            Shape::HalfSpace { normal, offset_m } => {
                let n = Vector3::from(*normal).norm();
                if !(offset_m.is_finite() && (n - 1.0).abs() <= 1e-9) {
                    return Err(format!("half-space normal must have unit length, got norm {n}"));
                }
            }
        }
        Ok(())
    }
}

/// A shape placed in the world.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Placed {
    Sphere {
        center: Point3<f64>,
        radius: f64,
    },
    Capsule {
        a: Point3<f64>,
        b: Point3<f64>,
        radius: f64,
    },
    Box {
        pose: Isometry3<f64>,
        half: Vector3<f64>,
    },
    HalfSpace {
        normal: Unit<Vector3<f64>>,
        offset: f64,
    },
}

impl Placed {
    pub(crate) fn new(shape: &Shape, pose: &Isometry3<f64>) -> Self {
        match shape {
            Shape::Sphere { radius_m } => Placed::Sphere {
                center: pose * Point3::origin(),
                radius: *radius_m,
            },
            Shape::Capsule { a_m, b_m, radius_m } => Placed::Capsule {
                a: pose * Point3::from(Vector3::from(*a_m)),
                b: pose * Point3::from(Vector3::from(*b_m)),
                radius: *radius_m,
            },
            Shape::Box { half_extents_m } => Placed::Box {
                pose: *pose,
                half: Vector3::from(*half_extents_m),
            },
            Shape::HalfSpace { normal, offset_m } => {
                let n_local = Vector3::from(*normal);
                let n = pose.rotation * n_local;
                // a point on the local plane moves with the pose
                let on_plane = pose * Point3::from(n_local * *offset_m);
                Placed::HalfSpace {
                    normal: Unit::new_normalize(n),
                    offset: n.normalize().dot(&on_plane.coords),
                }
            }
        }
    }
}
