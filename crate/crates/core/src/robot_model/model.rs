use nalgebra::{Isometry3, Matrix3, Translation3, Unit, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::limits::JointLimits;
use crate::collision::Shape;

/// Rigid transform stored as translation plus roll-pitch-yaw (`Rz·Ry·Rx`).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    #[serde(default)]
    pub translation_m: [f64; 3],
    #[serde(default)]
    pub rotation_rpy_rad: [f64; 3],
}

impl Pose {
    pub fn from_translation(x: f64, y: f64, z: f64) -> Self {
        Pose {
            translation_m: [x, y, z],
            rotation_rpy_rad: [0.0; 3],
        }
    }

    pub fn isometry(&self) -> Isometry3<f64> {
        let [x, y, z] = self.translation_m;
        let [r, p, w] = self.rotation_rpy_rad;
        Isometry3::from_parts(Translation3::new(x, y, z), UnitQuaternion::from_euler_angles(r, p, w))
    }
}

/// A collision primitive rigidly attached to a link or placed in the world.
#[derive(Debug, Clone, PartialEq)]
pub struct Attached {
    pub shape: Shape,
    pub pose: Pose,
    pub(crate) iso: Isometry3<f64>,
}

impl Attached {
    pub fn new(shape: Shape, pose: Pose) -> Self {
        let iso = pose.isometry();
        Attached { shape, pose, iso }
    }

    pub fn isometry(&self) -> &Isometry3<f64> {
        &self.iso
    }
}

/// Optional joint friction added to inverse-dynamics torques.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Friction {
    /// N·m·s/rad
    #[serde(default)]
    pub viscous: f64,
    /// N·m
    #[serde(default)]
    pub coulomb: f64,
}

/// One revolute joint together with the link it moves.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkModel {
    /// Rotation axis in the joint frame.
    pub axis: Unit<Vector3<f64>>,
    /// Fixed transform from the parent link frame to the joint frame.
    pub origin: Pose,
    pub(crate) origin_iso: Isometry3<f64>,
    pub mass: f64,
    /// Center of mass in the link frame.
    pub com: Vector3<f64>,
    /// Inertia about the center of mass, link frame.
    pub inertia: Matrix3<f64>,
    pub geometry: Vec<Attached>,
}

impl LinkModel {
    pub fn new(
        axis: Vector3<f64>,
        origin: Pose,
        mass: f64,
        com: Vector3<f64>,
        inertia: Matrix3<f64>,
        geometry: Vec<Attached>,
    ) -> Result<Self, String> {
        let norm = axis.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(format!("joint axis must have unit norm, got {norm}"));
        }
        if !(mass.is_finite() && mass >= 0.0) {
            return Err(format!("mass must be >= 0, got {mass}"));
        }
        if (inertia - inertia.transpose()).abs().max() > 1e-12 {
            return Err("inertia tensor must be symmetric".into());
        }
        let min_eig = inertia.symmetric_eigenvalues().min();
        if min_eig < -1e-12 {
            return Err(format!(
                "inertia tensor must be positive semidefinite (eigenvalue {min_eig})"
            ));
        }
        for g in &geometry {
            g.shape.validate()?;
        }
        Ok(LinkModel {
            axis: Unit::new_unchecked(axis),
            origin,
            origin_iso: origin.isometry(),
            mass,
            com,
            inertia,
            geometry,
        })
    }
}

/// Serial chain of revolute joints.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotModel {
    pub name: String,
    pub base: Pose,
    pub(crate) base_iso: Isometry3<f64>,
    pub links: Vec<LinkModel>,
    pub limits: Vec<JointLimits>,
    pub friction: Vec<Friction>,
    /// Stationary start configuration.
    pub home: Vec<f64>,
}

impl RobotModel {
    pub fn new(
        name: impl Into<String>,
        base: Pose,
        links: Vec<LinkModel>,
        limits: Vec<JointLimits>,
        friction: Vec<Friction>,
        home: Vec<f64>,
    ) -> Result<Self, String> {
        let n = links.len();
        if n == 0 {
            return Err("robot needs at least one joint".into());
        }
        if limits.len() != n || friction.len() != n || home.len() != n {
            return Err(format!(
                "limits/friction/home lengths ({}, {}, {}) must equal joint count {n}",
                limits.len(),
                friction.len(),
                home.len()
            ));
        }
        for (i, l) in limits.iter().enumerate() {
            l.validate().map_err(|e| format!("joint {i}: {e}"))?;
        }
        Ok(RobotModel {
            name: name.into(),
            base,
            base_iso: base.isometry(),
            links,
            limits,
            friction,
            home,
        })
    }

    pub fn dof(&self) -> usize {
        self.links.len()
    }
}
