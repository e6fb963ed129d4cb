//! Scenes and their JSON description format (see `docs/scene_schema.md`).

use nalgebra::{Isometry3, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::kinematics::forward_kinematics;
use super::limits::{scale_limits, JointLimits, LimitScale};
use super::model::{Attached, Friction, LinkModel, Pose, RobotModel};
use crate::collision::{is_supported, Shape};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinkRef {
    pub robot: usize,
    pub link: usize,
}

/// Observed pair whose surface distance must stay at or above the safety distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollisionPair {
    ObstacleLink { obstacle: usize, link: LinkRef },
    LinkLink { a: LinkRef, b: LinkRef },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Obstacle {
    pub name: String,
    pub body: Attached,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub robots: Vec<RobotModel>,
    pub obstacles: Vec<Obstacle>,
    pub pairs: Vec<CollisionPair>,
    /// Safety distance S in meters.
    pub safety_distance: f64,
    pub gravity: Vector3<f64>,
}

impl Scene {
    /// Builds and validates a scene.
    pub fn new(
        robots: Vec<RobotModel>,
        obstacles: Vec<Obstacle>,
        pairs: Vec<CollisionPair>,
        safety_distance: f64,
        gravity: Vector3<f64>,
    ) -> Result<Self> {
        let scene = Scene {
            robots,
            obstacles,
            pairs,
            safety_distance,
            gravity,
        };
        scene.validate().map_err(Error::Validation)?;
        Ok(scene)
    }

    fn validate(&self) -> Result<(), String> {
        if !(self.safety_distance.is_finite() && self.safety_distance >= 0.0) {
            return Err(format!("safety distance S >= 0 violated ({})", self.safety_distance));
        }
        if !self.gravity.iter().all(|g| g.is_finite()) {
            return Err("gravity must be finite".into());
        }
        for o in &self.obstacles {
            o.body
                .shape
                .validate()
                .map_err(|e| format!("obstacle `{}`: {e}", o.name))?;
        }
        let link_ok = |r: &LinkRef| self.robots.get(r.robot).is_some_and(|rb| r.link < rb.dof());
        for (i, p) in self.pairs.iter().enumerate() {
            match p {
                CollisionPair::ObstacleLink { obstacle, link } => {
                    if *obstacle >= self.obstacles.len() || !link_ok(link) {
                        return Err(format!("collision pair {i}: index out of range"));
                    }
                    let obs = &self.obstacles[*obstacle].body.shape;
                    for g in &self.link(*link).geometry {
                        if !is_supported(obs, &g.shape) {
                            return Err(format!(
                                "collision pair {i}: unsupported shape pair {} vs {}",
                                obs.kind_name(),
                                g.shape.kind_name()
                            ));
                        }
                    }
                }
                CollisionPair::LinkLink { a, b } => {
                    if !link_ok(a) || !link_ok(b) {
                        return Err(format!("collision pair {i}: index out of range"));
                    }
                    if a == b {
                        return Err(format!(
                            "collision pair {i}: link-link pair must reference two distinct links"
                        ));
                    }
                    for ga in &self.link(*a).geometry {
                        for gb in &self.link(*b).geometry {
                            if !is_supported(&ga.shape, &gb.shape) {
                                return Err(format!(
                                    "collision pair {i}: unsupported shape pair {} vs {}",
                                    ga.shape.kind_name(),
                                    gb.shape.kind_name()
                                ));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn link(&self, r: LinkRef) -> &LinkModel {
        &self.robots[r.robot].links[r.link]
    }

    /// Total joint count over all robots; joint vectors concatenate robots in order.
    pub fn dof(&self) -> usize {
        self.robots.iter().map(RobotModel::dof).sum()
    }

    /// Offset of each robot's first joint in a concatenated joint vector.
    pub fn joint_offsets(&self) -> Vec<usize> {
        let mut off = 0;
        self.robots
            .iter()
            .map(|r| {
                let o = off;
                off += r.dof();
                o
            })
            .collect()
    }

    pub fn joint_limits(&self) -> Vec<JointLimits> {
        self.robots.iter().flat_map(|r| r.limits.iter().copied()).collect()
    }

    pub fn home(&self) -> Vec<f64> {
        self.robots.iter().flat_map(|r| r.home.iter().copied()).collect()
    }

    /// Link poses for every robot from a concatenated joint vector.
    pub fn forward_kinematics(&self, q: &[f64]) -> Result<Vec<Vec<Isometry3<f64>>>> {
        if q.len() != self.dof() {
            return Err(Error::Dimension {
                expected: self.dof(),
                actual: q.len(),
            });
        }
        let mut off = 0;
        self.robots
            .iter()
            .map(|r| {
                let poses = forward_kinematics(r, &q[off..off + r.dof()]);
                off += r.dof();
                poses
            })
            .collect()
    }

    /// Copy with every robot's limits scaled.
    pub fn with_limit_scale(&self, scale: &LimitScale) -> Result<Self> {
        scale.validate().map_err(Error::Validation)?;
        let mut s = self.clone();
        for r in &mut s.robots {
            for l in &mut r.limits {
                *l = scale_limits(l, scale);
            }
        }
        Ok(s)
    }

    pub fn with_safety_distance(&self, s: f64) -> Result<Self> {
        let mut out = self.clone();
        out.safety_distance = s;
        out.validate().map_err(Error::Validation)?;
        Ok(out)
    }

    pub fn obstacle_link_pairs(&self) -> usize {
        self.pairs
            .iter()
            .filter(|p| matches!(p, CollisionPair::ObstacleLink { .. }))
            .count()
    }

    pub fn link_link_pairs(&self) -> usize {
        self.pairs.len() - self.obstacle_link_pairs()
    }

    pub fn to_document(&self) -> SceneDoc {
        SceneDoc {
            robots: self.robots.iter().map(RobotDoc::from_model).collect(),
            obstacles: self
                .obstacles
                .iter()
                .map(|o| ObstacleDoc {
                    name: o.name.clone(),
                    shape: o.body.shape.clone(),
                    pose: o.body.pose,
                })
                .collect(),
            collision_pairs: PairsDoc {
                obstacle_link: self
                    .pairs
                    .iter()
                    .filter_map(|p| match p {
                        CollisionPair::ObstacleLink { obstacle, link } => Some(ObstacleLinkDoc {
                            obstacle: *obstacle,
                            robot: link.robot,
                            link: link.link,
                        }),
                        _ => None,
                    })
                    .collect(),
                link_link: self
                    .pairs
                    .iter()
                    .filter_map(|p| match p {
                        CollisionPair::LinkLink { a, b } => Some(LinkLinkDoc { a: *a, b: *b }),
                        _ => None,
                    })
                    .collect(),
            },
            safety_distance_m: self.safety_distance,
            gravity: Some(self.gravity.into()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("scene documents always serialize")
    }
}

// ---- document format ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneDoc {
    pub robots: Vec<RobotDoc>,
    #[serde(default)]
    pub obstacles: Vec<ObstacleDoc>,
    #[serde(default)]
    pub collision_pairs: PairsDoc,
    pub safety_distance_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gravity: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotDoc {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub base_pose: Pose,
    pub joints: Vec<JointDoc>,
    pub links: Vec<LinkDoc>,
    pub home_rad: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointDoc {
    pub axis: [f64; 3],
    #[serde(default)]
    pub origin_translation_m: [f64; 3],
    #[serde(default)]
    pub origin_rotation_rpy_rad: [f64; 3],
    pub limits: JointLimits,
    #[serde(default)]
    pub friction: Friction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkDoc {
    pub mass_kg: f64,
    pub com_m: [f64; 3],
    /// xx, yy, zz, xy, xz, yz about the center of mass.
    pub inertia_kgm2: [f64; 6],
    #[serde(default)]
    pub geometry: Vec<GeometryDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryDoc {
    #[serde(flatten)]
    pub shape: Shape,
    #[serde(default)]
    pub local_pose: Pose,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleDoc {
    #[serde(default)]
    pub name: String,
    pub shape: Shape,
    #[serde(default)]
    pub pose: Pose,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairsDoc {
    #[serde(default)]
    pub obstacle_link: Vec<ObstacleLinkDoc>,
    #[serde(default)]
    pub link_link: Vec<LinkLinkDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleLinkDoc {
    pub obstacle: usize,
    pub robot: usize,
    pub link: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkLinkDoc {
    pub a: LinkRef,
    pub b: LinkRef,
}

impl RobotDoc {
    fn from_model(r: &RobotModel) -> Self {
        RobotDoc {
            name: r.name.clone(),
            base_pose: r.base,
            joints: r
                .links
                .iter()
                .zip(&r.limits)
                .zip(&r.friction)
                .map(|((l, lim), f)| JointDoc {
                    axis: l.axis.into_inner().into(),
                    origin_translation_m: l.origin.translation_m,
                    origin_rotation_rpy_rad: l.origin.rotation_rpy_rad,
                    limits: *lim,
                    friction: *f,
                })
                .collect(),
            links: r
                .links
                .iter()
                .map(|l| {
                    let i = &l.inertia;
                    LinkDoc {
                        mass_kg: l.mass,
                        com_m: l.com.into(),
                        inertia_kgm2: [i[(0, 0)], i[(1, 1)], i[(2, 2)], i[(0, 1)], i[(0, 2)], i[(1, 2)]],
                        geometry: l
                            .geometry
                            .iter()
                            .map(|g| GeometryDoc {
                                shape: g.shape.clone(),
                                local_pose: g.pose,
                            })
                            .collect(),
                    }
                })
                .collect(),
            home_rad: r.home.clone(),
        }
    }

    fn into_model(self, index: usize) -> Result<RobotModel, String> {
        let ctx = |e: String| format!("robot {index}: {e}");
        if self.joints.len() != self.links.len() {
            return Err(ctx(format!(
                "joint count {} must equal link count {}",
                self.joints.len(),
                self.links.len()
            )));
        }
        let mut links = Vec::with_capacity(self.links.len());
        let mut limits = Vec::new();
        let mut friction = Vec::new();
        for (j, (jd, ld)) in self.joints.into_iter().zip(self.links).enumerate() {
            let [xx, yy, zz, xy, xz, yz] = ld.inertia_kgm2;
            let inertia = Matrix3::new(xx, xy, xz, xy, yy, yz, xz, yz, zz);
            let geometry = ld
                .geometry
                .into_iter()
                .map(|g| Attached::new(g.shape, g.local_pose))
                .collect();
            let link = LinkModel::new(
                Vector3::from(jd.axis),
                Pose {
                    translation_m: jd.origin_translation_m,
                    rotation_rpy_rad: jd.origin_rotation_rpy_rad,
                },
                ld.mass_kg,
                Vector3::from(ld.com_m),
                inertia,
                geometry,
            )
            .map_err(|e| ctx(format!("joint {j}: {e}")))?;
            links.push(link);
            limits.push(jd.limits);
            friction.push(jd.friction);
        }
        RobotModel::new(self.name, self.base_pose, links, limits, friction, self.home_rad).map_err(ctx)
    }
}

impl SceneDoc {
    pub fn into_scene(self) -> Result<Scene> {
        let robots = self
            .robots
            .into_iter()
            .enumerate()
            .map(|(i, r)| r.into_model(i))
            .collect::<Result<Vec<_>, _>>()
            .map_err(Error::Validation)?;
        let obstacles = self
            .obstacles
            .into_iter()
            .map(|o| Obstacle {
                name: o.name,
                body: Attached::new(o.shape, o.pose),
            })
            .collect();
        let mut pairs: Vec<CollisionPair> = self
            .collision_pairs
            .obstacle_link
            .into_iter()
            .map(|p| CollisionPair::ObstacleLink {
                obstacle: p.obstacle,
                link: LinkRef {
                    robot: p.robot,
                    link: p.link,
                },
            })
            .collect();
        pairs.extend(
            self.collision_pairs
                .link_link
                .into_iter()
                .map(|p| CollisionPair::LinkLink { a: p.a, b: p.b }),
        );
        let gravity = self.gravity.map(Vector3::from).unwrap_or(Vector3::new(0.0, 0.0, -9.81));
        Scene::new(robots, obstacles, pairs, self.safety_distance_m, gravity)
    }
}

/// Parses and validates a scene document.
pub fn load_scene(document: &str) -> Result<Scene> {
    let de = &mut serde_json::Deserializer::from_str(document);
    let doc: SceneDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::Parse {
            path,
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    })?;
    doc.into_scene()
}

pub fn load_scene_file(path: impl AsRef<std::path::Path>) -> Result<Scene> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io_at(path, e))?;
    load_scene(&text)
}
