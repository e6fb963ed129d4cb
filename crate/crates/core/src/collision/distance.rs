//! Closed-form distance queries between convex primitives.

use nalgebra::{Isometry3, Point3, Vector3};
use serde::{Deserialize, Serialize};

use super::shape::{Placed, Shape};
use crate::error::{Error, Result};

/// Closest-point result of a single primitive pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proximity {
    /// Signed surface distance; negative when penetrating.
    pub distance: f64,
    pub point_a: Point3<f64>,
    pub point_b: Point3<f64>,
    /// Set when a capsule core intersects a box; `distance` is then reported as 0.
    pub overlap: bool,
}

impl Proximity {
    fn swapped(self) -> Self {
        Proximity {
            point_a: self.point_b,
            point_b: self.point_a,
            ..self
        }
    }
}

/// Distance between one observed pair at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub pair: usize,
    pub distance: f64,
    pub time: f64,
    pub witness_a: [f64; 3],
    pub witness_b: [f64; 3],
}

/// Exact signed distance between two posed shapes.
pub fn pair_distance(
    shape_a: &Shape,
    pose_a: &Isometry3<f64>,
    shape_b: &Shape,
    pose_b: &Isometry3<f64>,
) -> Result<Proximity> {
    placed_distance(&Placed::new(shape_a, pose_a), &Placed::new(shape_b, pose_b))
        .ok_or_else(|| Error::UnsupportedPair(shape_a.kind_name(), shape_b.kind_name()))
}

/// Whether `pair_distance` supports the combination.
pub fn is_supported(a: &Shape, b: &Shape) -> bool {
    !matches!(
        (a, b),
        (Shape::Box { .. }, Shape::Box { .. }) | (Shape::HalfSpace { .. }, Shape::HalfSpace { .. })
    )
}

pub(crate) fn placed_distance(a: &Placed, b: &Placed) -> Option<Proximity> {
    use Placed::*;
    let core = |p: &Placed| -> Option<(Point3<f64>, Point3<f64>, f64)> {
        match *p {
            Sphere { center, radius } => Some((center, center, radius)),
            Capsule { a, b, radius } => Some((a, b, radius)),
            _ => None,
        }
    };
    match (a, b) {
        (Box { .. }, Box { .. }) | (HalfSpace { .. }, HalfSpace { .. }) => None,
        (HalfSpace { normal, offset }, Box { pose, half }) => {
            Some(box_half_space(pose, half, normal, *offset).swapped())
        }
        (Box { pose, half }, HalfSpace { normal, offset }) => Some(box_half_space(pose, half, normal, *offset)),
        (HalfSpace { .. }, _) | (Box { .. }, _) => placed_distance(b, a).map(Proximity::swapped),
        (_, HalfSpace { normal, offset }) => {
            let (p, q, r) = core(a)?;
            let dp = normal.dot(&p.coords) - offset;
            let dq = normal.dot(&q.coords) - offset;
            let c = if dq < dp { q } else { p };
            let d = dp.min(dq);
            Some(Proximity {
                distance: d - r,
                point_a: c - normal.into_inner() * r,
                point_b: c - normal.into_inner() * d,
                overlap: false,
            })
        }
        (_, Box { pose, half }) => {
            let (p, q, r) = core(a)?;
            Some(segment_box(p, q, r, pose, half))
        }
        _ => {
            let (p1, q1, r1) = core(a)?;
            let (p2, q2, r2) = core(b)?;
            let (c1, c2) = closest_points_segments(p1, q1, p2, q2);
            Some(round_cores(c1, r1, c2, r2))
        }
    }
}

fn round_cores(c1: Point3<f64>, r1: f64, c2: Point3<f64>, r2: f64) -> Proximity {
    let delta = c2 - c1;
    let len = delta.norm();
    let dir = if len > 0.0 { delta / len } else { Vector3::z() };
    Proximity {
        distance: len - r1 - r2,
        point_a: c1 + dir * r1,
        point_b: c2 - dir * r2,
        overlap: false,
    }
}

/// Closest points between segments `p1q1` and `p2q2` (either may be degenerate).
pub(crate) fn closest_points_segments(
    p1: Point3<f64>,
    q1: Point3<f64>,
    p2: Point3<f64>,
    q2: Point3<f64>,
) -> (Point3<f64>, Point3<f64>) {
    const EPS: f64 = 1e-18;
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.dot(&d1);
    let e = d2.dot(&d2);
    let f = d2.dot(&r);
    let (s, t);
    if a <= EPS && e <= EPS {
        return (p1, p2);
    }
    if a <= EPS {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= EPS {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > EPS * a * e {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    (p1 + d1 * s, p2 + d2 * t)
}

fn box_half_space(
    pose: &Isometry3<f64>,
    half: &Vector3<f64>,
    normal: &nalgebra::Unit<Vector3<f64>>,
    offset: f64,
) -> Proximity {
    let mut best = (f64::INFINITY, Point3::origin());
    for i in 0..8 {
        let corner = Vector3::new(
            if i & 1 == 0 { -half.x } else { half.x },
            if i & 2 == 0 { -half.y } else { half.y },
            if i & 4 == 0 { -half.z } else { half.z },
        );
        let w = pose * Point3::from(corner);
        let d = normal.dot(&w.coords) - offset;
        if d < best.0 {
            best = (d, w);
        }
    }
    Proximity {
        distance: best.0,
        point_a: best.1,
        point_b: best.1 - normal.into_inner() * best.0,
        overlap: false,
    }
}

/// Segment (possibly degenerate) with radius against an oriented box.
fn segment_box(p: Point3<f64>, q: Point3<f64>, radius: f64, pose: &Isometry3<f64>, half: &Vector3<f64>) -> Proximity {
    let lp = pose.inverse_transform_point(&p);
    let lq = pose.inverse_transform_point(&q);
    let degenerate = (lq - lp).norm_squared() == 0.0;
    let inside = |x: &Point3<f64>| (0..3).all(|i| x[i].abs() <= half[i]);

    if degenerate && inside(&lp) {
        // penetration depth of a point inside the box
        let (axis, depth) = (0..3)
            .map(|i| (i, half[i] - lp[i].abs()))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        let mut face = lp;
        face[axis] = half[axis].copysign(if lp[axis] == 0.0 { 1.0 } else { lp[axis] });
        let dir = pose.rotation * (face - lp).normalize();
        return Proximity {
            distance: -(depth + radius),
            point_a: p - dir * radius,
            point_b: pose * face,
            overlap: false,
        };
    }
    if !degenerate && segment_hits_box(&lp, &lq, half) {
        let w = pose * clamp_to_box(&lp, half);
        return Proximity {
            distance: 0.0,
            point_a: w,
            point_b: w,
            overlap: true,
        };
    }

    let t = segment_box_parameter(&lp, &lq, half);
    let on_seg = lp + (lq - lp) * t;
    let on_box = clamp_to_box(&on_seg, half);
    let delta = on_seg - on_box;
    let len = delta.norm();
    let dir = pose.rotation * (delta / len);
    Proximity {
        distance: len - radius,
        point_a: pose * on_seg - dir * radius,
        point_b: pose * on_box,
        overlap: false,
    }
}

fn clamp_to_box(x: &Point3<f64>, half: &Vector3<f64>) -> Point3<f64> {
    Point3::new(
        x.x.clamp(-half.x, half.x),
        x.y.clamp(-half.y, half.y),
        x.z.clamp(-half.z, half.z),
    )
}

/// Slab test: does the segment touch the closed box?
fn segment_hits_box(p: &Point3<f64>, q: &Point3<f64>, half: &Vector3<f64>) -> bool {
    let d = q - p;
    let (mut t0, mut t1) = (0.0_f64, 1.0_f64);
    for i in 0..3 {
        if d[i] == 0.0 {
            if p[i].abs() > half[i] {
                return false;
            }
        } else {
            let a = (-half[i] - p[i]) / d[i];
            let b = (half[i] - p[i]) / d[i];
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            t0 = t0.max(lo);
            t1 = t1.min(hi);
            if t0 > t1 {
                return false;
            }
        }
    }
    true
}

/// Minimizer over t ∈ [0,1] of the squared distance from p + t(q-p) to the box.
///
/// The squared distance is piecewise quadratic with breakpoints where a coordinate
/// crosses a face plane; each piece is minimized exactly.
fn segment_box_parameter(p: &Point3<f64>, q: &Point3<f64>, half: &Vector3<f64>) -> f64 {
    let d = q - p;
    let mut breaks = vec![0.0, 1.0];
    for i in 0..3 {
        if d[i] != 0.0 {
            for s in [-1.0, 1.0] {
                let t = (s * half[i] - p[i]) / d[i];
                if t > 0.0 && t < 1.0 {
                    breaks.push(t);
                }
            }
        }
    }
    breaks.sort_by(|a, b| a.total_cmp(b));

    let sq = |t: f64| {
        let x = p + d * t;
        (0..3)
            .map(|i| {
                let e = (x[i].abs() - half[i]).max(0.0);
                e * e
            })
            .sum::<f64>()
    };
    let mut best = (f64::INFINITY, 0.0);
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mid = p + d * (0.5 * (lo + hi));
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..3 {
            let target = if mid[i] > half[i] {
                half[i]
            } else if mid[i] < -half[i] {
                -half[i]
            } else {
                continue;
            };
            num += d[i] * (target - p[i]);
            den += d[i] * d[i];
        }
        let t = if den > 0.0 { (num / den).clamp(lo, hi) } else { lo };
        for cand in [t, lo, hi] {
            let v = sq(cand);
            if v < best.0 {
                best = (v, cand);
            }
        }
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Translation3, UnitQuaternion};

    fn at(x: f64, y: f64, z: f64) -> Isometry3<f64> {
        Isometry3::translation(x, y, z)
    }

    #[test]
    fn two_spheres() {
        let a = Shape::Sphere { radius_m: 0.3 };
        let b = Shape::Sphere { radius_m: 0.2 };
        let r = pair_distance(&a, &at(0.0, 0.0, 0.0), &b, &at(1.0, 0.0, 0.0)).unwrap();
        assert!((r.distance - 0.5).abs() < 1e-15);
        assert!((r.point_a.x - 0.3).abs() < 1e-15);
        assert!((r.point_b.x - 0.8).abs() < 1e-15);
    }

    #[test]
    fn sphere_touching_half_space() {
        let table = Shape::HalfSpace {
            normal: [0.0, 0.0, 1.0],
            offset_m: 0.0,
        };
        let s = Shape::Sphere { radius_m: 0.3 };
        let r = pair_distance(&s, &at(0.2, -0.1, 0.3), &table, &Isometry3::identity()).unwrap();
        assert_eq!(r.distance, 0.0);
    }

    #[test]
    fn moved_half_space_keeps_offset() {
        let plane = Shape::HalfSpace {
            normal: [1.0, 0.0, 0.0],
            offset_m: 0.5,
        };
        let pose = Isometry3::from_parts(
            Translation3::new(1.0, 0.0, 0.0),
            UnitQuaternion::from_euler_angles(0.0, 0.0, std::f64::consts::FRAC_PI_2),
        );
        // rotated normal is +y, plane passes through (1, 0.5, 0)
        let s = Shape::Sphere { radius_m: 0.1 };
        let r = pair_distance(&s, &at(0.0, 2.0, 0.0), &plane, &pose).unwrap();
        assert!((r.distance - 1.4).abs() < 1e-12);
    }

    #[test]
    fn sphere_inside_box_reports_depth() {
        let b = Shape::Box {
            half_extents_m: [1.0, 1.0, 1.0],
        };
        let s = Shape::Sphere { radius_m: 0.1 };
        let r = pair_distance(&s, &at(0.0, 0.0, 0.8), &b, &Isometry3::identity()).unwrap();
        assert!((r.distance + 0.3).abs() < 1e-12);
        assert!(!r.overlap);
    }

    #[test]
    fn capsule_through_box_flags_overlap() {
        let b = Shape::Box {
            half_extents_m: [0.5, 0.5, 0.5],
        };
        let c = Shape::Capsule {
            a_m: [-2.0, 0.0, 0.0],
            b_m: [2.0, 0.0, 0.0],
            radius_m: 0.05,
        };
        let r = pair_distance(&c, &Isometry3::identity(), &b, &Isometry3::identity()).unwrap();
        assert_eq!(r.distance, 0.0);
        assert!(r.overlap);
    }

    #[test]
    fn capsule_beside_box_edge() {
        let b = Shape::Box {
            half_extents_m: [0.5, 0.5, 0.5],
        };
        // runs parallel to the z edge at (0.5, 0.5)
        let c = Shape::Capsule {
            a_m: [1.5, 1.5, -3.0],
            b_m: [1.5, 1.5, 3.0],
            radius_m: 0.1,
        };
        let r = pair_distance(&c, &Isometry3::identity(), &b, &Isometry3::identity()).unwrap();
        assert!((r.distance - (2.0_f64.sqrt() - 0.1)).abs() < 1e-12);
    }

    #[test]
    fn box_box_is_rejected() {
        let b = Shape::Box {
            half_extents_m: [0.5, 0.5, 0.5],
        };
        let e = pair_distance(&b, &Isometry3::identity(), &b, &at(3.0, 0.0, 0.0)).unwrap_err();
        assert!(matches!(e, Error::UnsupportedPair("box", "box")));
    }

    #[test]
    fn box_above_half_space() {
        let table = Shape::HalfSpace {
            normal: [0.0, 0.0, 1.0],
            offset_m: 0.0,
        };
        let b = Shape::Box {
            half_extents_m: [0.2, 0.2, 0.1],
        };
        let r = pair_distance(&b, &at(0.0, 0.0, 0.4), &table, &Isometry3::identity()).unwrap();
        assert!((r.distance - 0.3).abs() < 1e-12);
    }
}
