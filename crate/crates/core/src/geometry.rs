//! Planar geometry helpers: rotations, closest points and ray casts against
//! discs, capsules, boxes and segments.
//!
//! Ray casts only report *entering* hits. A ray whose origin already lies
//! inside (or on) a shape reports no hit for that shape.

use std::f64::consts::PI;

/// 2D vector in meters (or meters/second, newtons, depending on context).
pub type Vec2 = nalgebra::Vector2<f64>;

const PARALLEL_EPS: f64 = 1e-12;

/// Unit vector at `angle` radians from the world x axis.
pub fn unit(angle: f64) -> Vec2 {
    Vec2::new(angle.cos(), angle.sin())
}

/// Rotates `v` counter-clockwise by `angle` radians.
pub fn rotate(v: Vec2, angle: f64) -> Vec2 {
    let (s, c) = angle.sin_cos();
    Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y)
}

/// Heading of `v` in radians, in `(-pi, pi]`.
pub fn angle_of(v: Vec2) -> f64 {
    v.y.atan2(v.x)
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let mut a = angle % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// 2D cross product (z component).
pub fn cross(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Closest point to `p` on the segment `a`-`b`.
pub fn closest_point_on_segment(p: Vec2, a: Vec2, b: Vec2) -> Vec2 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return a;
    }
    let s = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    a + ab * s
}

pub fn distance_to_segment(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    (p - closest_point_on_segment(p, a, b)).norm()
}

/// Axis-aligned box `[min.x, max.x] x [min.y, max.y]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec2,
    pub max: Vec2,
}

/// Face of an [`Aabb`] that a ray entered through.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoxFace {
    MinX,
    MaxX,
    MinY,
    MaxY,
}

impl Aabb {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        Self { min, max }
    }

    /// Strict interior test.
    pub fn contains_strict(&self, p: Vec2) -> bool {
        p.x > self.min.x && p.x < self.max.x && p.y > self.min.y && p.y < self.max.y
    }

    /// Closed containment test.
    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn closest_point(&self, p: Vec2) -> Vec2 {
        Vec2::new(p.x.clamp(self.min.x, self.max.x), p.y.clamp(self.min.y, self.max.y))
    }

    pub fn center(&self) -> Vec2 {
        (self.min + self.max) * 0.5
    }
}

/// Entering hit of the ray `origin + t * dir` (`t > 0`) with the box.
pub fn ray_aabb(origin: Vec2, dir: Vec2, aabb: &Aabb) -> Option<(f64, BoxFace)> {
    if aabb.contains(origin) {
        return None;
    }
    let mut t_enter = f64::NEG_INFINITY;
    let mut t_exit = f64::INFINITY;
    let mut face = BoxFace::MinX;
    for axis in 0..2 {
        let (o, d, lo, hi) = (origin[axis], dir[axis], aabb.min[axis], aabb.max[axis]);
        if d.abs() < PARALLEL_EPS {
            if o < lo || o > hi {
                return None;
            }
            continue;
        }
        let (t_lo, t_hi) = ((lo - o) / d, (hi - o) / d);
        let (near, far, near_face) = if t_lo < t_hi {
            let f = if axis == 0 { BoxFace::MinX } else { BoxFace::MinY };
            (t_lo, t_hi, f)
        } else {
            let f = if axis == 0 { BoxFace::MaxX } else { BoxFace::MaxY };
            (t_hi, t_lo, f)
        };
        if near > t_enter {
            t_enter = near;
            face = near_face;
        }
        t_exit = t_exit.min(far);
    }
    if t_enter <= t_exit && t_enter > 0.0 {
        Some((t_enter, face))
    } else {
        None
    }
}

/// Entering hit of a ray with the disc of radius `r` centred at `c`.
pub fn ray_disc(origin: Vec2, dir: Vec2, c: Vec2, r: f64) -> Option<f64> {
    let oc = origin - c;
    let c_term = oc.norm_squared() - r * r;
    if c_term <= 0.0 {
        return None;
    }
    let b = dir.dot(&oc);
    let disc = b * b - c_term;
    if disc < 0.0 {
        return None;
    }
    let t = -b - disc.sqrt();
    (t > 0.0).then_some(t)
}

/// Entering hit of a ray with the capsule swept by a disc of radius `r`
/// moving from `a` to `b`. `dir` must be a unit vector.
pub fn ray_capsule(origin: Vec2, dir: Vec2, a: Vec2, b: Vec2, r: f64) -> Option<f64> {
    if distance_to_segment(origin, a, b) <= r {
        return None;
    }
    let mut best = ray_disc(origin, dir, a, r);
    let mut keep = |t: Option<f64>| {
        if let Some(t) = t {
            if best.is_none_or(|b| t < b) {
                best = Some(t);
            }
        }
    };
    keep(ray_disc(origin, dir, b, r));
    let ab = b - a;
    let len = ab.norm();
    if len > 0.0 {
        let e = ab / len;
        let n = Vec2::new(-e.y, e.x);
        let dn = dir.dot(&n);
        if dn.abs() >= PARALLEL_EPS {
            for side in [1.0, -1.0] {
                let t = (side * r - (origin - a).dot(&n)) / dn;
                if t > 0.0 {
                    let u = (origin + dir * t - a).dot(&e);
                    if (0.0..=len).contains(&u) {
                        keep(Some(t));
                    }
                }
            }
        }
    }
    best
}

/// Hit of a ray with the segment `a`-`b` (`t > 0`).
pub fn ray_segment(origin: Vec2, dir: Vec2, a: Vec2, b: Vec2) -> Option<f64> {
    let ab = b - a;
    let denom = cross(dir, ab);
    if denom.abs() < PARALLEL_EPS {
        return None;
    }
    let ao = a - origin;
    let t = cross(ao, ab) / denom;
    let s = cross(ao, dir) / denom;
    (t > 0.0 && (0.0..=1.0).contains(&s)).then_some(t)
}
