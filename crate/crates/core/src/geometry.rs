//! Small 3D vector/box toolkit shared by every transform.
//!
//! Coordinates follow the detector convention used throughout the crate:
//! `x` is the detector axis (vertices live at `(u, 0, 0)`), `y` is the
//! support half-space coordinate (sources satisfy `y > 0`), `z` completes
//! the right-handed frame.

use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the unit-length invariant of [`UnitVec3`].
pub const UNIT_NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3 {
            x: self.y * other.z - self.z * other.y,
            y: self.z * other.x - self.x * other.z,
            z: self.x * other.y - self.y * other.x,
        }
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn component(self, i: usize) -> f64 {
        match i {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("component index {i} out of range"),
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Unit vector on S²; construction enforces ‖·‖₂ = 1 within [`UNIT_NORM_TOL`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitVec3(Vec3);

impl UnitVec3 {
    /// Accepts a vector that is already unit length within tolerance.
    pub fn new(v: Vec3) -> Result<Self> {
        let n = v.norm();
        if (n - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::InvalidInput(format!(
                "expected unit vector, got norm {n:.17e}"
            )));
        }
        Ok(UnitVec3(v))
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(v: Vec3) -> Result<Self> {
        let n = v.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidInput(format!(
                "cannot normalize vector with norm {n}"
            )));
        }
        Ok(UnitVec3(v / n))
    }

    /// Cone/section axis `(cos beta, 0, sin beta)` in the detector plane.
    pub fn from_beta(beta: f64) -> Self {
        UnitVec3(Vec3::new(beta.cos(), 0.0, beta.sin()))
    }

    pub fn vec(self) -> Vec3 {
        self.0
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.0.dot(other)
    }
}

impl From<UnitVec3> for Vec3 {
    fn from(u: UnitVec3) -> Vec3 {
        u.0
    }
}

/// Orthonormal frame `(e1, e2)` completing `axis` to a right-handed basis.
///
/// Axes lying in the detector plane (`y == 0`, the `(cos beta, 0, sin beta)`
/// family) get the fixed frame `e1 = (-a_z, 0, a_x)`, `e2 = (0, 1, 0)` so that
/// repeated runs are bit-reproducible. A general axis is completed by
/// Gram-Schmidt seeded with the most-orthogonal coordinate axis, ties broken
/// by lowest index.
pub fn orthonormal_frame(axis: UnitVec3) -> (Vec3, Vec3) {
    let a = axis.vec();
    if a.y == 0.0 {
        return (Vec3::new(-a.z, 0.0, a.x), Vec3::new(0.0, 1.0, 0.0));
    }
    let mut seed_idx = 0;
    let mut best = f64::INFINITY;
    for i in 0..3 {
        let overlap = a.component(i).abs();
        if overlap < best {
            best = overlap;
            seed_idx = i;
        }
    }
    let mut seed = Vec3::ZERO;
    match seed_idx {
        0 => seed.x = 1.0,
        1 => seed.y = 1.0,
        _ => seed.z = 1.0,
    }
    let e1 = seed - a * seed.dot(a);
    let e1 = e1 / e1.norm();
    let e2 = a.cross(e1);
    (e1, e2)
}

/// Axis-aligned box, used as support bound for ray and plane quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Aabb { min, max }
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    /// Radius of the circumscribed sphere about the box center.
    pub fn bounding_radius(&self) -> f64 {
        (self.max - self.min).norm() * 0.5
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: Vec3::new(
                self.min.x.min(other.min.x),
                self.min.y.min(other.min.y),
                self.min.z.min(other.min.z),
            ),
            max: Vec3::new(
                self.max.x.max(other.max.x),
                self.max.y.max(other.max.y),
                self.max.z.max(other.max.z),
            ),
        }
    }

    pub fn contains(&self, p: Vec3) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    /// Exit distance of the half-line `origin + r dir`, `r >= 0`.
    ///
    /// Returns 0 when the half-line misses the box. When the origin lies
    /// inside, the entry parameter clamps to 0 and the exit is positive.
    pub fn ray_exit(&self, origin: Vec3, dir: Vec3) -> f64 {
        let mut t_enter = 0.0f64;
        let mut t_exit = f64::INFINITY;
        for i in 0..3 {
            let o = origin.component(i);
            let d = dir.component(i);
            let lo = self.min.component(i);
            let hi = self.max.component(i);
            if d == 0.0 {
                if o < lo || o > hi {
                    return 0.0;
                }
                continue;
            }
            let inv = 1.0 / d;
            let (t0, t1) = if inv >= 0.0 {
                ((lo - o) * inv, (hi - o) * inv)
            } else {
                ((hi - o) * inv, (lo - o) * inv)
            };
            t_enter = t_enter.max(t0);
            t_exit = t_exit.min(t1);
            if t_enter > t_exit {
                return 0.0;
            }
        }
        if !t_exit.is_finite() || t_exit <= 0.0 {
            return 0.0;
        }
        t_exit
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_vec_rejects_non_unit() {
        assert!(UnitVec3::new(Vec3::new(1.0, 1.0, 0.0)).is_err());
        assert!(UnitVec3::new(Vec3::new(1.0, 0.0, 0.0)).is_ok());
        assert!(UnitVec3::normalized(Vec3::ZERO).is_err());
    }

    #[test]
    fn frame_is_orthonormal() {
        for axis in [
            UnitVec3::from_beta(0.0),
            UnitVec3::from_beta(1.1),
            UnitVec3::normalized(Vec3::new(0.3, -0.7, 0.2)).unwrap(),
            UnitVec3::new(Vec3::new(0.0, 1.0, 0.0)).unwrap(),
        ] {
            let (e1, e2) = orthonormal_frame(axis);
            assert!(e1.dot(axis.vec()).abs() < 1e-14);
            assert!(e2.dot(axis.vec()).abs() < 1e-14);
            assert!(e1.dot(e2).abs() < 1e-14);
            assert!((e1.norm() - 1.0).abs() < 1e-14);
            assert!((e2.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn detector_plane_axis_gets_fixed_frame() {
        let beta = 0.4f64;
        let axis = UnitVec3::from_beta(beta);
        let (e1, e2) = orthonormal_frame(axis);
        assert_eq!(e1, Vec3::new(-beta.sin(), 0.0, beta.cos()));
        assert_eq!(e2, Vec3::new(0.0, 1.0, 0.0));
    }

    #[test]
    fn ray_exit_through_unit_box() {
        let b = Aabb::new(Vec3::ZERO, Vec3::new(1.0, 1.0, 1.0));
        let r = b.ray_exit(Vec3::new(-1.0, 0.5, 0.5), Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(r, 2.0);
        // miss
        assert_eq!(
            b.ray_exit(Vec3::new(-1.0, 2.5, 0.5), Vec3::new(1.0, 0.0, 0.0)),
            0.0
        );
        // pointing away
        assert_eq!(
            b.ray_exit(Vec3::new(-1.0, 0.5, 0.5), Vec3::new(-1.0, 0.0, 0.0)),
            0.0
        );
        // origin inside
        let r = b.ray_exit(Vec3::new(0.5, 0.5, 0.5), Vec3::new(0.0, 1.0, 0.0));
        assert_eq!(r, 0.5);
    }
}
