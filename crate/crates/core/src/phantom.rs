//! Closed-form test sources: balls, truncated Gaussians and odd-in-y
//! constructions, evaluable at arbitrary points.

use serde::{Deserialize, Serialize};

use crate::geometry::{Aabb, Vec3};

/// Gaussians are cut to exactly zero beyond this many widths so every
/// phantom has compact support.
pub const GAUSSIAN_TRUNCATION_WIDTHS: f64 = 6.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Primitive {
    /// Constant `amplitude` inside the closed ball.
    Ball { center: Vec3, radius: f64, amplitude: f64 },
    /// `amplitude * exp(-|x - center|^2 / (2 width^2))`, zero beyond 6 widths.
    Gaussian { center: Vec3, width: f64, amplitude: f64 },
    /// `g(x, y, z) - g(x, -y, z)` for the wrapped primitive.
    OddY { inner: Box<Primitive> },
}

impl Primitive {
    pub fn eval(&self, p: Vec3) -> f64 {
        match self {
            Primitive::Ball { center, radius, amplitude } => {
                if (p - *center).norm_squared() <= radius * radius {
                    *amplitude
                } else {
                    0.0
                }
            }
            Primitive::Gaussian { center, width, amplitude } => {
                let d2 = (p - *center).norm_squared();
                let cut = GAUSSIAN_TRUNCATION_WIDTHS * width;
                if d2 > cut * cut {
                    0.0
                } else {
                    amplitude * (-d2 / (2.0 * width * width)).exp()
                }
            }
            Primitive::OddY { inner } => {
                inner.eval(p) - inner.eval(Vec3::new(p.x, -p.y, p.z))
            }
        }
    }

    pub fn support_box(&self) -> Aabb {
        match self {
            Primitive::Ball { center, radius, .. } => {
                let r = Vec3::new(*radius, *radius, *radius);
                Aabb::new(*center - r, *center + r)
            }
            Primitive::Gaussian { center, width, .. } => {
                let c = GAUSSIAN_TRUNCATION_WIDTHS * width;
                let r = Vec3::new(c, c, c);
                Aabb::new(*center - r, *center + r)
            }
            Primitive::OddY { inner } => {
                let b = inner.support_box();
                let mirrored = Aabb::new(
                    Vec3::new(b.min.x, -b.max.y, b.min.z),
                    Vec3::new(b.max.x, -b.min.y, b.max.z),
                );
                b.union(&mirrored)
            }
        }
    }

    fn scaled(&self, factor: f64) -> Primitive {
        match self {
            Primitive::Ball { center, radius, amplitude } => Primitive::Ball {
                center: *center,
                radius: *radius,
                amplitude: amplitude * factor,
            },
            Primitive::Gaussian { center, width, amplitude } => Primitive::Gaussian {
                center: *center,
                width: *width,
                amplitude: amplitude * factor,
            },
            Primitive::OddY { inner } => Primitive::OddY { inner: Box::new(inner.scaled(factor)) },
        }
    }

    fn translated(&self, shift: Vec3) -> Primitive {
        match self {
            Primitive::Ball { center, radius, amplitude } => Primitive::Ball {
                center: *center + shift,
                radius: *radius,
                amplitude: *amplitude,
            },
            Primitive::Gaussian { center, width, amplitude } => Primitive::Gaussian {
                center: *center + shift,
                width: *width,
                amplitude: *amplitude,
            },
            // Translation and the y-mirror do not commute; only shifts along
            // the detector axis keep OddY phantoms odd. Callers translate by
            // (t, 0, 0) for the covariance checks, which is safe.
            Primitive::OddY { inner } => Primitive::OddY { inner: Box::new(inner.translated(shift)) },
        }
    }

    fn scaled_space(&self, factor: f64) -> Primitive {
        match self {
            Primitive::Ball { center, radius, amplitude } => Primitive::Ball {
                center: *center * factor,
                radius: radius * factor,
                amplitude: *amplitude,
            },
            Primitive::Gaussian { center, width, amplitude } => Primitive::Gaussian {
                center: *center * factor,
                width: width * factor,
                amplitude: *amplitude,
            },
            Primitive::OddY { inner } => Primitive::OddY { inner: Box::new(inner.scaled_space(factor)) },
        }
    }
}

/// Sum of primitives; evaluation is exactly linear in the amplitudes.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AnalyticPhantom {
    pub primitives: Vec<Primitive>,
}

impl AnalyticPhantom {
    pub fn new(primitives: Vec<Primitive>) -> Self {
        AnalyticPhantom { primitives }
    }

    pub fn ball(center: Vec3, radius: f64, amplitude: f64) -> Self {
        AnalyticPhantom::new(vec![Primitive::Ball { center, radius, amplitude }])
    }

    pub fn gaussian(center: Vec3, width: f64, amplitude: f64) -> Self {
        AnalyticPhantom::new(vec![Primitive::Gaussian { center, width, amplitude }])
    }

    pub fn odd_y(inner: Primitive) -> Self {
        AnalyticPhantom::new(vec![Primitive::OddY { inner: Box::new(inner) }])
    }

    pub fn eval(&self, p: Vec3) -> f64 {
        self.primitives.iter().map(|prim| prim.eval(p)).sum()
    }

    /// Bounding box of the (compact) support; `None` for the empty phantom.
    pub fn support_box(&self) -> Option<Aabb> {
        let mut it = self.primitives.iter();
        let first = it.next()?.support_box();
        Some(it.fold(first, |acc, p| acc.union(&p.support_box())))
    }

    pub fn scaled(&self, factor: f64) -> AnalyticPhantom {
        AnalyticPhantom::new(self.primitives.iter().map(|p| p.scaled(factor)).collect())
    }

    pub fn translated(&self, shift: Vec3) -> AnalyticPhantom {
        AnalyticPhantom::new(self.primitives.iter().map(|p| p.translated(shift)).collect())
    }

    /// Spatial dilation about the origin: `f(x) -> f(x / factor)`.
    pub fn scaled_space(&self, factor: f64) -> AnalyticPhantom {
        AnalyticPhantom::new(self.primitives.iter().map(|p| p.scaled_space(factor)).collect())
    }

    /// True when the whole support lies in the open half-space `y > 0`.
    pub fn supported_in_upper_half(&self) -> bool {
        match self.support_box() {
            Some(b) => b.min.y > 0.0,
            None => true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn standard_ball() -> AnalyticPhantom {
        AnalyticPhantom::ball(Vec3::new(0.0, 2.0, 0.0), 0.5, 3.0)
    }

    #[test]
    fn empty_phantom_is_zero() {
        let p = AnalyticPhantom::default();
        assert_eq!(p.eval(Vec3::new(0.3, -1.0, 7.0)), 0.0);
        assert!(p.support_box().is_none());
    }

    #[test]
    fn ball_interior_point() {
        assert_eq!(standard_ball().eval(Vec3::new(0.0, 2.0, 0.0)), 3.0);
        assert_eq!(standard_ball().eval(Vec3::new(0.0, 2.6, 0.0)), 0.0);
    }

    #[test]
    fn odd_reflection() {
        let p = AnalyticPhantom::odd_y(Primitive::Ball {
            center: Vec3::new(0.0, 2.0, 0.0),
            radius: 0.5,
            amplitude: 1.0,
        });
        assert_eq!(p.eval(Vec3::new(0.0, -2.0, 0.0)), -1.0);
        assert_eq!(p.eval(Vec3::new(0.0, 2.0, 0.0)), 1.0);
        assert!(!p.supported_in_upper_half());
    }

    #[test]
    fn gaussian_truncates_to_compact_support() {
        let p = AnalyticPhantom::gaussian(Vec3::ZERO, 0.1, 1.0);
        assert_eq!(p.eval(Vec3::new(0.61, 0.0, 0.0)), 0.0);
        assert!(p.eval(Vec3::new(0.59, 0.0, 0.0)) > 0.0);
        let b = p.support_box().unwrap();
        assert!((b.max.x - 0.6).abs() < 1e-15);
    }

    #[test]
    fn scaling_is_exactly_linear() {
        let p = standard_ball();
        let q = p.scaled(2.5);
        let x = Vec3::new(0.1, 2.2, -0.1);
        assert_eq!(q.eval(x), 2.5 * p.eval(x));
    }
}
