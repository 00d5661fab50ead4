//! Integration kernels: circle nodes realizing the delta-constrained sphere
//! integral, weighted ray quadrature, and product rules on S².
//!
//! The key identity behind [`circle_nodes`] is the cylindrical area element
//! `dS = dt dphi` on the unit sphere: integrating `g` against
//! `delta(alpha . axis - s)` reduces to the plain phi-integral over the circle
//! at height `t = s`, with no extra Jacobian.

use crate::geometry::{orthonormal_frame, Aabb, UnitVec3, Vec3};

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Equispaced nodes on the circle `{alpha : alpha . axis = s}`.
#[derive(Debug, Clone)]
pub struct CircleNodes {
    pub axis: UnitVec3,
    pub s: f64,
    pub nodes: Vec<UnitVec3>,
    /// Common quadrature weight `2 pi / n`; zero for the empty set.
    pub weight: f64,
}

impl CircleNodes {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Builds `n` equispaced circle nodes `alpha(phi_k) = s axis + sqrt(1-s^2)
/// (cos phi_k e1 + sin phi_k e2)`, `phi_k = 2 pi k / n`.
///
/// `|s| >= 1` yields the empty node set with weight 0, matching the
/// convention that the transform vanishes outside the opening range.
pub fn circle_nodes(axis: UnitVec3, s: f64, n: usize) -> CircleNodes {
    assert!(n >= 3, "circle quadrature needs at least 3 nodes");
    if s.abs() >= 1.0 {
        return CircleNodes { axis, s, nodes: Vec::new(), weight: 0.0 };
    }
    let (e1, e2) = orthonormal_frame(axis);
    let c = (1.0 - s * s).sqrt();
    let a = axis.vec();
    let mut nodes = Vec::with_capacity(n);
    for k in 0..n {
        let phi = TWO_PI * k as f64 / n as f64;
        let v = a * s + (e1 * phi.cos() + e2 * phi.sin()) * c;
        // Unit by construction; renormalization would perturb alpha.axis = s.
        nodes.push(UnitVec3::new(v).expect("circle node drifted off S^2"));
    }
    CircleNodes { axis, s, nodes, weight: TWO_PI / n as f64 }
}

/// Composite midpoint nodes for `int_0^{r_max} . dr` along a half-line.
///
/// `r_max` is the exit distance from `bbox` (zero when the ray misses it, in
/// which case the node set is empty). Midpoints avoid the `r = 0` endpoint
/// where the radial weight vanishes.
#[derive(Debug, Clone)]
pub struct RayNodes {
    pub origin: Vec3,
    pub direction: UnitVec3,
    pub r_nodes: Vec<f64>,
    pub r_weights: Vec<f64>,
}

impl RayNodes {
    pub fn is_empty(&self) -> bool {
        self.r_nodes.is_empty()
    }
}

pub fn ray_nodes(origin: Vec3, direction: UnitVec3, bbox: &Aabb, step: f64) -> RayNodes {
    assert!(step > 0.0, "ray step must be positive");
    let r_max = bbox.ray_exit(origin, direction.vec());
    if r_max == 0.0 {
        return RayNodes { origin, direction, r_nodes: Vec::new(), r_weights: Vec::new() };
    }
    let n = (r_max / step).ceil().max(1.0) as usize;
    let h = r_max / n as f64;
    let r_nodes = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
    RayNodes { origin, direction, r_nodes, r_weights: vec![h; n] }
}

/// Quadrature rule on S² as direction/weight pairs.
pub type SphereRule = Vec<(UnitVec3, f64)>;

/// Product rule on S² in cylindrical coordinates about `axis`:
/// Gauss-Legendre in `t in [-1, 1]`, uniform in `phi`. Weights sum to 4 pi.
pub fn sphere_grid(n_t: usize, n_phi: usize, axis: UnitVec3) -> SphereRule {
    assert!(n_t >= 2 && n_phi >= 2, "sphere grid needs n_t, n_phi >= 2");
    let (t_nodes, t_weights) = gauss_legendre(n_t);
    sphere_rule_from_sections(&t_nodes, &t_weights, n_phi, axis)
}

/// Assembles a cylindrical product rule from explicit section nodes/weights
/// in `t`. Sections with `|t| >= 1` are dropped, mirroring the empty circle
/// convention, so rules built from a full `[-1, 1]` lattice stay consistent
/// with the per-section transforms.
pub fn sphere_rule_from_sections(
    t_nodes: &[f64],
    t_weights: &[f64],
    n_phi: usize,
    axis: UnitVec3,
) -> SphereRule {
    assert_eq!(t_nodes.len(), t_weights.len());
    let mut rule = Vec::new();
    let phi_weight = TWO_PI / n_phi as f64;
    for (&t, &wt) in t_nodes.iter().zip(t_weights) {
        if t.abs() >= 1.0 {
            continue;
        }
        let circle = circle_nodes(axis, t, n_phi.max(3));
        for node in circle.nodes {
            rule.push((node, wt * phi_weight));
        }
    }
    rule
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
///
/// Newton iteration on `P_n` with the usual Chebyshev initial guess; nodes
/// are mirrored in pairs so the rule is exactly symmetric about 0.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    let m = n.div_ceil(2);
    for k in 0..m {
        // k-th root counted from t = 1 downwards
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - k] = x;
        weights[n - 1 - k] = w;
        nodes[k] = -x;
        weights[k] = w;
    }
    if n % 2 == 1 {
        let mid = n / 2;
        nodes[mid] = 0.0;
        let (_, dp) = legendre_with_derivative(n, 0.0);
        weights[mid] = 2.0 / (dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equator_nodes_for_vertical_axis() {
        let axis = UnitVec3::new(Vec3::new(0.0, 0.0, 1.0)).unwrap();
        let c = circle_nodes(axis, 0.0, 4);
        let got: Vec<[f64; 3]> = c.nodes.iter().map(|n| n.vec().into()).collect();
        let expect = [[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, -1.0, 0.0]];
        for (g, e) in got.iter().zip(expect.iter()) {
            for i in 0..3 {
                assert!((g[i] - e[i]).abs() < 1e-15, "{got:?}");
            }
        }
    }

    #[test]
    fn circle_constant_integrates_to_two_pi() {
        // Oracle: int delta(t - s) dt dphi over the sphere = 2 pi.
        let axis = UnitVec3::normalized(Vec3::new(0.2, 0.5, -0.8)).unwrap();
        let c = circle_nodes(axis, 0.3, 64);
        let total: f64 = c.nodes.iter().map(|_| c.weight).sum();
        assert!((total - TWO_PI).abs() < 1e-12);
    }

    #[test]
    fn circle_first_moment_is_two_pi_s() {
        // Oracle: same cylindrical element; the integrand alpha.axis == s on
        // the circle, so the integral is 2 pi s.
        let axis = UnitVec3::from_beta(0.7);
        let s = 0.5;
        let c = circle_nodes(axis, s, 64);
        let total: f64 = c.nodes.iter().map(|n| c.weight * axis.dot(n.vec())).sum();
        assert!((total - TWO_PI * s).abs() < 1e-12, "{total}");
    }

    #[test]
    fn circle_nodes_satisfy_section_constraint() {
        let axis = UnitVec3::normalized(Vec3::new(-0.3, 0.9, 0.1)).unwrap();
        let c = circle_nodes(axis, -0.42, 33);
        for n in &c.nodes {
            assert!((axis.dot(n.vec()) - c.s).abs() < 1e-12);
        }
    }

    #[test]
    fn out_of_range_opening_gives_empty_set() {
        let axis = UnitVec3::from_beta(0.0);
        let c = circle_nodes(axis, 1.0, 16);
        assert!(c.is_empty());
        assert_eq!(c.weight, 0.0);
        assert!(circle_nodes(axis, -1.3, 16).is_empty());
    }

    #[test]
    fn ray_through_unit_box_has_expected_nodes() {
        let bbox = Aabb::new(Vec3::ZERO, Vec3::new(1.0, 1.0, 1.0));
        let dir = UnitVec3::new(Vec3::new(1.0, 0.0, 0.0)).unwrap();
        let r = ray_nodes(Vec3::new(-1.0, 0.5, 0.5), dir, &bbox, 0.25);
        assert_eq!(r.r_nodes.len(), 8);
        let total: f64 = r.r_weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-12);
    }

    #[test]
    fn missing_ray_is_empty() {
        let bbox = Aabb::new(Vec3::ZERO, Vec3::new(1.0, 1.0, 1.0));
        let dir = UnitVec3::new(Vec3::new(0.0, -1.0, 0.0)).unwrap();
        let r = ray_nodes(Vec3::new(-1.0, 0.5, 0.5), dir, &bbox, 0.25);
        assert!(r.is_empty());
    }

    #[test]
    fn sphere_grid_measure_and_moments() {
        let axis = UnitVec3::normalized(Vec3::new(0.1, 0.9, 0.2)).unwrap();
        let rule = sphere_grid(64, 64, axis);
        let mass: f64 = rule.iter().map(|(_, w)| w).sum();
        assert!((mass - 4.0 * std::f64::consts::PI).abs() < 1e-12, "{mass}");
        let first: f64 = rule.iter().map(|(a, w)| w * axis.dot(a.vec())).sum();
        assert!(first.abs() < 1e-12, "{first}");
        // Oracle: int t^2 dt dphi = 2 pi * 2/3 = 4 pi / 3.
        let second: f64 = rule
            .iter()
            .map(|(a, w)| {
                let t = axis.dot(a.vec());
                w * t * t
            })
            .sum();
        assert!(
            (second - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-6,
            "{second}"
        );
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        // degree-15 polynomial t^14 integrates to 2/15
        let val: f64 = x.iter().zip(&w).map(|(&t, &wt)| wt * t.powi(14)).sum();
        assert!((val - 2.0 / 15.0).abs() < 1e-14, "{val}");
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn circle_rule_is_spectrally_exact_for_trig_polynomials() {
        // Equispaced n-point rule integrates e^{i m phi} exactly for |m| < n.
        let axis = UnitVec3::from_beta(1.2);
        let (e1, _e2) = crate::geometry::orthonormal_frame(axis);
        let s = 0.25;
        let n = 16;
        let c = circle_nodes(axis, s, n);
        // integrand: (alpha . e1)^6, a trig polynomial of degree 6 < 16
        let got: f64 = c.nodes.iter().map(|a| c.weight * a.dot(e1).powi(6)).sum();
        // analytic: (1-s^2)^3 * int cos^6 = (1-s^2)^3 * 2 pi * 5/16
        let expect = (1.0 - s * s).powi(3) * TWO_PI * 5.0 / 16.0;
        assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
    }
}
