//! Forward transforms: the conical transform over the `(u, beta, s)` lattice,
//! its planar-detector generalization, the weighted ray transform, the
//! spherical sectional transform, and the 2D/3D Radon transforms that the
//! factorization identities reduce to.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::GridSpec;
use crate::geometry::{orthonormal_frame, UnitVec3, Vec3};
use crate::hemifield::{DiskGrid, HemiField};
use crate::lattice::ConeLattice;
use crate::quadrature::{circle_nodes, ray_nodes, CircleNodes};
use crate::volume::Volume;

/// Resolution knobs for every quadrature in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Node count on each delta-constrained circle.
    pub circle_nodes: usize,
    /// Composite midpoint step along rays.
    pub ray_step: f64,
    /// In-plane sampling step for 3D Radon plane integrals.
    pub plane_step: f64,
    /// Chord sampling step for 2D Radon line integrals.
    pub chord_step: f64,
    /// Section count for product rules on S².
    pub sphere_t: usize,
    /// Azimuthal count for product rules on S².
    pub sphere_phi: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            circle_nodes: 256,
            ray_step: 5e-3,
            plane_step: 5e-3,
            chord_step: 5e-3,
            sphere_t: 128,
            sphere_phi: 128,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.circle_nodes < 3 {
            return Err(Error::InvalidInput("circle_nodes must be >= 3".into()));
        }
        if !(self.ray_step > 0.0 && self.plane_step > 0.0 && self.chord_step > 0.0) {
            return Err(Error::InvalidInput("quadrature steps must be positive".into()));
        }
        if self.sphere_t < 2 || self.sphere_phi < 2 {
            return Err(Error::InvalidInput("sphere grid needs n_t, n_phi >= 2".into()));
        }
        Ok(())
    }

    /// Field default: rays step at half the smallest voxel spacing.
    pub fn for_grid(mut self, grid: &GridSpec) -> Self {
        self.ray_step = 0.5 * grid.spacing.x.min(grid.spacing.y).min(grid.spacing.z);
        self
    }
}

/// `int_0^inf r^k f(origin + r alpha) dr` by composite midpoint.
pub fn ray_integral<V: Volume>(
    f: &V,
    origin: Vec3,
    direction: UnitVec3,
    quad: &QuadratureSpec,
    radial_power: i32,
) -> f64 {
    let Some(bbox) = f.support_box() else { return 0.0 };
    let nodes = ray_nodes(origin, direction, &bbox, quad.ray_step);
    let dir = direction.vec();
    let mut acc = 0.0;
    for (&r, &w) in nodes.r_nodes.iter().zip(&nodes.r_weights) {
        let v = f.eval(origin + dir * r);
        if v != 0.0 {
            acc += w * r.powi(radial_power) * v;
        }
    }
    acc
}

/// Weighted ray transform `Pf(u, w) = int_0^inf f((u,0,0) + r w) r dr`.
pub fn weighted_ray<V: Volume>(f: &V, u: f64, direction: UnitVec3, quad: &QuadratureSpec) -> f64 {
    ray_integral(f, Vec3::new(u, 0.0, 0.0), direction, quad, 1)
}

/// One cone sample with arbitrary vertex and axis: the planar-detector
/// transform evaluated at `(u1, u2, axis, s)`. The single-line-detector
/// transform is the restriction `u2 = 0`, axis in the detector plane.
pub fn conical_forward_planar<V: Volume>(
    f: &V,
    u1: f64,
    u2: f64,
    axis: UnitVec3,
    s: f64,
    quad: &QuadratureSpec,
) -> f64 {
    let circle = circle_nodes(axis, s, quad.circle_nodes);
    cone_sample(f, Vec3::new(u1, u2, 0.0), &circle, quad)
}

fn cone_sample<V: Volume>(f: &V, vertex: Vec3, circle: &CircleNodes, quad: &QuadratureSpec) -> f64 {
    let mut acc = 0.0;
    for alpha in &circle.nodes {
        acc += ray_integral(f, vertex, *alpha, quad, 1);
    }
    circle.weight * acc
}

/// Fills a cone lattice with `Cf(u, beta, s)`.
///
/// Work is split over `(beta, s)` pairs, which share circle nodes across all
/// vertices; per-sample sums are sequential so results do not depend on the
/// worker count.
pub fn conical_forward<V: Volume>(
    f: &V,
    mut lattice: ConeLattice,
    quad: &QuadratureSpec,
) -> Result<ConeLattice> {
    quad.validate()?;
    let (nu, nb, ns) = lattice.shape();
    let u_nodes = lattice.u_nodes.clone();
    let pairs: Vec<(usize, usize)> = (0..nb)
        .flat_map(|ib| (0..ns).map(move |is| (ib, is)))
        .collect();
    let columns: Vec<Vec<f64>> = pairs
        .par_iter()
        .map(|&(ib, is)| {
            let axis = UnitVec3::from_beta(lattice.beta_nodes[ib]);
            let circle = circle_nodes(axis, lattice.s_nodes[is], quad.circle_nodes);
            u_nodes
                .iter()
                .map(|&u| cone_sample(f, Vec3::new(u, 0.0, 0.0), &circle, quad))
                .collect()
        })
        .collect();
    for (pair_idx, &(ib, is)) in pairs.iter().enumerate() {
        for iu in 0..nu {
            let idx = lattice.index(iu, ib, is);
            lattice.data[idx] = columns[pair_idx][iu];
        }
    }
    Ok(lattice)
}

/// Spherical sectional transform of an arbitrary hemisphere sampler:
/// `Q phi(beta, s) = (2 pi / n) sum_k phi(alpha_k)` over the section circle.
/// Zero for `|s| > 1`.
pub fn spherical_sectional<F: Fn(UnitVec3) -> f64>(phi: F, beta: f64, s: f64, n: usize) -> f64 {
    if s.abs() > 1.0 {
        return 0.0;
    }
    let circle = circle_nodes(UnitVec3::from_beta(beta), s, n);
    circle.weight * circle.nodes.iter().map(|&a| phi(a)).sum::<f64>()
}

/// Samples `Pf(u, .)` on the upper hemisphere through its disk coordinates.
///
/// Requires the source supported in `y > 0`; the disk rim then carries no
/// signal and the excluded rim band is harmless.
pub fn compute_hemifield<V: Volume>(
    f: &V,
    u: f64,
    grid: DiskGrid,
    quad: &QuadratureSpec,
) -> Result<HemiField> {
    if !f.upper_half() {
        return Err(Error::Hypothesis(
            "hemifield decomposition requires support in the upper half-space y > 0".into(),
        ));
    }
    let indices: Vec<usize> = (0..grid.len()).collect();
    let pf: Vec<f64> = indices
        .par_iter()
        .map(|&idx| {
            let (i, j) = (idx % grid.n, idx / grid.n);
            if !grid.retained(i, j) {
                return 0.0;
            }
            let (y1, y2) = grid.node(i, j);
            let up = (1.0 - (y1 * y1 + y2 * y2)).sqrt();
            let alpha = UnitVec3::new(Vec3::new(y1, up, y2)).expect("disk node off hemisphere");
            weighted_ray(f, u, alpha, quad)
        })
        .collect();
    HemiField::from_pf(u, grid, pf)
}

/// 2D Radon transform of disk samples: line integral over
/// `{y . (cos beta, sin beta) = s}` by midpoint chord quadrature with
/// bilinear interpolation; samples vanish outside the disk.
pub fn radon2(grid: &DiskGrid, values: &[f64], beta: f64, s: f64, chord_step: f64) -> f64 {
    assert!(chord_step > 0.0);
    if s.abs() >= 1.0 {
        return 0.0;
    }
    let half_chord = (1.0 - s * s).sqrt();
    let n = ((2.0 * half_chord) / chord_step).ceil().max(1.0) as usize;
    let h = 2.0 * half_chord / n as f64;
    let (cb, sb) = (beta.cos(), beta.sin());
    let mut acc = 0.0;
    for k in 0..n {
        let t = -half_chord + (k as f64 + 0.5) * h;
        let y1 = s * cb - t * sb;
        let y2 = s * sb + t * cb;
        acc += grid.bilinear(values, y1, y2);
    }
    acc * h
}

/// Plane samples of the 3D Radon transform over a set of directions.
#[derive(Debug, Clone)]
pub struct Radon3Samples {
    pub omega_nodes: Vec<UnitVec3>,
    pub s_nodes: Vec<f64>,
    /// Indexed `(omega, s)`, s fastest.
    pub data: Vec<f64>,
}

impl Radon3Samples {
    pub fn value(&self, iw: usize, is: usize) -> f64 {
        self.data[iw * self.s_nodes.len() + is]
    }

    pub fn slice(&self, iw: usize) -> &[f64] {
        let ns = self.s_nodes.len();
        &self.data[iw * ns..(iw + 1) * ns]
    }
}

/// Plane integral `Rf(omega, s)` by a midpoint product rule over the square
/// spanned by the support's cross-section with the plane.
pub fn radon3_point<V: Volume>(f: &V, omega: UnitVec3, s: f64, plane_step: f64) -> f64 {
    assert!(plane_step > 0.0);
    let Some(bbox) = f.support_box() else { return 0.0 };
    let center = bbox.center();
    let radius = bbox.bounding_radius();
    let offset = center.dot(omega.vec()) - s;
    let cross_sq = radius * radius - offset * offset;
    if cross_sq <= 0.0 {
        return 0.0;
    }
    let rho = cross_sq.sqrt();
    let plane_center = center - omega.vec() * offset;
    let (e1, e2) = orthonormal_frame(omega);
    let n = ((2.0 * rho) / plane_step).ceil().max(1.0) as usize;
    let h = 2.0 * rho / n as f64;
    let mut acc = 0.0;
    for j in 0..n {
        let b = -rho + (j as f64 + 0.5) * h;
        let row_origin = plane_center + e2 * b;
        for i in 0..n {
            let a = -rho + (i as f64 + 0.5) * h;
            acc += f.eval(row_origin + e1 * a);
        }
    }
    acc * h * h
}

/// Radon samples over one direction, all `s_nodes`.
pub fn radon3_slice<V: Volume>(
    f: &V,
    omega: UnitVec3,
    s_nodes: &[f64],
    plane_step: f64,
) -> Vec<f64> {
    s_nodes
        .par_iter()
        .map(|&s| radon3_point(f, omega, s, plane_step))
        .collect()
}

pub fn radon3<V: Volume>(
    f: &V,
    omega_nodes: Vec<UnitVec3>,
    s_nodes: Vec<f64>,
    plane_step: f64,
) -> Radon3Samples {
    let mut data = Vec::with_capacity(omega_nodes.len() * s_nodes.len());
    for &omega in &omega_nodes {
        data.extend(radon3_slice(f, omega, &s_nodes, plane_step));
    }
    Radon3Samples { omega_nodes, s_nodes, data }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantom::{AnalyticPhantom, Primitive};

    fn ball() -> AnalyticPhantom {
        AnalyticPhantom::ball(Vec3::new(0.0, 2.0, 0.0), 0.5, 1.0)
    }

    fn quad() -> QuadratureSpec {
        QuadratureSpec { ray_step: 1e-3, ..QuadratureSpec::default() }
    }

    /// Oracle: entry/exit of a ray against a ball, from the quadratic
    /// `|o + r d - c|^2 = rho^2`.
    fn ray_ball_chord(origin: Vec3, dir: Vec3, center: Vec3, rho: f64) -> Option<(f64, f64)> {
        let oc = origin - center;
        let b = oc.dot(dir);
        let c = oc.norm_squared() - rho * rho;
        let disc = b * b - c;
        if disc <= 0.0 {
            return None;
        }
        let root = disc.sqrt();
        let r1 = (-b - root).max(0.0);
        let r2 = -b + root;
        if r2 <= 0.0 {
            return None;
        }
        Some((r1, r2))
    }

    #[test]
    fn weighted_ray_matches_chord_oracle() {
        let dir = UnitVec3::new(Vec3::new(0.0, 1.0, 0.0)).unwrap();
        let (r1, r2) =
            ray_ball_chord(Vec3::ZERO, dir.vec(), Vec3::new(0.0, 2.0, 0.0), 0.5).unwrap();
        assert_eq!((r1, r2), (1.5, 2.5));
        let oracle = (r2 * r2 - r1 * r1) / 2.0;
        assert_eq!(oracle, 2.0);
        let got = weighted_ray(&ball(), 0.0, dir, &quad());
        assert!((got - oracle).abs() / oracle < 0.002, "{got}");
    }

    #[test]
    fn ray_away_from_support_is_zero() {
        let dir = UnitVec3::new(Vec3::new(0.0, -1.0, 0.0)).unwrap();
        assert_eq!(weighted_ray(&ball(), 0.0, dir, &quad()), 0.0);
    }

    #[test]
    fn weighted_ray_is_exactly_linear() {
        let f = ball();
        let g = f.scaled(2.0);
        let dir = UnitVec3::normalized(Vec3::new(0.05, 1.0, -0.03)).unwrap();
        let q = quad();
        assert_eq!(weighted_ray(&g, 0.1, dir, &q), 2.0 * weighted_ray(&f, 0.1, dir, &q));
    }

    #[test]
    fn zero_volume_forward_is_zero() {
        let lattice = ConeLattice::uniform(-1.0, 1.0, 3, 8, 9).unwrap();
        let out = conical_forward(&AnalyticPhantom::default(), lattice, &quad()).unwrap();
        assert!(out.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn odd_source_annihilates_the_transform() {
        let f = AnalyticPhantom::odd_y(Primitive::Ball {
            center: Vec3::new(0.0, 2.0, 0.0),
            radius: 0.5,
            amplitude: 1.0,
        });
        let lattice = ConeLattice::uniform(-0.5, 0.5, 3, 6, 9).unwrap();
        let out = conical_forward(&f, lattice, &quad()).unwrap();
        let max = out.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max < 1e-10, "max |Cf| = {max}");
    }

    #[test]
    fn refined_quadrature_agrees_at_a_point() {
        // Oracle: the same integral at 4x circle nodes and 4x ray resolution.
        let f = ball();
        let base = QuadratureSpec { circle_nodes: 256, ray_step: 2e-3, ..quad() };
        let fine = QuadratureSpec { circle_nodes: 1024, ray_step: 5e-4, ..quad() };
        let axis = UnitVec3::from_beta(0.0);
        let coarse_v = conical_forward_planar(&f, 0.0, 0.0, axis, 0.0, &base);
        let fine_v = conical_forward_planar(&f, 0.0, 0.0, axis, 0.0, &fine);
        assert!(fine_v > 0.0);
        assert!((coarse_v - fine_v).abs() / fine_v.abs() < 5e-3, "{coarse_v} vs {fine_v}");
    }

    #[test]
    fn planar_restriction_matches_line_transform_bitwise() {
        let f = ball();
        let q = quad();
        let lattice = ConeLattice::uniform(-0.5, 0.5, 3, 4, 9).unwrap();
        let out = conical_forward(&f, lattice, &q).unwrap();
        for (ib, &beta) in out.beta_nodes.iter().enumerate() {
            for (iu, &u) in out.u_nodes.iter().enumerate() {
                for (is, &s) in out.s_nodes.iter().enumerate() {
                    let direct =
                        conical_forward_planar(&f, u, 0.0, UnitVec3::from_beta(beta), s, &q);
                    assert_eq!(direct.to_bits(), out.value(iu, ib, is).to_bits());
                }
            }
        }
    }

    #[test]
    fn planar_transform_translates_along_the_detector() {
        let f = ball();
        let t = 0.25;
        let g = f.translated(Vec3::new(t, 0.0, 0.0));
        let axis = UnitVec3::from_beta(0.3);
        let q = quad();
        let a = conical_forward_planar(&f, 0.125, 0.0, axis, 0.2, &q);
        let b = conical_forward_planar(&g, 0.125 + t, 0.0, axis, 0.2, &q);
        assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn sectional_transform_of_constants_and_sections() {
        use crate::quadrature::TWO_PI;
        // phi == 1 integrates to the circle measure 2 pi
        let v = spherical_sectional(|_| 1.0, 1.1, 0.4, 64);
        assert!((v - TWO_PI).abs() < 1e-12);
        // phi = alpha . axis == s on the section
        let beta = 0.7;
        let axis = UnitVec3::from_beta(beta);
        let v = spherical_sectional(|a| axis.dot(a.vec()), beta, 0.5, 64);
        assert!((v - TWO_PI * 0.5).abs() < 1e-10);
        // out-of-range opening
        assert_eq!(spherical_sectional(|_| 1.0, 0.0, 1.2, 64), 0.0);
    }

    #[test]
    fn hemifield_center_matches_vertical_ray() {
        let f = ball();
        let grid = DiskGrid::new(41).unwrap();
        let h = compute_hemifield(&f, 0.0, grid, &quad()).unwrap();
        let center = grid.index(20, 20);
        assert!((h.pf[center] - 2.0).abs() / 2.0 < 0.002, "{}", h.pf[center]);
        // factor sqrt(1 - 0) = 1 at the center
        assert_eq!(h.pf[center], h.phi[center]);
    }

    #[test]
    fn hemifield_rejects_lower_support() {
        let f = AnalyticPhantom::ball(Vec3::new(0.0, -2.0, 0.0), 0.5, 1.0);
        let grid = DiskGrid::new(17).unwrap();
        assert!(compute_hemifield(&f, 0.0, grid, &quad()).is_err());
    }

    #[test]
    fn hemifield_of_zero_volume_is_zero() {
        let grid = DiskGrid::new(17).unwrap();
        let h = compute_hemifield(&AnalyticPhantom::default(), 0.0, grid, &quad()).unwrap();
        assert!(h.pf.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn radon2_chord_of_disk_indicator() {
        // Oracle: chord length 2 sqrt(rho^2 - s^2) of the rho = 0.5 disk.
        let grid = DiskGrid::new(401).unwrap();
        let rho = 0.5f64;
        let values: Vec<f64> = (0..grid.len())
            .map(|idx| {
                let (i, j) = (idx % grid.n, idx / grid.n);
                let (y1, y2) = grid.node(i, j);
                if y1 * y1 + y2 * y2 <= rho * rho {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        for beta in [0.0, 0.9, 2.3] {
            let got = radon2(&grid, &values, beta, 0.0, 1e-3);
            assert!((got - 1.0).abs() < 0.01, "beta {beta}: {got}");
        }
        // line outside the support radius
        assert_eq!(radon2(&grid, &values, 0.4, 0.9, 1e-3) < 1e-12, true);
        // zero samples
        let zeros = vec![0.0; grid.len()];
        assert_eq!(radon2(&grid, &zeros, 1.0, 0.3, 1e-3), 0.0);
    }

    #[test]
    fn radon3_disk_area_and_mass() {
        let f = ball();
        let omega = UnitVec3::normalized(Vec3::new(0.3, 0.5, -0.2)).unwrap();
        // plane through the center: oracle pi rho^2
        let s_center = omega.dot(Vec3::new(0.0, 2.0, 0.0));
        let area = radon3_point(&f, omega, s_center, 2e-3);
        let oracle = std::f64::consts::PI * 0.25;
        assert!((area - oracle).abs() / oracle < 0.01, "{area}");
        // plane missing the support
        assert_eq!(radon3_point(&f, omega, s_center + 3.0, 2e-3), 0.0);
        // Fubini oracle: int Rf ds = total mass = volume of the ball
        let n = 257;
        let s_nodes: Vec<f64> = (0..n)
            .map(|i| s_center - 0.75 + 1.5 * i as f64 / (n - 1) as f64)
            .collect();
        let slice = radon3_slice(&f, omega, &s_nodes, 2e-3);
        let h = 1.5 / (n - 1) as f64;
        let mut integral = 0.0;
        for (i, v) in slice.iter().enumerate() {
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            integral += w * v * h;
        }
        let mass = 4.0 / 3.0 * std::f64::consts::PI * 0.5f64.powi(3);
        assert!((integral - mass).abs() / mass < 0.01, "{integral} vs {mass}");
    }

    #[test]
    fn radon3_is_even_under_joint_flip() {
        let f = ball();
        let omega = UnitVec3::normalized(Vec3::new(0.2, 0.9, 0.1)).unwrap();
        let neg = UnitVec3::new(-omega.vec()).unwrap();
        let s = omega.dot(Vec3::new(0.0, 2.0, 0.0)) + 0.2;
        let a = radon3_point(&f, omega, s, 2e-3);
        let b = radon3_point(&f, neg, -s, 2e-3);
        assert!(a > 0.0);
        assert!((a - b).abs() / a < 5e-3, "{a} vs {b}");
    }
}
