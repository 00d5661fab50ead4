//! Computable consequences of the partial-data uniqueness arguments: Fourier
//! transform in the opening variable, angular and Radon moments, the
//! Cauchy-kernel identity chain, direction-set nondegeneracy, visibility caps
//! and the reachable region `W`.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::ScalarField3;
use crate::geometry::{Aabb, UnitVec3, Vec3};
use crate::lattice::{is_uniform_partition, ConeLattice};
use crate::quadrature::{sphere_grid, sphere_rule_from_sections, SphereRule};
use crate::transforms::{radon3_slice, ray_integral, QuadratureSpec};
use crate::volume::Volume;

/// Angular tolerance for membership in the reachable region `W`.
pub const TAU_W: f64 = 1e-3;

/// s-node count used for the Radon side of the Cauchy-kernel identity.
const CAUCHY_S_NODES: usize = 513;

/// Trapezoid weights for possibly endpoint-inclusive uniform nodes.
fn trapezoid_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let h = nodes[i + 1] - nodes[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

/// Discrete `int Cf(u, beta, s) e^{-i sigma s} ds` by the trapezoid rule over
/// the lattice's s-range; the transform vanishes outside `[-1, 1]` so no tail
/// correction applies. Rejects non-uniform s-nodes.
pub fn fourier_in_s(
    lattice: &ConeLattice,
    iu: usize,
    ib: usize,
    sigma_nodes: &[f64],
) -> Result<Vec<Complex64>> {
    let sn = &lattice.s_nodes;
    if sn.len() < 2 {
        return Err(Error::InvalidInput("need at least two s-nodes".into()));
    }
    let lo = sn[0];
    let hi = sn[sn.len() - 1];
    if !is_uniform_partition(sn, lo, hi, true) {
        return Err(Error::InvalidInput(
            "fourier_in_s requires uniform s-nodes".into(),
        ));
    }
    let w = trapezoid_weights(sn);
    Ok(sigma_nodes
        .iter()
        .map(|&sigma| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (is, (&s, &wi)) in sn.iter().zip(&w).enumerate() {
                let v = lattice.value(iu, ib, is);
                acc += Complex64::from_polar(wi * v, -sigma * s);
            }
            acc
        })
        .collect())
}

/// Prefactor-free angular moment
/// `int_{S^2} int_0^inf f((u,0,0) + r alpha) (alpha . (t1, 0, t2))^j r dr dS`.
///
/// The `(-i sigma)^j / j!` prefactor of the Fourier-series expansion is
/// applied only in [`fourier_series_from_moments`], which keeps the stored
/// moment exactly homogeneous of degree `j` in `theta`.
pub fn moment_a<V: Volume>(
    f: &V,
    j: u32,
    u: f64,
    theta: [f64; 2],
    rule: &SphereRule,
    quad: &QuadratureSpec,
) -> f64 {
    let vertex = Vec3::new(u, 0.0, 0.0);
    let theta3 = Vec3::new(theta[0], 0.0, theta[1]);
    let mut acc = 0.0;
    for &(alpha, w) in rule {
        let p = ray_integral(f, vertex, alpha, quad, 1);
        if p != 0.0 {
            acc += w * alpha.dot(theta3).powi(j as i32) * p;
        }
    }
    acc
}

/// Default sphere rule for angular moments, oriented along the support
/// half-space axis.
pub fn default_moment_rule(quad: &QuadratureSpec) -> SphereRule {
    let axis = UnitVec3::new(Vec3::new(0.0, 1.0, 0.0)).expect("unit axis");
    sphere_grid(quad.sphere_t, quad.sphere_phi, axis)
}

/// Cylindrical sphere rule whose sections coincide with a uniform s-lattice
/// carrying trapezoid weights, and whose azimuthal nodes are the shared
/// circle nodes. Built this way, the discrete Fourier transform in `s` of the
/// lattice data and the discrete moment series are algebraic rearrangements
/// of one another, so they agree to series-truncation accuracy.
pub fn lattice_aligned_sphere_rule(
    s_nodes: &[f64],
    n_phi: usize,
    axis: UnitVec3,
) -> Result<SphereRule> {
    if s_nodes.len() < 2 {
        return Err(Error::InvalidInput("need at least two s-nodes".into()));
    }
    let lo = s_nodes[0];
    let hi = s_nodes[s_nodes.len() - 1];
    if !is_uniform_partition(s_nodes, lo, hi, true) {
        return Err(Error::InvalidInput("aligned rule requires uniform s-nodes".into()));
    }
    let w = trapezoid_weights(s_nodes);
    Ok(sphere_rule_from_sections(s_nodes, &w, n_phi, axis))
}

/// Fourier-series reconstruction `sum_j (-i sigma)^j / j! m_j`, including the
/// `j = 0` term of the exponential expansion.
pub fn fourier_series_from_moments(moments: &[f64], sigma: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut coeff = Complex64::new(1.0, 0.0); // (-i sigma)^j / j!
    for (j, &m) in moments.iter().enumerate() {
        if j > 0 {
            coeff *= Complex64::new(0.0, -sigma) / j as f64;
        }
        acc += coeff * m;
    }
    acc
}

/// Radon moment `p_j(omega) = int Rf(omega, s) s^j ds` by the trapezoid rule.
pub fn moment_p(s_nodes: &[f64], radon_slice: &[f64], j: u32) -> Result<f64> {
    if s_nodes.len() != radon_slice.len() {
        return Err(Error::InvalidInput("s-node/data length mismatch".into()));
    }
    if s_nodes.len() < 2 {
        return Err(Error::InvalidInput("need at least two s-nodes".into()));
    }
    let w = trapezoid_weights(s_nodes);
    Ok(s_nodes
        .iter()
        .zip(radon_slice)
        .zip(&w)
        .map(|((&s, &v), &wi)| wi * v * s.powi(j as i32))
        .sum())
}

/// Ray moment `int_0^inf r^k f(a + r alpha) dr`, `k >= 1`.
pub fn ray_moment<V: Volume>(
    f: &V,
    k: u32,
    a: Vec3,
    alpha: UnitVec3,
    quad: &QuadratureSpec,
) -> f64 {
    assert!(k >= 1, "ray moments are defined for k >= 1");
    ray_integral(f, a, alpha, quad, k as i32)
}

/// Both sides of the Cauchy-kernel identity plus the truncated power series,
/// all in the shifted coordinates where the vertex is `(u, 0, -1)`.
#[derive(Debug, Clone)]
pub struct CauchyChain {
    /// `int_{S^2} Pf(u, alpha) / (alpha . omega) dS(alpha)`.
    pub lhs: f64,
    /// `int Rf(omega, s) / (s - (u,0,-1) . omega) ds`.
    pub rhs: f64,
    pub residual: f64,
    /// Partial sums `-sum_{j<=J} c^{-1-j} p_j(omega)` for `J = 0..=j_max`.
    pub series_partial_sums: Vec<f64>,
    /// Raw Radon moments `p_j(omega)` for `j = 0..=j_max`.
    pub radon_moments: Vec<f64>,
    /// Support margin `eps` with `f = 0` for `|x| > 1 - 2 eps`.
    pub margin: f64,
}

fn support_max_norm(bbox: &Aabb) -> f64 {
    let mut best = 0.0f64;
    for &x in &[bbox.min.x, bbox.max.x] {
        for &y in &[bbox.min.y, bbox.max.y] {
            for &z in &[bbox.min.z, bbox.max.z] {
                best = best.max(Vec3::new(x, y, z).norm());
            }
        }
    }
    best
}

/// Evaluates the identity chain for a source supported in the unit ball.
///
/// Hypothesis validated before computing: with `m = max |x|` over the
/// support and `eps = (1 - m) / 2`, requires `eps > 0` and
/// `(u, 0, -1) . omega > 1 - eps`; violations report the failing margin.
pub fn cauchy_chain<V: Volume>(
    f: &V,
    u: f64,
    omega: UnitVec3,
    j_max: u32,
    quad: &QuadratureSpec,
) -> Result<CauchyChain> {
    let vertex = Vec3::new(u, 0.0, -1.0);
    let c = omega.dot(vertex);
    let (eps, axis) = match f.support_box() {
        Some(bbox) => {
            let m = support_max_norm(&bbox);
            let eps = (1.0 - m) / 2.0;
            if eps <= 0.0 {
                return Err(Error::Hypothesis(format!(
                    "support must sit strictly inside the unit ball: max |x| = {m:.6} (margin {:.3e})",
                    1.0 - m
                )));
            }
            let axis = UnitVec3::normalized(bbox.center() - vertex)
                .unwrap_or_else(|_| UnitVec3::new(Vec3::new(0.0, 1.0, 0.0)).unwrap());
            (eps, axis)
        }
        None => (0.5, omega),
    };
    if c <= 1.0 - eps {
        return Err(Error::Hypothesis(format!(
            "(u,0,-1) . omega = {c:.6} must exceed 1 - eps = {:.6} (margin {:.3e})",
            1.0 - eps,
            c - (1.0 - eps)
        )));
    }

    // Left side: sphere quadrature of Pf / (alpha . omega), poles avoided
    // because the hypothesis keeps alpha . omega bounded away from zero on
    // the support of Pf.
    let rule = sphere_grid(quad.sphere_t, quad.sphere_phi, axis);
    let mut lhs = 0.0;
    for &(alpha, w) in &rule {
        let p = ray_integral(f, vertex, alpha, quad, 1);
        if p != 0.0 {
            lhs += w * p / alpha.dot(omega.vec());
        }
    }

    // Right side and moments share one Radon slice.
    let m = 1.0 - 2.0 * eps;
    let pad = 0.02;
    let s_nodes: Vec<f64> = (0..CAUCHY_S_NODES)
        .map(|i| -m - pad + (2.0 * (m + pad)) * i as f64 / (CAUCHY_S_NODES - 1) as f64)
        .collect();
    let slice = radon3_slice(f, omega, &s_nodes, quad.plane_step);
    let w = trapezoid_weights(&s_nodes);
    let rhs: f64 = s_nodes
        .iter()
        .zip(&slice)
        .zip(&w)
        .map(|((&s, &v), &wi)| wi * v / (s - c))
        .sum();

    let mut radon_moments = Vec::with_capacity(j_max as usize + 1);
    let mut series_partial_sums = Vec::with_capacity(j_max as usize + 1);
    let mut partial = 0.0;
    for j in 0..=j_max {
        let p_j = moment_p(&s_nodes, &slice, j)?;
        partial -= c.powi(-1 - j as i32) * p_j;
        radon_moments.push(p_j);
        series_partial_sums.push(partial);
    }

    let residual = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-30);
    Ok(CauchyChain { lhs, rhs, residual, series_partial_sums, radon_moments, margin: eps })
}

/// `(lhs, rhs, residual)` of the Cauchy-kernel identity.
pub fn cauchy_identity_residual<V: Volume>(
    f: &V,
    u: f64,
    omega: UnitVec3,
    quad: &QuadratureSpec,
) -> Result<(f64, f64, f64)> {
    let chain = cauchy_chain(f, u, omega, 0, quad)?;
    Ok((chain.lhs, chain.rhs, chain.residual))
}

/// Directions on S¹; the degree-bounded surrogate of "no nontrivial
/// homogeneous polynomial vanishes here" is a Vandermonde rank check.
#[derive(Debug, Clone)]
pub struct DirectionSet2 {
    pub angles: Vec<f64>,
}

impl DirectionSet2 {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        use crate::quadrature::TWO_PI;
        for (i, &a) in angles.iter().enumerate() {
            if !(0.0..TWO_PI).contains(&a) {
                return Err(Error::InvalidInput("angles must lie in [0, 2 pi)".into()));
            }
            for &b in &angles[..i] {
                if (a - b).abs() < 1e-12 {
                    return Err(Error::InvalidInput(
                        "angles must be pairwise distinct".into(),
                    ));
                }
            }
        }
        Ok(DirectionSet2 { angles })
    }

    /// `n` equispaced angles over `[0, pi)`: projectively distinct.
    pub fn equispaced_projective(n: usize) -> Self {
        DirectionSet2 {
            angles: (0..n).map(|k| std::f64::consts::PI * k as f64 / n as f64).collect(),
        }
    }
}

/// Per-degree ranks of the matrices `[cos^{j-m} beta sin^m beta]` and the
/// nondegeneracy flag (rank `j + 1` for every `j <= d`).
///
/// A degree-j binary homogeneous polynomial vanishing at `j + 1` projectively
/// distinct directions vanishes identically, so full rank at every degree up
/// to `d` certifies the hypothesis through degree `d`.
pub fn direction_set_rank(set: &DirectionSet2, d: usize) -> (Vec<usize>, bool) {
    let n = set.angles.len();
    let mut ranks = Vec::with_capacity(d + 1);
    for j in 0..=d {
        let cols = j + 1;
        let mut m = nalgebra::DMatrix::<f64>::zeros(n, cols);
        for (i, &beta) in set.angles.iter().enumerate() {
            let (c, s) = (beta.cos(), beta.sin());
            for k in 0..cols {
                m[(i, k)] = c.powi((j - k) as i32) * s.powi(k as i32);
            }
        }
        let svd = m.svd(false, false);
        let sigma_max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
        let tol = sigma_max * 1e-10;
        let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
        ranks.push(rank);
    }
    let nondegenerate = ranks.iter().enumerate().all(|(j, &r)| r == j + 1);
    (ranks, nondegenerate)
}

/// Closed support set the visibility machinery reasons about.
#[derive(Debug, Clone)]
pub enum SupportSet {
    Ball { center: Vec3, radius: f64 },
    /// Nonzero voxels of a field, tested by ray-box intersection.
    Voxels { grid: crate::field::GridSpec, occupied: Vec<bool> },
    Empty,
}

impl SupportSet {
    pub fn ball(center: Vec3, radius: f64) -> Self {
        SupportSet::Ball { center, radius }
    }

    pub fn from_field(field: &ScalarField3) -> Self {
        let occupied: Vec<bool> = field.values.iter().map(|&v| v != 0.0).collect();
        if occupied.iter().any(|&o| o) {
            SupportSet::Voxels { grid: field.grid, occupied }
        } else {
            SupportSet::Empty
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, SupportSet::Empty)
    }

    pub fn contains(&self, p: Vec3) -> bool {
        match self {
            SupportSet::Ball { center, radius } => {
                (p - *center).norm_squared() <= radius * radius
            }
            SupportSet::Voxels { grid, occupied } => {
                for (idx, &occ) in occupied.iter().enumerate() {
                    if !occ {
                        continue;
                    }
                    let (i, j, k) = grid.unravel(idx);
                    let c = grid.center(i, j, k);
                    let h = grid.spacing * 0.5;
                    if (p.x - c.x).abs() <= h.x
                        && (p.y - c.y).abs() <= h.y
                        && (p.z - c.z).abs() <= h.z
                    {
                        return true;
                    }
                }
                false
            }
            SupportSet::Empty => false,
        }
    }

    /// Does the half-line `origin + r alpha`, `r >= 0`, meet the closure?
    pub fn ray_hits(&self, origin: Vec3, alpha: UnitVec3) -> bool {
        match self {
            SupportSet::Ball { center, radius } => {
                ray_ball_distance(origin, alpha, *center) <= *radius
            }
            SupportSet::Voxels { grid, occupied } => {
                let bbox = grid.bounding_box();
                if bbox.ray_exit(origin, alpha.vec()) == 0.0 && !bbox.contains(origin) {
                    return false;
                }
                for (idx, &occ) in occupied.iter().enumerate() {
                    if !occ {
                        continue;
                    }
                    let (i, j, k) = grid.unravel(idx);
                    let c = grid.center(i, j, k);
                    let h = grid.spacing * 0.5;
                    let vox = Aabb::new(c - h, c + h);
                    if vox.contains(origin) || vox.ray_exit(origin, alpha.vec()) > 0.0 {
                        return true;
                    }
                }
                false
            }
            SupportSet::Empty => false,
        }
    }
}

/// Distance from the half-line `origin + r alpha`, `r >= 0`, to a point.
pub fn ray_ball_distance(origin: Vec3, alpha: UnitVec3, point: Vec3) -> f64 {
    let d = point - origin;
    let along = d.dot(alpha.vec());
    if along <= 0.0 {
        d.norm()
    } else {
        (d - alpha.vec() * along).norm()
    }
}

/// Sampled visibility cap `S(u)`: directions whose half-line from `(u,0,0)`
/// meets the closed support. Ball supports use the closed-form ray distance
/// test; voxel supports use ray-box intersection.
pub fn visible_directions(
    set: &SupportSet,
    u: f64,
    n_t: usize,
    n_phi: usize,
) -> Result<Vec<UnitVec3>> {
    let vertex = Vec3::new(u, 0.0, 0.0);
    if set.contains(vertex) {
        return Err(Error::InvalidInput(format!(
            "vertex (u = {u}) lies inside the support closure"
        )));
    }
    let axis = match set {
        SupportSet::Ball { center, .. } => UnitVec3::normalized(*center - vertex)?,
        SupportSet::Voxels { grid, .. } => {
            UnitVec3::normalized(grid.bounding_box().center() - vertex)?
        }
        SupportSet::Empty => UnitVec3::new(Vec3::new(0.0, 1.0, 0.0)).unwrap(),
    };
    let rule = sphere_grid(n_t, n_phi, axis);
    Ok(rule
        .into_iter()
        .filter(|(alpha, _)| set.ray_hits(vertex, *alpha))
        .map(|(alpha, _)| alpha)
        .collect())
}

/// The reachable region `W`: half-lines from sampled vertices through the
/// union of the per-vertex visibility caps.
#[derive(Debug, Clone)]
pub struct RegionW {
    pub vertices: Vec<f64>,
    cap: CapSet,
}

#[derive(Debug, Clone)]
enum CapSet {
    /// Exact caps `angle(alpha, axis_v) <= half_angle_v` from ball supports.
    BallCaps { axes: Vec<UnitVec3>, half_angles: Vec<f64> },
    /// Nearest-sample inclusion at resolution-aware tolerance.
    Sampled { dirs: Vec<UnitVec3>, resolution: f64 },
    Everything,
}

impl RegionW {
    /// Caps of a ball support seen from each vertex in `vertices`.
    pub fn from_ball(vertices: Vec<f64>, center: Vec3, radius: f64) -> Result<Self> {
        let mut axes = Vec::with_capacity(vertices.len());
        let mut half_angles = Vec::with_capacity(vertices.len());
        for &v in &vertices {
            let d = center - Vec3::new(v, 0.0, 0.0);
            let dist = d.norm();
            if dist <= radius {
                return Err(Error::InvalidInput(format!(
                    "vertex u = {v} lies inside the support closure"
                )));
            }
            axes.push(UnitVec3::normalized(d)?);
            half_angles.push((radius / dist).asin());
        }
        Ok(RegionW { vertices, cap: CapSet::BallCaps { axes, half_angles } })
    }

    /// Generic sampled cap; `resolution` is the angular spacing of `dirs` and
    /// widens the inclusion tolerance accordingly.
    pub fn from_sampled_cap(vertices: Vec<f64>, dirs: Vec<UnitVec3>, resolution: f64) -> Self {
        RegionW { vertices, cap: CapSet::Sampled { dirs, resolution } }
    }

    /// Region covering all of space (an unbounded cap), mostly for tests.
    pub fn everything(vertices: Vec<f64>) -> Self {
        RegionW { vertices, cap: CapSet::Everything }
    }

    fn cap_contains(&self, dir: UnitVec3, tol: f64) -> bool {
        match &self.cap {
            CapSet::BallCaps { axes, half_angles } => axes
                .iter()
                .zip(half_angles)
                .any(|(&axis, &half)| {
                    let angle = axis.dot(dir.vec()).clamp(-1.0, 1.0).acos();
                    angle <= half + tol
                }),
            CapSet::Sampled { dirs, resolution } => dirs.iter().any(|&d| {
                let angle = d.dot(dir.vec()).clamp(-1.0, 1.0).acos();
                angle <= tol + resolution
            }),
            CapSet::Everything => true,
        }
    }

    /// Membership with angular tolerance `tol` (radians).
    pub fn contains_with_tol(&self, x: Vec3, tol: f64) -> bool {
        for &v in &self.vertices {
            let d = x - Vec3::new(v, 0.0, 0.0);
            let r = d.norm();
            if r == 0.0 {
                return true;
            }
            let dir = UnitVec3::normalized(d).expect("nonzero direction");
            if self.cap_contains(dir, tol) {
                return true;
            }
        }
        false
    }
}

/// `x in W` at the default angular tolerance [`TAU_W`].
pub fn region_w_membership(w: &RegionW, x: Vec3) -> bool {
    w.contains_with_tol(x, TAU_W)
}

/// Convexity check for the disk projection `S'(u)` of a sampled cap.
///
/// Out-of-cap samples must stay outside the convex hull of the in-cap
/// projections, and disk midpoints of in-cap pairs must satisfy the
/// visibility predicate; a nonconvex region fails one of the two.
pub fn disk_projection_is_convex(set: &SupportSet, u: f64, n_t: usize, n_phi: usize) -> Result<bool> {
    let vertex = Vec3::new(u, 0.0, 0.0);
    if set.contains(vertex) {
        return Err(Error::InvalidInput("vertex lies inside the support closure".into()));
    }
    let axis = match set {
        SupportSet::Ball { center, .. } => UnitVec3::normalized(*center - vertex)?,
        _ => UnitVec3::new(Vec3::new(0.0, 1.0, 0.0)).unwrap(),
    };
    let rule = sphere_grid(n_t, n_phi, axis);
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    for (alpha, _) in rule {
        let a = alpha.vec();
        if a.y <= 0.0 {
            continue;
        }
        let p = (a.x, a.z);
        if set.ray_hits(vertex, alpha) {
            inside.push(p);
        } else {
            outside.push(p);
        }
    }
    if inside.len() < 3 {
        return Ok(true); // nothing to be nonconvex about
    }
    let hull = convex_hull(&inside);
    let margin = 1e-9;
    for &p in &outside {
        if point_strictly_inside_hull(&hull, p, margin) {
            return Ok(false);
        }
    }
    // midpoints of in-cap pairs (subsampled) must still be visible
    let stride = (inside.len() / 64).max(1);
    for (ia, &a) in inside.iter().step_by(stride).enumerate() {
        for &b in inside.iter().skip(ia * stride).step_by(stride) {
            let mid = ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0);
            let r2 = mid.0 * mid.0 + mid.1 * mid.1;
            if r2 >= 1.0 {
                continue;
            }
            let alpha =
                UnitVec3::new(Vec3::new(mid.0, (1.0 - r2).sqrt(), mid.1)).expect("disk lift");
            if !set.ray_hits(vertex, alpha) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Andrew monotone chain; returns hull vertices in counterclockwise order.
fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn point_strictly_inside_hull(hull: &[(f64, f64)], p: (f64, f64), margin: f64) -> bool {
    if hull.len() < 3 {
        return false;
    }
    for i in 0..hull.len() {
        let a = hull[i];
        let b = hull[(i + 1) % hull.len()];
        let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
        if cross <= margin {
            return false;
        }
    }
    true
}
