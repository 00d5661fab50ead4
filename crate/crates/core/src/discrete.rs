//! Dense discretization of the forward cone transform under the partial-data
//! scenarios, and numerical null-space analysis of the result.
//!
//! Columns are the trilinear basis functions of voxels with center `y > 0`;
//! each matrix entry is the exact quadrature weight of that basis function in
//! that cone sample, so `matrix * voxels` reproduces the matrix-free forward
//! transform on the same node sets.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::GridSpec;
use crate::geometry::{UnitVec3, Vec3};
use crate::lattice::ConeLattice;
use crate::quadrature::{circle_nodes, ray_nodes};
use crate::transforms::QuadratureSpec;
use crate::verification::{ray_ball_distance, RegionW, SupportSet};

/// Entry budget for dense assembly.
pub const DEFAULT_MAX_ENTRIES: usize = 10_000_000;

/// Column cap for dense SVD.
pub const MAX_SVD_COLS: usize = 2000;

/// Default relative singular-value threshold for null-space membership:
/// above assembly/quadrature noise (~1e-10), far below the
/// discretization-limited small singular values seen at desk scale.
pub const DEFAULT_NULL_THRESHOLD: f64 = 1e-8;

/// Direction count for the cone-misses-set sampling.
pub const CONE_TEST_DIRECTIONS: usize = 720;

/// Safety margin for the ball case; near-touching cones count as meeting the
/// set so borderline rows are excluded rather than kept inconsistently.
pub const CONE_MISS_MARGIN: f64 = 1e-6;

/// Data-restriction scenarios from the uniqueness theorems.
#[derive(Debug, Clone)]
pub enum Scenario {
    /// Keep every lattice sample.
    Full,
    /// Keep samples whose axis angle lies in the direction set.
    AngleSet { angles: Vec<f64> },
    /// Keep samples whose vertex position lies in the sampled set `A`.
    VertexSet { u_values: Vec<f64> },
    /// Keep samples whose cone misses the closed support set.
    ConesMissing { set: SupportSet },
}

impl Scenario {
    fn retains(&self, u: f64, beta: f64, s: f64) -> bool {
        match self {
            Scenario::Full => true,
            Scenario::AngleSet { angles } => {
                angles.iter().any(|&a| (a - beta).abs() < 1e-12)
            }
            Scenario::VertexSet { u_values } => {
                u_values.iter().any(|&a| (a - u).abs() < 1e-12)
            }
            Scenario::ConesMissing { set } => cone_misses_set(u, beta, s, set),
        }
    }

    fn describe(&self) -> &'static str {
        match self {
            Scenario::Full => "full",
            Scenario::AngleSet { .. } => "angle-set",
            Scenario::VertexSet { .. } => "vertex-set",
            Scenario::ConesMissing { .. } => "cones-missing-support",
        }
    }
}

/// True when the whole cone `(u, beta, s)` stays clear of the closed set,
/// decided by the minimum ray distance over a fine direction sampling.
pub fn cone_misses_set(u: f64, beta: f64, s: f64, set: &SupportSet) -> bool {
    if set.is_empty() {
        return true;
    }
    let vertex = Vec3::new(u, 0.0, 0.0);
    let circle = circle_nodes(UnitVec3::from_beta(beta), s, CONE_TEST_DIRECTIONS);
    match set {
        SupportSet::Ball { center, radius } => circle.nodes.iter().all(|&alpha| {
            ray_ball_distance(vertex, alpha, *center) > radius + CONE_MISS_MARGIN
        }),
        _ => circle.nodes.iter().all(|&alpha| !set.ray_hits(vertex, alpha)),
    }
}

/// Provenance of one retained matrix row.
#[derive(Debug, Clone, Copy)]
pub struct RowInfo {
    pub iu: usize,
    pub ib: usize,
    pub is: usize,
    pub u: f64,
    pub beta: f64,
    pub s: f64,
}

/// Dense restricted forward operator.
#[derive(Debug, Clone)]
pub struct RestrictedOperator {
    pub grid: GridSpec,
    /// Column -> voxel linear index (voxels with center y > 0).
    pub col_map: Vec<usize>,
    pub rows: Vec<RowInfo>,
    /// Scenario label plus sample counts dropped by the mask and the budget.
    pub mask_summary: MaskSummary,
    pub matrix: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct MaskSummary {
    pub scenario: String,
    pub lattice_samples: usize,
    pub masked_by_scenario: usize,
    pub dropped_by_budget: usize,
    pub subsample_stride: usize,
}

impl RestrictedOperator {
    pub fn n_rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols());
        let xv = nalgebra::DVector::from_column_slice(x);
        (&self.matrix * xv).iter().cloned().collect()
    }

    pub fn apply_adjoint(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.n_rows());
        let yv = nalgebra::DVector::from_column_slice(y);
        (self.matrix.transpose() * yv).iter().cloned().collect()
    }

    /// Restriction of a full voxel vector to the retained columns.
    pub fn restrict_voxels(&self, values: &[f64]) -> Vec<f64> {
        self.col_map.iter().map(|&v| values[v]).collect()
    }

    /// Scatter of a column vector back into a full voxel vector.
    pub fn expand_to_voxels(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        for (c, &v) in self.col_map.iter().enumerate() {
            out[v] = x[c];
        }
        out
    }
}

/// Assembles the dense restricted operator for a grid/lattice/mask triple.
///
/// Row order follows the lattice (u outer, then beta, then s) restricted to
/// the mask; when the entry budget is exceeded the retained rows are thinned
/// with a seeded stride so the selection is stratified over the lattice and
/// reproducible.
pub fn assemble(
    grid: &GridSpec,
    lattice: &ConeLattice,
    scenario: &Scenario,
    quad: &QuadratureSpec,
    max_entries: usize,
    seed: u64,
) -> Result<RestrictedOperator> {
    grid.validate()?;
    quad.validate()?;

    let mut voxel_to_col = vec![usize::MAX; grid.len()];
    let mut col_map = Vec::new();
    for idx in 0..grid.len() {
        let (i, j, k) = grid.unravel(idx);
        if grid.center(i, j, k).y > 0.0 {
            voxel_to_col[idx] = col_map.len();
            col_map.push(idx);
        }
    }
    if col_map.is_empty() {
        return Err(Error::InvalidInput(
            "no voxels with center y > 0; the restricted operator has no columns".into(),
        ));
    }

    let (nu, nb, ns) = lattice.shape();
    let mut retained = Vec::new();
    for iu in 0..nu {
        for ib in 0..nb {
            for is in 0..ns {
                let (u, beta, s) =
                    (lattice.u_nodes[iu], lattice.beta_nodes[ib], lattice.s_nodes[is]);
                if scenario.retains(u, beta, s) {
                    retained.push(RowInfo { iu, ib, is, u, beta, s });
                }
            }
        }
    }
    let masked_by_scenario = lattice.len() - retained.len();
    if retained.is_empty() {
        return Err(Error::InvalidInput("scenario mask retains no samples".into()));
    }

    let mut stride = 1usize;
    let mut dropped_by_budget = 0usize;
    let budget_rows = (max_entries / col_map.len()).max(1);
    if retained.len() > budget_rows {
        stride = retained.len().div_ceil(budget_rows);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let offset = rng.random_range(0..stride);
        let before = retained.len();
        retained = retained
            .into_iter()
            .enumerate()
            .filter(|(i, _)| i % stride == offset)
            .map(|(_, r)| r)
            .collect();
        dropped_by_budget = before - retained.len();
    }
    let n_rows = retained.len();
    let n_cols = col_map.len();
    if n_rows
        .checked_mul(n_cols)
        .map(|e| e > max_entries)
        .unwrap_or(true)
    {
        return Err(Error::InvalidInput(format!(
            "operator size {n_rows} x {n_cols} exceeds the {max_entries}-entry budget"
        )));
    }

    let support = grid.support_box();
    let row_data: Vec<Vec<f64>> = retained
        .par_iter()
        .map(|info| {
            let mut row = vec![0.0f64; n_cols];
            let vertex = Vec3::new(info.u, 0.0, 0.0);
            let circle = circle_nodes(UnitVec3::from_beta(info.beta), info.s, quad.circle_nodes);
            for alpha in &circle.nodes {
                let nodes = ray_nodes(vertex, *alpha, &support, quad.ray_step);
                let dir = alpha.vec();
                for (&r, &wr) in nodes.r_nodes.iter().zip(&nodes.r_weights) {
                    let p = vertex + dir * r;
                    let factor = circle.weight * wr * r;
                    grid.trilinear_stencil(p, |voxel, w| {
                        let col = voxel_to_col[voxel];
                        if col != usize::MAX {
                            row[col] += factor * w;
                        }
                    });
                }
            }
            row
        })
        .collect();

    let matrix = DMatrix::from_fn(n_rows, n_cols, |r, c| row_data[r][c]);
    Ok(RestrictedOperator {
        grid: *grid,
        col_map,
        rows: retained,
        mask_summary: MaskSummary {
            scenario: scenario.describe().to_string(),
            lattice_samples: lattice.len(),
            masked_by_scenario,
            dropped_by_budget,
            subsample_stride: stride,
        },
        matrix,
    })
}

/// Singular spectrum plus the numerical null basis at a relative threshold.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    /// Descending singular values.
    pub singular_values: Vec<f64>,
    pub threshold: f64,
    /// Numerical rank: count of `sigma > threshold * sigma_max`.
    pub rank: usize,
    /// Right singular vectors below the threshold, each of length `cols`.
    pub null_basis: Vec<Vec<f64>>,
}

impl SpectrumReport {
    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    pub fn sigma_min(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }

    /// `sigma_min / sigma_max`; zero for an empty or zero spectrum.
    pub fn spectral_ratio(&self) -> f64 {
        let max = self.sigma_max();
        if max == 0.0 {
            0.0
        } else {
            self.sigma_min() / max
        }
    }
}

/// Full dense SVD of the restricted operator.
pub fn svd_nullspace(op: &RestrictedOperator, threshold: f64) -> Result<SpectrumReport> {
    if !op.matrix.iter().all(|v| v.is_finite()) {
        return Err(Error::Numerical("operator contains non-finite entries".into()));
    }
    if op.n_cols() > MAX_SVD_COLS {
        return Err(Error::InvalidInput(format!(
            "dense SVD capped at {MAX_SVD_COLS} columns, got {}",
            op.n_cols()
        )));
    }
    if op.n_rows() < op.n_cols() {
        return Err(Error::InvalidInput(
            "null-space analysis needs at least as many rows as columns".into(),
        ));
    }
    let svd = op.matrix.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap()
    });
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let sigma_max = singular_values.first().copied().unwrap_or(0.0);
    let cut = threshold * sigma_max;
    let rank = singular_values.iter().filter(|&&s| s > cut).count();
    let null_basis: Vec<Vec<f64>> = order[rank..]
        .iter()
        .map(|&i| v_t.row(i).iter().cloned().collect())
        .collect();
    Ok(SpectrumReport { singular_values, threshold, rank, null_basis })
}

/// Energy fraction outside `W` for each null vector:
/// `sum_{voxels outside W} v_i^2 / sum v_i^2`.
pub fn nullspace_support(
    report: &SpectrumReport,
    w: &RegionW,
    op: &RestrictedOperator,
) -> Vec<f64> {
    let outside: Vec<bool> = op
        .col_map
        .iter()
        .map(|&voxel| {
            let (i, j, k) = op.grid.unravel(voxel);
            !crate::verification::region_w_membership(w, op.grid.center(i, j, k))
        })
        .collect();
    report
        .null_basis
        .iter()
        .map(|v| {
            let total: f64 = v.iter().map(|x| x * x).sum();
            if total == 0.0 {
                return 0.0;
            }
            let out: f64 = v
                .iter()
                .zip(&outside)
                .filter(|(_, &o)| o)
                .map(|(x, _)| x * x)
                .sum();
            out / total
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rasterize;
    use crate::phantom::AnalyticPhantom;
    use crate::transforms::conical_forward;

    fn small_grid() -> GridSpec {
        GridSpec::new(
            Vec3::new(-0.75, 1.25, -0.75),
            Vec3::new(0.25, 0.25, 0.25),
            [6, 6, 6],
        )
        .unwrap()
    }

    fn quad() -> QuadratureSpec {
        QuadratureSpec { circle_nodes: 64, ray_step: 0.125, ..Default::default() }
    }

    #[test]
    fn zero_vector_maps_to_zero() {
        let grid = small_grid();
        let lattice = ConeLattice::uniform(-0.5, 0.5, 2, 4, 5).unwrap();
        let op = assemble(&grid, &lattice, &Scenario::Full, &quad(), DEFAULT_MAX_ENTRIES, 42)
            .unwrap();
        let y = op.apply(&vec![0.0; op.n_cols()]);
        assert!(y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn matrix_reproduces_matrix_free_forward() {
        let grid = small_grid();
        let phantom = AnalyticPhantom::ball(Vec3::new(0.0, 2.0, 0.0), 0.45, 1.0);
        let field = rasterize(&phantom, grid).unwrap();
        let lattice = ConeLattice::uniform(-0.5, 0.5, 3, 6, 9).unwrap();
        let q = quad();
        let op =
            assemble(&grid, &lattice, &Scenario::Full, &q, DEFAULT_MAX_ENTRIES, 42).unwrap();
        let x = op.restrict_voxels(&field.values);
        let by_matrix = op.apply(&x);
        let by_transform = conical_forward(&field, lattice, &q).unwrap();
        let scale = by_transform
            .data
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(1e-30);
        for (row, &mv) in op.rows.iter().zip(&by_matrix) {
            let tv = by_transform.value(row.iu, row.ib, row.is);
            assert!(
                (mv - tv).abs() / scale < 1e-10,
                "row ({},{},{}): {mv} vs {tv}",
                row.iu,
                row.ib,
                row.is
            );
        }
    }

    #[test]
    fn adjoint_consistency() {
        let grid = small_grid();
        let lattice = ConeLattice::uniform(-0.5, 0.5, 2, 5, 7).unwrap();
        let op = assemble(&grid, &lattice, &Scenario::Full, &quad(), DEFAULT_MAX_ENTRIES, 42)
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x: Vec<f64> = (0..op.n_cols()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..op.n_rows()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ax: f64 = op.apply(&x).iter().zip(&y).map(|(a, b)| a * b).sum();
        let aty: f64 = op.apply_adjoint(&y).iter().zip(&x).map(|(a, b)| a * b).sum();
        let scale = ax.abs().max(aty.abs()).max(1.0);
        assert!((ax - aty).abs() / scale < 1e-12);
    }

    #[test]
    fn cone_through_center_meets_cone_away_misses() {
        let set = SupportSet::ball(Vec3::new(0.0, 2.0, 0.0), 0.5);
        // axis straight at the ball, narrow cone: meets
        let beta_up = std::f64::consts::FRAC_PI_2; // axis (0, 0, 1)... beta is in the xz-plane
        // a cone about the z-axis with s = 0.99 (half-angle ~8 deg) misses
        // the ball sitting 90 degrees away on the y-axis
        assert!(cone_misses_set(0.0, beta_up, 0.99, &set));
        // opening to s = 0 the cone contains the y-axis direction: meets
        assert!(!cone_misses_set(0.0, beta_up, 0.0, &set));
        // empty set: always misses
        assert!(cone_misses_set(0.0, 1.0, 0.5, &SupportSet::Empty));
    }

    #[test]
    fn zero_matrix_has_full_null_space() {
        let grid = small_grid();
        let op = RestrictedOperator {
            grid,
            col_map: vec![0, 1, 2, 3],
            rows: Vec::new(),
            mask_summary: MaskSummary {
                scenario: "synthetic".into(),
                lattice_samples: 0,
                masked_by_scenario: 0,
                dropped_by_budget: 0,
                subsample_stride: 1,
            },
            matrix: DMatrix::zeros(6, 4),
        };
        let report = svd_nullspace(&op, 1e-8).unwrap();
        assert_eq!(report.rank, 0);
        assert_eq!(report.null_basis.len(), 4);
    }

    #[test]
    fn identity_like_operator_has_full_rank() {
        let grid = small_grid();
        let n = 5;
        let mut m = DMatrix::zeros(8, n);
        for i in 0..n {
            m[(i, i)] = 1.0 + 0.1 * i as f64;
        }
        m[(6, 0)] = 1e-13; // assembly-noise-sized off-diagonal
        let op = RestrictedOperator {
            grid,
            col_map: (0..n).collect(),
            rows: Vec::new(),
            mask_summary: MaskSummary {
                scenario: "synthetic".into(),
                lattice_samples: 0,
                masked_by_scenario: 0,
                dropped_by_budget: 0,
                subsample_stride: 1,
            },
            matrix: m,
        };
        let report = svd_nullspace(&op, 1e-8).unwrap();
        assert_eq!(report.rank, n);
        assert!(report.null_basis.is_empty());
    }

    #[test]
    fn budget_subsampling_is_deterministic_and_stratified() {
        let grid = small_grid();
        let lattice = ConeLattice::uniform(-0.5, 0.5, 3, 6, 9).unwrap();
        let q = quad();
        let budget = 40 * grid.len(); // forces thinning
        let a = assemble(&grid, &lattice, &Scenario::Full, &q, budget, 42).unwrap();
        let b = assemble(&grid, &lattice, &Scenario::Full, &q, budget, 42).unwrap();
        assert_eq!(a.n_rows(), b.n_rows());
        assert_eq!(a.matrix, b.matrix);
        assert!(a.mask_summary.dropped_by_budget > 0);
        assert!(a.mask_summary.subsample_stride > 1);
    }

    #[test]
    fn more_rows_never_grow_the_null_space() {
        let grid = GridSpec::new(
            Vec3::new(-0.5, 1.5, -0.5),
            Vec3::new(0.25, 0.25, 0.25),
            [4, 4, 4],
        )
        .unwrap();
        let lattice = ConeLattice::uniform(-0.75, 0.75, 4, 8, 9).unwrap();
        let op = assemble(&grid, &lattice, &Scenario::Full, &quad(), DEFAULT_MAX_ENTRIES, 42)
            .unwrap();
        let full = svd_nullspace(&op, 1e-8).unwrap();
        // drop the last quarter of the rows
        let keep = op.n_rows() * 3 / 4;
        let sub = RestrictedOperator {
            matrix: op.matrix.rows(0, keep).into_owned(),
            rows: op.rows[..keep].to_vec(),
            ..op.clone()
        };
        let partial = svd_nullspace(&sub, 1e-8).unwrap();
        assert!(full.null_basis.len() <= partial.null_basis.len());
    }
}
