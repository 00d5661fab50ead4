//! Constructive inversion: recover the disk projection per vertex by 2D
//! filtered backprojection (the sectional transform is a 2D Radon transform
//! of the disk projection), then recover the source from the weighted-ray
//! data by conjugate-gradient least squares.

use nalgebra::DMatrix;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::field::{GridSpec, ScalarField3};
use crate::geometry::Vec3;
use crate::hemifield::{DiskGrid, HemiField};
use crate::lattice::ConeLattice;
use crate::quadrature::ray_nodes;
use crate::transforms::QuadratureSpec;

/// Zero-padding factor for the ramp filter.
const FBP_PAD: usize = 4;

/// Filtered backprojection of one fixed-vertex slice `Cf(u, ., .)` onto the
/// disk; returns the hemisphere samples recovered from the disk projection.
///
/// Requires uniform angles over `[0, 2 pi)` and uniform openings over
/// `[-1, 1]`. Ram-Lak filtering multiplies the zero-padded (4x) profiles by
/// `|sigma|` in the frequency domain; backprojection interpolates linearly in
/// the opening variable.
pub fn invert_q(lattice: &ConeLattice, iu: usize, disk: DiskGrid) -> Result<HemiField> {
    if !lattice.is_uniform() {
        return Err(Error::InvalidInput(
            "filtered backprojection requires a uniform (beta, s) lattice".into(),
        ));
    }
    let (nu, nb, ns) = lattice.shape();
    if iu >= nu {
        return Err(Error::InvalidInput(format!("u index {iu} out of range {nu}")));
    }
    let h = 2.0 / (ns - 1) as f64;
    let filtered = filter_profiles(lattice, iu, h);

    // backprojection constant: (1 / 4 pi) * (2 pi / n_beta)
    let scale = 1.0 / (2.0 * nb as f64);
    let trig: Vec<(f64, f64)> = lattice.beta_nodes.iter().map(|&b| (b.cos(), b.sin())).collect();
    let mut phi = vec![0.0f64; disk.len()];
    for j in 0..disk.n {
        for i in 0..disk.n {
            if !disk.retained(i, j) {
                continue;
            }
            let (y1, y2) = disk.node(i, j);
            let mut acc = 0.0;
            for (ib, &(cb, sb)) in trig.iter().enumerate() {
                let t = y1 * cb + y2 * sb;
                let g = (t + 1.0) / h;
                let k = (g.floor() as usize).min(ns - 2);
                let frac = g - k as f64;
                let prof = &filtered[ib];
                acc += prof[k] * (1.0 - frac) + prof[k + 1] * frac;
            }
            phi[disk.index(i, j)] = acc * scale;
        }
    }
    HemiField::from_phi(lattice.u_nodes[iu], disk, phi)
}

/// Ram-Lak filtered s-profiles for every angle of the slice.
fn filter_profiles(lattice: &ConeLattice, iu: usize, h: f64) -> Vec<Vec<f64>> {
    let (_, nb, ns) = lattice.shape();
    let n_pad = FBP_PAD * ns;
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n_pad);
    let ifft = planner.plan_fft_inverse(n_pad);
    let ramp: Vec<f64> = (0..n_pad)
        .map(|k| {
            let k_signed = k.min(n_pad - k) as f64;
            crate::quadrature::TWO_PI * k_signed / (n_pad as f64 * h)
        })
        .collect();
    (0..nb)
        .map(|ib| {
            let mut buf = vec![Complex64::new(0.0, 0.0); n_pad];
            for is in 0..ns {
                buf[is] = Complex64::new(lattice.value(iu, ib, is), 0.0);
            }
            fft.process(&mut buf);
            for (v, &r) in buf.iter_mut().zip(&ramp) {
                *v *= r;
            }
            ifft.process(&mut buf);
            buf[..ns].iter().map(|c| c.re / n_pad as f64).collect()
        })
        .collect()
}

/// Conjugate gradient on the normal equations.
#[derive(Debug, Clone)]
pub struct CglsResult {
    pub solution: Vec<f64>,
    /// `||b - A x_k||` per iteration, starting with the `x = 0` residual.
    pub residual_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

pub fn cgls<A, At>(
    apply: A,
    apply_adjoint: At,
    data: &[f64],
    max_iters: usize,
    tol: f64,
) -> Result<CglsResult>
where
    A: Fn(&[f64]) -> Vec<f64>,
    At: Fn(&[f64]) -> Vec<f64>,
{
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("cgls data contains non-finite values".into()));
    }
    let b_norm = norm(data);
    let mut s = apply_adjoint(data);
    let n = s.len();
    let mut x = vec![0.0; n];
    let mut residual_history = vec![b_norm];
    if b_norm == 0.0 {
        return Ok(CglsResult { solution: x, residual_history, iterations: 0, converged: true });
    }
    let mut r = data.to_vec();
    let mut p = s.clone();
    let mut gamma = dot(&s, &s);
    let mut iterations = 0;
    let mut converged = gamma == 0.0;
    while iterations < max_iters && !converged {
        let q = apply(&p);
        let delta = dot(&q, &q);
        if delta == 0.0 {
            break;
        }
        let alpha = gamma / delta;
        axpy(&mut x, alpha, &p);
        axpy(&mut r, -alpha, &q);
        s = apply_adjoint(&r);
        let gamma_next = dot(&s, &s);
        let beta = gamma_next / gamma;
        gamma = gamma_next;
        for (pi, &si) in p.iter_mut().zip(&s) {
            *pi = si + beta * *pi;
        }
        iterations += 1;
        let rn = norm(&r);
        residual_history.push(rn);
        if rn / b_norm <= tol {
            converged = true;
        }
    }
    Ok(CglsResult { solution: x, residual_history, iterations, converged })
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Options for the least-squares ray-transform inversion.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub max_iters: usize,
    pub tol: f64,
    /// Optional Tikhonov weight; off by default.
    pub tikhonov: Option<f64>,
    /// Scale every equation by the inverse row norm (weighted least squares).
    /// Equalizes the influence of long and short ray paths and improves the
    /// conditioning of the normal equations considerably.
    pub row_equilibrate: bool,
    /// Verify the discrete ray operator has a trivial numerical null space
    /// before solving.
    pub rank_check: bool,
    /// Smallest acceptable `sigma_min / sigma_max` for the rank check.
    pub rank_threshold: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iters: 200,
            tol: 1e-8,
            tikhonov: None,
            row_equilibrate: true,
            rank_check: true,
            rank_threshold: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub converged: bool,
    /// `sigma_min / sigma_max` of the discrete ray operator when checked.
    pub spectral_ratio: Option<f64>,
    pub rows: usize,
    pub cols: usize,
}

/// Sparse row-compressed ray operator: one row per (vertex, disk node) pair.
struct RayOperator {
    rows: Vec<Vec<(u32, f64)>>,
    n_cols: usize,
}

impl RayOperator {
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .par_iter()
            .map(|row| row.iter().map(|&(c, w)| w * x[c as usize]).sum())
            .collect()
    }

    fn apply_adjoint(&self, y: &[f64]) -> Vec<f64> {
        // Sequential scatter keeps the accumulation order fixed.
        let mut out = vec![0.0; self.n_cols];
        for (row, &yi) in self.rows.iter().zip(y) {
            if yi == 0.0 {
                continue;
            }
            for &(c, w) in row {
                out[c as usize] += w * yi;
            }
        }
        out
    }

    /// Smallest/largest singular value ratio via the normal matrix.
    ///
    /// The normal-matrix route squares the spectrum, so it certifies ratios
    /// down to roughly 1e-6 in f64; that is what the default rank threshold
    /// asks for.
    fn spectral_ratio(&self) -> Result<(f64, Vec<f64>)> {
        let n = self.n_cols;
        let mut g = DMatrix::<f64>::zeros(n, n);
        for row in &self.rows {
            for (a, &(ca, wa)) in row.iter().enumerate() {
                let ca = ca as usize;
                g[(ca, ca)] += wa * wa;
                for &(cb, wb) in row.iter().skip(a + 1) {
                    let cb = cb as usize;
                    let v = wa * wb;
                    g[(ca, cb)] += v;
                    g[(cb, ca)] += v;
                }
            }
        }
        let eig = g.symmetric_eigenvalues();
        let mut lambda: Vec<f64> = eig.iter().map(|&l| l.max(0.0)).collect();
        lambda.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let l_max = lambda.first().copied().unwrap_or(0.0);
        if l_max == 0.0 {
            return Err(Error::Numerical("ray operator is identically zero".into()));
        }
        let l_min = lambda.last().copied().unwrap_or(0.0);
        Ok(((l_min / l_max).sqrt(), lambda))
    }
}

/// Builds the discrete weighted-ray operator for the retained disk nodes of
/// each hemifield, with unknowns restricted to voxels with center `y > 0`.
fn build_ray_operator(
    hemifields: &[HemiField],
    grid: &GridSpec,
    quad: &QuadratureSpec,
) -> Result<(RayOperator, Vec<f64>, Vec<usize>)> {
    grid.validate()?;
    let mut voxel_to_col = vec![u32::MAX; grid.len()];
    let mut col_map = Vec::new();
    for idx in 0..grid.len() {
        let (i, j, k) = grid.unravel(idx);
        if grid.center(i, j, k).y > 0.0 {
            voxel_to_col[idx] = col_map.len() as u32;
            col_map.push(idx);
        }
    }
    if col_map.is_empty() {
        return Err(Error::InvalidInput("grid has no voxels with center y > 0".into()));
    }
    let support = grid.support_box();
    let mut samples = Vec::new();
    for h in hemifields {
        for j in 0..h.grid.n {
            for i in 0..h.grid.n {
                if !h.grid.retained(i, j) {
                    continue;
                }
                let (y1, y2) = h.grid.node(i, j);
                let up = (1.0 - (y1 * y1 + y2 * y2)).sqrt();
                samples.push((h.u, Vec3::new(y1, up, y2), h.pf[h.grid.index(i, j)]));
            }
        }
    }
    let rows: Vec<Vec<(u32, f64)>> = samples
        .par_iter()
        .map(|&(u, dir, _)| {
            let origin = Vec3::new(u, 0.0, 0.0);
            let alpha = crate::geometry::UnitVec3::new(dir).expect("hemisphere direction");
            let nodes = ray_nodes(origin, alpha, &support, quad.ray_step);
            let mut acc: Vec<(u32, f64)> = Vec::new();
            for (&r, &w) in nodes.r_nodes.iter().zip(&nodes.r_weights) {
                let p = origin + dir * r;
                grid.trilinear_stencil(p, |voxel, tw| {
                    let col = voxel_to_col[voxel];
                    if col != u32::MAX {
                        acc.push((col, w * r * tw));
                    }
                });
            }
            acc.sort_by_key(|&(c, _)| c);
            let mut merged: Vec<(u32, f64)> = Vec::with_capacity(acc.len());
            for (c, w) in acc {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += w,
                    _ => merged.push((c, w)),
                }
            }
            merged
        })
        .collect();
    let data: Vec<f64> = samples.iter().map(|&(_, _, v)| v).collect();
    Ok((RayOperator { rows, n_cols: col_map.len() }, data, col_map))
}

/// Least-squares recovery of the source from per-vertex hemisphere data.
pub fn solve_p(
    hemifields: &[HemiField],
    grid: GridSpec,
    quad: &QuadratureSpec,
    opts: &SolveOptions,
) -> Result<(ScalarField3, SolveReport)> {
    if hemifields.is_empty() {
        return Err(Error::InvalidInput("no hemifields provided".into()));
    }
    let (op, data, col_map) = build_ray_operator(hemifields, &grid, quad)?;
    let spectral_ratio = if opts.rank_check {
        let (ratio, lambda) = op.spectral_ratio()?;
        if ratio < opts.rank_threshold {
            let head: Vec<f64> = lambda.iter().take(4).cloned().collect();
            let tail: Vec<f64> = lambda.iter().rev().take(4).cloned().collect();
            return Err(Error::Numerical(format!(
                "ray operator rank check failed: sigma_min/sigma_max = {ratio:.3e} < {:.3e} \
                 (leading eigenvalues {head:?}, trailing {tail:?})",
                opts.rank_threshold
            )));
        }
        Some(ratio)
    } else {
        None
    };

    let result = match opts.tikhonov {
        None => cgls(|x| op.apply(x), |y| op.apply_adjoint(y), &data, opts.max_iters, opts.tol)?,
        Some(lambda) => {
            let m = data.len();
            let n = op.n_cols;
            let mut augmented = data.clone();
            augmented.extend(std::iter::repeat_n(0.0, n));
            cgls(
                |x| {
                    let mut out = op.apply(x);
                    out.extend(x.iter().map(|&v| lambda * v));
                    out
                },
                |y| {
                    let mut out = op.apply_adjoint(&y[..m]);
                    for (o, &yi) in out.iter_mut().zip(&y[m..]) {
                        *o += lambda * yi;
                    }
                    out
                },
                &augmented,
                opts.max_iters,
                opts.tol,
            )?
        }
    };

    let mut values = vec![0.0; grid.len()];
    for (c, &voxel) in col_map.iter().enumerate() {
        values[voxel] = result.solution[c];
    }
    let field = ScalarField3::new(grid, values)?;
    let report = SolveReport {
        iterations: result.iterations,
        residual_history: result.residual_history,
        converged: result.converged,
        spectral_ratio,
        rows: data.len(),
        cols: op.n_cols,
    };
    Ok((field, report))
}

#[derive(Debug, Clone)]
pub struct ReconReport {
    pub solve: SolveReport,
    pub disk_nodes: usize,
    pub vertices: usize,
}

/// Full pipeline: per-vertex filtered backprojection, then least squares.
pub fn reconstruct(
    lattice: &ConeLattice,
    grid: GridSpec,
    disk: DiskGrid,
    quad: &QuadratureSpec,
    opts: &SolveOptions,
) -> Result<(ScalarField3, ReconReport, Vec<HemiField>)> {
    let nu = lattice.u_nodes.len();
    let hemifields: Vec<HemiField> = (0..nu)
        .into_par_iter()
        .map(|iu| invert_q(lattice, iu, disk))
        .collect::<Result<Vec<_>>>()?;
    let (field, solve) = solve_p(&hemifields, grid, quad, opts)?;
    let report = ReconReport { solve, disk_nodes: disk.len(), vertices: nu };
    Ok((field, report, hemifields))
}

/// Relative L2 distance between two fields on the same grid.
pub fn relative_l2_error(got: &ScalarField3, want: &ScalarField3) -> f64 {
    assert_eq!(got.grid, want.grid);
    let num: f64 = got
        .values
        .iter()
        .zip(&want.values)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let den: f64 = want.values.iter().map(|v| v * v).sum();
    (num / den.max(1e-300)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::radon2;

    #[test]
    fn cgls_zero_data_returns_zero_at_iteration_zero() {
        let id = |x: &[f64]| x.to_vec();
        let r = cgls(id, id, &[0.0, 0.0, 0.0], 10, 1e-12).unwrap();
        assert_eq!(r.solution, vec![0.0, 0.0, 0.0]);
        assert_eq!(r.iterations, 0);
        assert!(r.converged);
    }

    #[test]
    fn cgls_identity_converges_in_one_iteration() {
        let id = |x: &[f64]| x.to_vec();
        let b = vec![1.0, -2.0, 3.0];
        let r = cgls(id, id, &b, 10, 1e-12).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.converged);
        for (got, want) in r.solution.iter().zip(&b) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn cgls_recovers_consistent_rectangular_system() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(14);
        let (m, n) = (50, 30);
        let a: Vec<Vec<f64>> =
            (0..m).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let x_true: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let apply = |x: &[f64]| -> Vec<f64> {
            a.iter().map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum()).collect()
        };
        let adjoint = |y: &[f64]| -> Vec<f64> {
            (0..n).map(|j| a.iter().zip(y).map(|(row, v)| row[j] * v).sum()).collect()
        };
        let b = apply(&x_true);
        let r = cgls(apply, adjoint, &b, 30, 1e-14).unwrap();
        let err: f64 = r
            .solution
            .iter()
            .zip(&x_true)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
            / x_true.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(err < 1e-8, "relative error {err}");
        // monotone residual history
        for w in r.residual_history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-10));
        }
    }

    #[test]
    fn fbp_round_trips_a_smooth_bump() {
        // bump of radius 0.4 on the disk, C^2 at the edge
        let rho = 0.4f64;
        let bump = |y1: f64, y2: f64| {
            let r2 = (y1 * y1 + y2 * y2) / (rho * rho);
            if r2 < 1.0 {
                (1.0 - r2).powi(3)
            } else {
                0.0
            }
        };
        let (nb, ns) = (180, 257);
        let mut lattice = ConeLattice::uniform(0.0, 1.0, 1, nb, ns).unwrap();
        let disk = DiskGrid::new(129).unwrap();
        let samples: Vec<f64> = (0..disk.len())
            .map(|idx| {
                let (i, j) = (idx % disk.n, idx / disk.n);
                let (y1, y2) = disk.node(i, j);
                bump(y1, y2)
            })
            .collect();
        for ib in 0..nb {
            for is in 0..ns {
                let idx = lattice.index(0, ib, is);
                lattice.data[idx] = radon2(
                    &disk,
                    &samples,
                    lattice.beta_nodes[ib],
                    lattice.s_nodes[is],
                    2e-3,
                );
            }
        }
        let recovered = invert_q(&lattice, 0, disk).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..disk.n {
            for i in 0..disk.n {
                let (y1, y2) = disk.node(i, j);
                let want = bump(y1, y2);
                let got = recovered.phi[disk.index(i, j)];
                if disk.retained(i, j) {
                    num += (got - want) * (got - want);
                    den += want * want;
                }
            }
        }
        let rel = (num / den).sqrt();
        assert!(rel < 0.05, "relative L2 error {rel}");
    }

    #[test]
    fn fbp_of_zero_slice_is_zero() {
        let lattice = ConeLattice::uniform(0.0, 1.0, 1, 36, 65).unwrap();
        let disk = DiskGrid::new(33).unwrap();
        let h = invert_q(&lattice, 0, disk).unwrap();
        assert!(h.phi.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn fbp_rejects_nonuniform_lattice() {
        let l = ConeLattice::new(vec![0.0], vec![0.0, 1.0, 2.0], vec![-1.0, 0.0, 1.0]).unwrap();
        assert!(invert_q(&l, 0, DiskGrid::new(17).unwrap()).is_err());
    }
}
