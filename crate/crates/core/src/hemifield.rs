//! Samples of the weighted ray transform on the upper hemisphere and their
//! disk projection.
//!
//! A hemisphere direction `alpha = (y1, sqrt(1-|y|^2), y2)` is indexed by its
//! disk coordinates `y = (y1, y2)`, `|y| < 1`. The disk-projected function
//! divides by `sqrt(1-|y|^2)`, which is singular at the rim, so nodes within
//! [`EPS_RIM`] of `|y| = 1` are excluded from the sample set.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{UnitVec3, Vec3};
use crate::lattice::format_f64;

/// Exclusion band at the disk rim.
pub const EPS_RIM: f64 = 1e-6;

/// Node-centered square grid over `[-1, 1]^2`: `n` nodes per axis including
/// both endpoints, `y_i = -1 + 2 i / (n - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiskGrid {
    pub n: usize,
}

impl DiskGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidInput("disk grid needs n >= 3 nodes per axis".into()));
        }
        Ok(DiskGrid { n })
    }

    pub fn coord(&self, i: usize) -> f64 {
        -1.0 + 2.0 * i as f64 / (self.n - 1) as f64
    }

    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        (self.coord(i), self.coord(j))
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Grid nodes kept as samples: strictly inside the rim band.
    pub fn retained(&self, i: usize, j: usize) -> bool {
        let (y1, y2) = self.node(i, j);
        y1 * y1 + y2 * y2 < (1.0 - EPS_RIM) * (1.0 - EPS_RIM)
    }

    /// Bilinear interpolation with value 0 outside the sampled square.
    pub fn bilinear(&self, values: &[f64], y1: f64, y2: f64) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        let m = (self.n - 1) as f64;
        let gx = (y1 + 1.0) * 0.5 * m;
        let gy = (y2 + 1.0) * 0.5 * m;
        if gx < 0.0 || gy < 0.0 || gx > m || gy > m {
            return 0.0;
        }
        let i0 = (gx.floor() as usize).min(self.n - 2);
        let j0 = (gy.floor() as usize).min(self.n - 2);
        let tx = gx - i0 as f64;
        let ty = gy - j0 as f64;
        let v00 = values[self.index(i0, j0)];
        let v10 = values[self.index(i0 + 1, j0)];
        let v01 = values[self.index(i0, j0 + 1)];
        let v11 = values[self.index(i0 + 1, j0 + 1)];
        v00 * (1.0 - tx) * (1.0 - ty) + v10 * tx * (1.0 - ty) + v01 * (1.0 - tx) * ty
            + v11 * tx * ty
    }
}

/// Disk-indexed samples of `Pf(u, .)` on the hemisphere and its projection.
#[derive(Debug, Clone, PartialEq)]
pub struct HemiField {
    pub u: f64,
    pub grid: DiskGrid,
    /// `Pf(u, (y1, sqrt(1-|y|^2), y2))`; zero at excluded nodes.
    pub pf: Vec<f64>,
    /// `pf / sqrt(1-|y|^2)` elementwise; zero at excluded nodes.
    pub phi: Vec<f64>,
}

impl HemiField {
    /// Builds the pair from hemisphere samples, forcing excluded nodes to 0.
    pub fn from_pf(u: f64, grid: DiskGrid, mut pf: Vec<f64>) -> Result<Self> {
        if pf.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} pf samples, got {}",
                grid.len(),
                pf.len()
            )));
        }
        let mut phi = vec![0.0; pf.len()];
        for j in 0..grid.n {
            for i in 0..grid.n {
                let idx = grid.index(i, j);
                if !grid.retained(i, j) {
                    pf[idx] = 0.0;
                    continue;
                }
                let (y1, y2) = grid.node(i, j);
                phi[idx] = pf[idx] / (1.0 - (y1 * y1 + y2 * y2)).sqrt();
            }
        }
        Ok(HemiField { u, grid, pf, phi })
    }

    /// Builds the pair from disk-projected samples instead.
    pub fn from_phi(u: f64, grid: DiskGrid, mut phi: Vec<f64>) -> Result<Self> {
        if phi.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} phi samples, got {}",
                grid.len(),
                phi.len()
            )));
        }
        let mut pf = vec![0.0; phi.len()];
        for j in 0..grid.n {
            for i in 0..grid.n {
                let idx = grid.index(i, j);
                if !grid.retained(i, j) {
                    phi[idx] = 0.0;
                    continue;
                }
                let (y1, y2) = grid.node(i, j);
                pf[idx] = phi[idx] * (1.0 - (y1 * y1 + y2 * y2)).sqrt();
            }
        }
        Ok(HemiField { u, grid, pf, phi })
    }

    /// Hemisphere sampler for the spherical sectional transform: bilinear on
    /// the disk for `alpha_y > 0`, zero on the lower hemisphere.
    pub fn pf_at(&self, alpha: UnitVec3) -> f64 {
        let a: Vec3 = alpha.vec();
        if a.y <= 0.0 {
            return 0.0;
        }
        self.grid.bilinear(&self.pf, a.x, a.z)
    }

    pub fn phi_at(&self, y1: f64, y2: f64) -> f64 {
        self.grid.bilinear(&self.phi, y1, y2)
    }

    /// Maximum |pf| over the outermost ring of retained nodes.
    pub fn outer_ring_max_abs_pf(&self) -> f64 {
        let n = self.grid.n;
        let mut best = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                if !self.grid.retained(i, j) {
                    continue;
                }
                // a retained node is on the outer ring if any 4-neighbor is excluded
                let on_ring = [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)].iter().any(|&(di, dj)| {
                    let ii = i as i64 + di;
                    let jj = j as i64 + dj;
                    ii < 0
                        || jj < 0
                        || ii >= n as i64
                        || jj >= n as i64
                        || !self.grid.retained(ii as usize, jj as usize)
                });
                if on_ring {
                    best = best.max(self.pf[self.grid.index(i, j)].abs());
                }
            }
        }
        best
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_csv_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_to<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "y1,y2,pf,phi")?;
        for j in 0..self.grid.n {
            for i in 0..self.grid.n {
                if !self.grid.retained(i, j) {
                    continue;
                }
                let (y1, y2) = self.grid.node(i, j);
                let idx = self.grid.index(i, j);
                writeln!(
                    w,
                    "{},{},{},{}",
                    format_f64(y1),
                    format_f64(y2),
                    format_f64(self.pf[idx]),
                    format_f64(self.phi[idx])
                )?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_geometry() {
        let g = DiskGrid::new(5).unwrap();
        assert_eq!(g.coord(0), -1.0);
        assert_eq!(g.coord(2), 0.0);
        assert_eq!(g.coord(4), 1.0);
        assert!(!g.retained(0, 0)); // corner |y| = sqrt(2)
        assert!(!g.retained(4, 2)); // rim node |y| = 1
        assert!(g.retained(2, 2));
    }

    #[test]
    fn phi_relation_holds_elementwise() {
        let g = DiskGrid::new(9).unwrap();
        let pf: Vec<f64> = (0..g.len()).map(|i| (i as f64 * 0.37).cos()).collect();
        let h = HemiField::from_pf(0.0, g, pf).unwrap();
        for j in 0..g.n {
            for i in 0..g.n {
                let idx = g.index(i, j);
                if g.retained(i, j) {
                    let (y1, y2) = g.node(i, j);
                    let root = (1.0 - (y1 * y1 + y2 * y2)).sqrt();
                    assert!((h.phi[idx] - h.pf[idx] / root).abs() < 1e-15);
                } else {
                    assert_eq!(h.pf[idx], 0.0);
                    assert_eq!(h.phi[idx], 0.0);
                }
            }
        }
        // center node: factor is exactly 1
        let c = g.index(4, 4);
        assert_eq!(h.pf[c], h.phi[c]);
    }

    #[test]
    fn bilinear_is_exact_on_bilinear_data_and_zero_outside() {
        let g = DiskGrid::new(17).unwrap();
        let f = |y1: f64, y2: f64| 0.3 + 0.5 * y1 - 0.2 * y2 + 0.7 * y1 * y2;
        let values: Vec<f64> = (0..g.len())
            .map(|idx| {
                let (i, j) = (idx % g.n, idx / g.n);
                let (y1, y2) = g.node(i, j);
                f(y1, y2)
            })
            .collect();
        assert!((g.bilinear(&values, 0.13, -0.41) - f(0.13, -0.41)).abs() < 1e-14);
        assert_eq!(g.bilinear(&values, 1.5, 0.0), 0.0);
    }

    #[test]
    fn lower_hemisphere_samples_are_zero() {
        let g = DiskGrid::new(9).unwrap();
        let h = HemiField::from_pf(0.0, g, vec![1.0; g.len()]).unwrap();
        let down = UnitVec3::new(Vec3::new(0.0, -1.0, 0.0)).unwrap();
        assert_eq!(h.pf_at(down), 0.0);
        let up = UnitVec3::new(Vec3::new(0.0, 1.0, 0.0)).unwrap();
        assert!(h.pf_at(up) > 0.0);
    }
}
