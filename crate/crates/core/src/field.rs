//! Voxel grids of point samples plus the `CRTFLD01` container format.
//!
//! Values are point samples at voxel centers; everything downstream treats
//! the field as trilinear between centers, which keeps all transforms exactly
//! linear in the voxel values.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Vec3};
use crate::phantom::AnalyticPhantom;

pub const FIELD_MAGIC: &[u8; 8] = b"CRTFLD01";

/// Grid geometry: `origin` is the lower corner of the box, voxel `(i, j, k)`
/// has its center at `origin + (i + 1/2, j + 1/2, k + 1/2) * spacing`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: Vec3,
    pub spacing: Vec3,
    pub dims: [usize; 3],
}

impl GridSpec {
    pub fn new(origin: Vec3, spacing: Vec3, dims: [usize; 3]) -> Result<Self> {
        let spec = GridSpec { origin, spacing, dims };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidInput(format!(
                "grid dims must be >= 1 per axis, got {:?}",
                self.dims
            )));
        }
        if !(self.spacing.x > 0.0 && self.spacing.y > 0.0 && self.spacing.z > 0.0) {
            return Err(Error::InvalidInput(format!(
                "grid spacing must be positive, got {:?}",
                <[f64; 3]>::from(self.spacing)
            )));
        }
        if !self.origin.is_finite() || !self.spacing.is_finite() {
            return Err(Error::InvalidInput("grid origin/spacing must be finite".into()));
        }
        self.len_checked()?;
        Ok(())
    }

    pub fn len_checked(&self) -> Result<usize> {
        self.dims[0]
            .checked_mul(self.dims[1])
            .and_then(|n| n.checked_mul(self.dims[2]))
            .ok_or_else(|| {
                Error::Format(format!("voxel count overflows usize for dims {:?}", self.dims))
            })
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn voxel_volume(&self) -> f64 {
        self.spacing.x * self.spacing.y * self.spacing.z
    }

    /// Linear index with x fastest, then y, then z.
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.dims[1] + j) * self.dims[0] + i
    }

    pub fn unravel(&self, idx: usize) -> (usize, usize, usize) {
        let i = idx % self.dims[0];
        let j = (idx / self.dims[0]) % self.dims[1];
        let k = idx / (self.dims[0] * self.dims[1]);
        (i, j, k)
    }

    pub fn center(&self, i: usize, j: usize, k: usize) -> Vec3 {
        Vec3::new(
            self.origin.x + (i as f64 + 0.5) * self.spacing.x,
            self.origin.y + (j as f64 + 0.5) * self.spacing.y,
            self.origin.z + (k as f64 + 0.5) * self.spacing.z,
        )
    }

    /// Nominal box `[origin, origin + dims * spacing]`.
    pub fn bounding_box(&self) -> Aabb {
        Aabb::new(
            self.origin,
            Vec3::new(
                self.origin.x + self.dims[0] as f64 * self.spacing.x,
                self.origin.y + self.dims[1] as f64 * self.spacing.y,
                self.origin.z + self.dims[2] as f64 * self.spacing.z,
            ),
        )
    }

    /// Box containing the support of every trilinear basis hat (the nominal
    /// box padded by half a voxel); rays integrate over this one.
    pub fn support_box(&self) -> Aabb {
        let pad = self.spacing * 0.5;
        let b = self.bounding_box();
        Aabb::new(b.min - pad, b.max + pad)
    }

    /// Trilinear weights of the (up to) 8 voxels whose hats cover `p`.
    ///
    /// The callback receives `(linear_index, weight)` with positive weights
    /// only; out-of-grid neighbors are skipped, so the interpolant decays to
    /// zero over the half-voxel rim around the grid.
    pub fn trilinear_stencil<F: FnMut(usize, f64)>(&self, p: Vec3, mut visit: F) {
        let gx = (p.x - self.origin.x) / self.spacing.x - 0.5;
        let gy = (p.y - self.origin.y) / self.spacing.y - 0.5;
        let gz = (p.z - self.origin.z) / self.spacing.z - 0.5;
        let fx = gx.floor();
        let fy = gy.floor();
        let fz = gz.floor();
        let tx = gx - fx;
        let ty = gy - fy;
        let tz = gz - fz;
        let wx = [1.0 - tx, tx];
        let wy = [1.0 - ty, ty];
        let wz = [1.0 - tz, tz];
        for dk in 0..2usize {
            let k = fz as i64 + dk as i64;
            if k < 0 || k >= self.dims[2] as i64 || wz[dk] == 0.0 {
                continue;
            }
            for dj in 0..2usize {
                let j = fy as i64 + dj as i64;
                if j < 0 || j >= self.dims[1] as i64 || wy[dj] == 0.0 {
                    continue;
                }
                let wjk = wy[dj] * wz[dk];
                for di in 0..2usize {
                    let i = fx as i64 + di as i64;
                    if i < 0 || i >= self.dims[0] as i64 || wx[di] == 0.0 {
                        continue;
                    }
                    visit(self.index(i as usize, j as usize, k as usize), wx[di] * wjk);
                }
            }
        }
    }
}

/// Dense voxel field with the upper-half support flag.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField3 {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    /// All nonzero voxels have center `y > 0`.
    pub upper_half: bool,
}

impl ScalarField3 {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "value count {} does not match grid dims {:?}",
                values.len(),
                grid.dims
            )));
        }
        let upper_half = Self::scan_upper_half(&grid, &values);
        Ok(ScalarField3 { grid, values, upper_half })
    }

    pub fn zeros(grid: GridSpec) -> Result<Self> {
        let n = grid.len_checked()?;
        Self::new(grid, vec![0.0; n])
    }

    fn scan_upper_half(grid: &GridSpec, values: &[f64]) -> bool {
        values.iter().enumerate().all(|(idx, &v)| {
            if v == 0.0 {
                return true;
            }
            let (i, j, k) = grid.unravel(idx);
            grid.center(i, j, k).y > 0.0
        })
    }

    /// Re-derive the `upper_half` flag after mutating `values`.
    pub fn rescan_support(&mut self) {
        self.upper_half = Self::scan_upper_half(&self.grid, &self.values);
    }

    /// Trilinear interpolation; zero outside the padded grid box.
    pub fn sample(&self, p: Vec3) -> f64 {
        let mut acc = 0.0;
        self.grid.trilinear_stencil(p, |idx, w| acc += w * self.values[idx]);
        acc
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.voxel_volume()
    }

    pub fn norm_l2(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        let header = FieldHeader {
            origin: self.grid.origin,
            spacing: self.grid.spacing,
            dims: [
                self.grid.dims[0] as u64,
                self.grid.dims[1] as u64,
                self.grid.dims[2] as u64,
            ],
            upper_half: self.upper_half,
        };
        let header_json = serde_json::to_string(&header)
            .map_err(|e| Error::Format(format!("header encode: {e}")))?;
        let header_bytes = header_json.as_bytes();
        if header_bytes.len() > u32::MAX as usize {
            return Err(Error::Format("header too large".into()));
        }
        w.write_all(FIELD_MAGIC)?;
        w.write_all(&(header_bytes.len() as u32).to_le_bytes())?;
        w.write_all(header_bytes)?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        Self::read_from(&mut r)
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)
            .map_err(|_| Error::Format("file too short for magic".into()))?;
        if &magic != FIELD_MAGIC {
            return Err(Error::Format(format!(
                "bad magic {:?}, expected {:?}",
                String::from_utf8_lossy(&magic),
                String::from_utf8_lossy(FIELD_MAGIC)
            )));
        }
        let mut len_bytes = [0u8; 4];
        r.read_exact(&mut len_bytes)
            .map_err(|_| Error::Format("file too short for header length".into()))?;
        let header_len = u32::from_le_bytes(len_bytes) as usize;
        let mut header_bytes = vec![0u8; header_len];
        r.read_exact(&mut header_bytes)
            .map_err(|_| Error::Format("truncated header".into()))?;
        let header_str = std::str::from_utf8(&header_bytes)
            .map_err(|e| Error::Format(format!("header not UTF-8: {e}")))?;
        let header: FieldHeader = serde_json::from_str(header_str)
            .map_err(|e| Error::Format(format!("malformed header: {e}")))?;

        let dims_usize: [usize; 3] = [
            usize::try_from(header.dims[0])
                .map_err(|_| Error::Format("dimension overflow".into()))?,
            usize::try_from(header.dims[1])
                .map_err(|_| Error::Format("dimension overflow".into()))?,
            usize::try_from(header.dims[2])
                .map_err(|_| Error::Format("dimension overflow".into()))?,
        ];
        let grid = GridSpec { origin: header.origin, spacing: header.spacing, dims: dims_usize };
        grid.validate()?;
        let n = grid.len_checked()?;
        if n.checked_mul(8).is_none() {
            return Err(Error::Format("dimension overflow".into()));
        }

        let mut values = vec![0.0f64; n];
        let mut buf = [0u8; 8];
        for v in values.iter_mut() {
            r.read_exact(&mut buf)
                .map_err(|_| Error::Format("truncated body".into()))?;
            *v = f64::from_le_bytes(buf);
        }
        // Trust but verify the stored flag against the data.
        let scanned = Self::scan_upper_half(&grid, &values);
        if scanned != header.upper_half {
            return Err(Error::Format(
                "upper_half flag disagrees with stored values".into(),
            ));
        }
        Ok(ScalarField3 { grid, values, upper_half: header.upper_half })
    }
}

#[derive(Serialize, Deserialize)]
struct FieldHeader {
    origin: Vec3,
    spacing: Vec3,
    dims: [u64; 3],
    upper_half: bool,
}

/// Samples a phantom at every voxel center.
pub fn rasterize(phantom: &AnalyticPhantom, grid: GridSpec) -> Result<ScalarField3> {
    grid.validate()?;
    let n = grid.len_checked()?;
    let mut values = vec![0.0f64; n];
    for k in 0..grid.dims[2] {
        for j in 0..grid.dims[1] {
            for i in 0..grid.dims[0] {
                values[grid.index(i, j, k)] = phantom.eval(grid.center(i, j, k));
            }
        }
    }
    ScalarField3::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use std::io::Cursor;

    fn grid32() -> GridSpec {
        GridSpec::new(
            Vec3::new(-1.0, 1.0, -1.0),
            Vec3::new(2.0 / 32.0, 2.0 / 32.0, 2.0 / 32.0),
            [32, 32, 32],
        )
        .unwrap()
    }

    #[test]
    fn zero_phantom_rasterizes_upper_half() {
        let f = rasterize(&AnalyticPhantom::default(), grid32()).unwrap();
        assert!(f.values.iter().all(|&v| v == 0.0));
        assert!(f.upper_half);
    }

    #[test]
    fn ball_mass_matches_closed_form() {
        // Oracle: volume of a ball, amplitude * 4/3 pi r^3.
        let amplitude = 2.0;
        let radius = 0.5f64;
        let oracle = amplitude * 4.0 / 3.0 * std::f64::consts::PI * radius.powi(3);
        let phantom = AnalyticPhantom::ball(Vec3::new(0.0, 2.0, 0.0), radius, amplitude);
        let f = rasterize(&phantom, grid32()).unwrap();
        assert!(f.upper_half);
        let mass = f.total_mass();
        assert!(
            (mass - oracle).abs() / oracle < 0.02,
            "mass {mass} vs oracle {oracle}"
        );
    }

    #[test]
    fn lower_ball_clears_upper_half_flag() {
        let phantom = AnalyticPhantom::ball(Vec3::new(0.0, -2.0, 0.0), 0.5, 1.0);
        let grid = GridSpec::new(
            Vec3::new(-1.0, -3.0, -1.0),
            Vec3::new(0.125, 0.125, 0.125),
            [16, 16, 16],
        )
        .unwrap();
        let f = rasterize(&phantom, grid).unwrap();
        assert!(!f.upper_half);
    }

    #[test]
    fn rejects_zero_volume_grid() {
        assert!(GridSpec::new(Vec3::ZERO, Vec3::new(0.0, 1.0, 1.0), [4, 4, 4]).is_err());
        assert!(GridSpec::new(Vec3::ZERO, Vec3::new(1.0, 1.0, 1.0), [0, 4, 4]).is_err());
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let phantom = AnalyticPhantom::gaussian(Vec3::new(0.1, 1.9, -0.2), 0.3, 1.7);
        let f = rasterize(&phantom, grid32()).unwrap();
        let mut bytes = Vec::new();
        f.write_to(&mut bytes).unwrap();
        let g = ScalarField3::read_from(&mut Cursor::new(&bytes)).unwrap();
        assert_eq!(f.grid, g.grid);
        assert_eq!(f.upper_half, g.upper_half);
        assert!(f
            .values
            .iter()
            .zip(&g.values)
            .all(|(a, b)| a.to_bits() == b.to_bits()));
        let mut bytes2 = Vec::new();
        g.write_to(&mut bytes2).unwrap();
        assert_eq!(bytes, bytes2);
    }

    #[test]
    fn single_voxel_round_trips() {
        let grid = GridSpec::new(Vec3::ZERO, Vec3::new(1.0, 1.0, 1.0), [1, 1, 1]).unwrap();
        let f = ScalarField3::new(grid, vec![0.0]).unwrap();
        let mut bytes = Vec::new();
        f.write_to(&mut bytes).unwrap();
        let g = ScalarField3::read_from(&mut Cursor::new(&bytes)).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn truncated_body_is_rejected() {
        let grid = GridSpec::new(Vec3::ZERO, Vec3::new(1.0, 1.0, 1.0), [2, 2, 2]).unwrap();
        let f = ScalarField3::new(grid, vec![1.0; 8]).unwrap();
        let mut bytes = Vec::new();
        f.write_to(&mut bytes).unwrap();
        bytes.truncate(bytes.len() - 8); // drop the 8th value
        let err = ScalarField3::read_from(&mut Cursor::new(&bytes)).unwrap_err();
        assert!(matches!(err, Error::Format(ref m) if m.contains("truncated body")), "{err}");
    }

    #[test]
    fn bad_magic_is_rejected() {
        let bytes = b"NOTAFLD0rest".to_vec();
        let err = ScalarField3::read_from(&mut Cursor::new(&bytes)).unwrap_err();
        assert!(matches!(err, Error::Format(_)));
    }

    #[test]
    fn trilinear_reproduces_linear_functions_between_centers() {
        // A trilinear interpolant is exact on f(x,y,z) = a + bx + cy + dz.
        let grid = GridSpec::new(
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(0.5, 0.25, 0.5),
            [8, 8, 8],
        )
        .unwrap();
        let lin = |p: Vec3| 0.7 + 1.3 * p.x - 0.4 * p.y + 2.0 * p.z;
        let mut values = vec![0.0; grid.len()];
        for k in 0..8 {
            for j in 0..8 {
                for i in 0..8 {
                    values[grid.index(i, j, k)] = lin(grid.center(i, j, k));
                }
            }
        }
        let f = ScalarField3::new(grid, values).unwrap();
        let p = Vec3::new(1.23, 0.91, 2.17); // strictly between centers
        assert!((f.sample(p) - lin(p)).abs() < 1e-12);
        // zero outside the padded box
        assert_eq!(f.sample(Vec3::new(-1.0, 1.0, 1.0)), 0.0);
    }
}
