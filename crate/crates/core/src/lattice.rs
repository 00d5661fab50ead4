//! Sampling lattice over `(u, beta, s)` and the sinogram CSV format.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::quadrature::TWO_PI;

/// Prints an `f64` with 17 significant digits, enough to round-trip exactly.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Cone sample lattice: vertices at `(u, 0, 0)`, axis angle `beta`, opening
/// parameter `s`, with data stored s-fastest, then beta, then u.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeLattice {
    pub u_nodes: Vec<f64>,
    pub beta_nodes: Vec<f64>,
    pub s_nodes: Vec<f64>,
    pub data: Vec<f64>,
}

impl ConeLattice {
    pub fn new(u_nodes: Vec<f64>, beta_nodes: Vec<f64>, s_nodes: Vec<f64>) -> Result<Self> {
        validate_sorted("u_nodes", &u_nodes)?;
        validate_sorted("beta_nodes", &beta_nodes)?;
        validate_sorted("s_nodes", &s_nodes)?;
        if beta_nodes.iter().any(|&b| !(0.0..TWO_PI).contains(&b)) {
            return Err(Error::InvalidInput("beta nodes must lie in [0, 2 pi)".into()));
        }
        if s_nodes.iter().any(|&s| !(-1.0..=1.0).contains(&s)) {
            return Err(Error::InvalidInput("s nodes must lie in [-1, 1]".into()));
        }
        let len = u_nodes.len() * beta_nodes.len() * s_nodes.len();
        Ok(ConeLattice { u_nodes, beta_nodes, s_nodes, data: vec![0.0; len] })
    }

    /// Uniform lattice: `nu` nodes over `[u_min, u_max]`, `nb` angles over
    /// `[0, 2 pi)`, `ns` openings over `[-1, 1]` inclusive.
    pub fn uniform(u_min: f64, u_max: f64, nu: usize, nb: usize, ns: usize) -> Result<Self> {
        if nu == 0 || nb == 0 || ns < 2 {
            return Err(Error::InvalidInput(
                "lattice needs nu, nb >= 1 and ns >= 2".into(),
            ));
        }
        let u_nodes = if nu == 1 {
            vec![0.5 * (u_min + u_max)]
        } else {
            (0..nu)
                .map(|i| u_min + (u_max - u_min) * i as f64 / (nu - 1) as f64)
                .collect()
        };
        let beta_nodes = (0..nb).map(|i| TWO_PI * i as f64 / nb as f64).collect();
        let s_nodes = (0..ns)
            .map(|i| -1.0 + 2.0 * i as f64 / (ns - 1) as f64)
            .collect();
        ConeLattice::new(u_nodes, beta_nodes, s_nodes)
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.u_nodes.len(), self.beta_nodes.len(), self.s_nodes.len())
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn index(&self, iu: usize, ib: usize, is: usize) -> usize {
        (iu * self.beta_nodes.len() + ib) * self.s_nodes.len() + is
    }

    pub fn value(&self, iu: usize, ib: usize, is: usize) -> f64 {
        self.data[self.index(iu, ib, is)]
    }

    /// Linear interpolation of the s-profile at fixed `(iu, ib)`; queries
    /// with `|s| > 1` return 0 by the opening-range convention.
    pub fn query_s(&self, iu: usize, ib: usize, s: f64) -> f64 {
        if s.abs() > 1.0 {
            return 0.0;
        }
        let sn = &self.s_nodes;
        if s <= sn[0] {
            return self.value(iu, ib, 0);
        }
        if s >= sn[sn.len() - 1] {
            return self.value(iu, ib, sn.len() - 1);
        }
        let mut hi = sn.partition_point(|&x| x < s);
        if hi == 0 {
            hi = 1;
        }
        let lo = hi - 1;
        let t = (s - sn[lo]) / (sn[hi] - sn[lo]);
        self.value(iu, ib, lo) * (1.0 - t) + self.value(iu, ib, hi) * t
    }

    /// True when beta covers `[0, 2 pi)` uniformly and s covers `[-1, 1]`
    /// uniformly including both endpoints.
    pub fn is_uniform(&self) -> bool {
        is_uniform_partition(&self.beta_nodes, 0.0, TWO_PI, false)
            && is_uniform_partition(&self.s_nodes, -1.0, 1.0, true)
    }

    pub fn norm_l2(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_csv_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_to<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "u,beta,s,value")?;
        for (iu, &u) in self.u_nodes.iter().enumerate() {
            for (ib, &beta) in self.beta_nodes.iter().enumerate() {
                for (is, &s) in self.s_nodes.iter().enumerate() {
                    writeln!(
                        w,
                        "{},{},{},{}",
                        format_f64(u),
                        format_f64(beta),
                        format_f64(s),
                        format_f64(self.value(iu, ib, is))
                    )?;
                }
            }
        }
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let r = BufReader::new(File::open(path)?);
        Self::read_csv_from(r)
    }

    pub fn read_csv_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty sinogram CSV".into()))?
            .map_err(Error::Io)?;
        if header.trim() != "u,beta,s,value" {
            return Err(Error::Format(format!("unexpected CSV header '{header}'")));
        }
        let mut rows: Vec<(f64, f64, f64, f64)> = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.map_err(Error::Io)?;
            if line.trim().is_empty() {
                continue;
            }
            let mut cols = line.split(',');
            let mut next = || -> Result<f64> {
                cols.next()
                    .ok_or_else(|| {
                        Error::Format(format!("line {}: too few columns", lineno + 2))
                    })?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 2)))
            };
            rows.push((next()?, next()?, next()?, next()?));
        }
        let u_nodes = sorted_unique(rows.iter().map(|r| r.0));
        let beta_nodes = sorted_unique(rows.iter().map(|r| r.1));
        let s_nodes = sorted_unique(rows.iter().map(|r| r.2));
        let mut lattice = ConeLattice::new(u_nodes, beta_nodes, s_nodes)?;
        if rows.len() != lattice.len() {
            return Err(Error::Format(format!(
                "sinogram is not a complete grid: {} rows vs {} lattice points",
                rows.len(),
                lattice.len()
            )));
        }
        let mut seen = vec![false; lattice.len()];
        for (u, beta, s, v) in rows {
            let iu = find_node(&lattice.u_nodes, u);
            let ib = find_node(&lattice.beta_nodes, beta);
            let is = find_node(&lattice.s_nodes, s);
            let idx = lattice.index(iu, ib, is);
            if seen[idx] {
                return Err(Error::Format("duplicate lattice point in sinogram".into()));
            }
            seen[idx] = true;
            lattice.data[idx] = v;
        }
        Ok(lattice)
    }
}

fn validate_sorted(name: &str, nodes: &[f64]) -> Result<()> {
    if nodes.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("{name} must be finite")));
    }
    if nodes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(format!(
            "{name} must be strictly increasing"
        )));
    }
    Ok(())
}

fn sorted_unique(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup();
    v
}

fn find_node(nodes: &[f64], v: f64) -> usize {
    nodes.partition_point(|&x| x < v)
}

pub(crate) fn is_uniform_partition(nodes: &[f64], lo: f64, hi: f64, inclusive: bool) -> bool {
    if nodes.len() < 2 {
        return false;
    }
    let n = nodes.len();
    let step = if inclusive {
        (hi - lo) / (n - 1) as f64
    } else {
        (hi - lo) / n as f64
    };
    let tol = 1e-9 * (hi - lo).abs();
    nodes
        .iter()
        .enumerate()
        .all(|(i, &x)| (x - (lo + step * i as f64)).abs() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn uniform_lattice_shape_and_ranges() {
        let l = ConeLattice::uniform(-1.0, 1.0, 9, 36, 65).unwrap();
        assert_eq!(l.shape(), (9, 36, 65));
        assert_eq!(l.s_nodes[0], -1.0);
        assert_eq!(*l.s_nodes.last().unwrap(), 1.0);
        assert!(l.beta_nodes.iter().all(|&b| (0.0..TWO_PI).contains(&b)));
        assert!(l.is_uniform());
    }

    #[test]
    fn out_of_range_query_is_zero() {
        let mut l = ConeLattice::uniform(0.0, 1.0, 2, 4, 5).unwrap();
        for v in l.data.iter_mut() {
            *v = 1.0;
        }
        assert_eq!(l.query_s(0, 0, 1.5), 0.0);
        assert_eq!(l.query_s(0, 0, -1.01), 0.0);
        assert_eq!(l.query_s(0, 0, 0.4), 1.0);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let mut l = ConeLattice::uniform(-0.5, 0.5, 3, 5, 9).unwrap();
        for (i, v) in l.data.iter_mut().enumerate() {
            *v = (i as f64 * 0.7391).sin() / 3.0;
        }
        let mut bytes = Vec::new();
        l.write_csv_to(&mut bytes).unwrap();
        let m = ConeLattice::read_csv_from(Cursor::new(&bytes)).unwrap();
        assert_eq!(l.shape(), m.shape());
        assert!(l
            .data
            .iter()
            .zip(&m.data)
            .all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn incomplete_grid_is_rejected() {
        let csv = "u,beta,s,value\n0,0,0,1\n0,0,0.5,1\n1,0,0,1\n";
        let err = ConeLattice::read_csv_from(Cursor::new(csv)).unwrap_err();
        assert!(matches!(err, Error::Format(_)));
    }

    #[test]
    fn seventeen_digits_round_trip() {
        let v = std::f64::consts::PI / 3.0;
        let s = format_f64(v);
        let back: f64 = s.parse().unwrap();
        assert_eq!(v.to_bits(), back.to_bits());
    }
}
