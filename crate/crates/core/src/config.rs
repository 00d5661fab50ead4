//! Declarative run configuration: one JSON document, fully validated before
//! any compute, unknown keys rejected. Flag overrides are applied by the CLI
//! with precedence flags > config > defaults, and the resolved document is
//! echoed into the run manifest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::GridSpec;
use crate::geometry::Vec3;
use crate::lattice::ConeLattice;
use crate::phantom::{AnalyticPhantom, Primitive};
use crate::recon::SolveOptions;
use crate::transforms::QuadratureSpec;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Single seed feeding every random choice (row subsampling, test vectors).
    pub seed: u64,
    /// Worker threads; 0 means available parallelism.
    pub threads: usize,
    pub output_dir: PathBuf,
    pub phantom: AnalyticPhantom,
    pub grid: GridConfig,
    pub lattice: LatticeConfig,
    pub quadrature: QuadConfig,
    /// Disk nodes per axis for hemifields and backprojection.
    pub disk_nodes: usize,
    pub scenario: ScenarioConfig,
    /// Relative singular-value threshold for null-space membership.
    pub null_threshold: f64,
    /// Dense-assembly entry budget.
    pub max_entries: usize,
    pub recon: ReconConfig,
    /// Optional reference field for error reporting in `reconstruct`.
    pub reference_field: Option<PathBuf>,
    /// Input sinogram for `reconstruct`.
    pub sinogram: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            threads: 0,
            output_dir: PathBuf::from("out"),
            phantom: AnalyticPhantom::ball(Vec3::new(0.0, 2.0, 0.0), 0.5, 1.0),
            grid: GridConfig::default(),
            lattice: LatticeConfig::default(),
            quadrature: QuadConfig::default(),
            disk_nodes: 65,
            scenario: ScenarioConfig::default(),
            null_threshold: crate::discrete::DEFAULT_NULL_THRESHOLD,
            max_entries: crate::discrete::DEFAULT_MAX_ENTRIES,
            recon: ReconConfig::default(),
            reference_field: None,
            sinogram: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub origin: [f64; 3],
    pub spacing: [f64; 3],
    pub dims: [usize; 3],
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            origin: [-1.0, 1.0, -1.0],
            spacing: [2.0 / 12.0, 2.0 / 12.0, 2.0 / 12.0],
            dims: [12, 12, 12],
        }
    }
}

impl GridConfig {
    pub fn to_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.origin.into(), self.spacing.into(), self.dims)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub u_min: f64,
    pub u_max: f64,
    pub u_count: usize,
    pub beta_count: usize,
    pub s_count: usize,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        LatticeConfig { u_min: -1.0, u_max: 1.0, u_count: 9, beta_count: 36, s_count: 65 }
    }
}

impl LatticeConfig {
    pub fn to_lattice(&self) -> Result<ConeLattice> {
        ConeLattice::uniform(self.u_min, self.u_max, self.u_count, self.beta_count, self.s_count)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadConfig {
    pub circle_nodes: usize,
    /// Ray step; `null` derives half the smallest voxel spacing when a grid
    /// is in play and falls back to the library default otherwise.
    pub ray_step: Option<f64>,
    pub plane_step: f64,
    pub chord_step: f64,
    pub sphere_t: usize,
    pub sphere_phi: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        let q = QuadratureSpec::default();
        QuadConfig {
            circle_nodes: q.circle_nodes,
            ray_step: None,
            plane_step: q.plane_step,
            chord_step: q.chord_step,
            sphere_t: q.sphere_t,
            sphere_phi: q.sphere_phi,
        }
    }
}

impl QuadConfig {
    pub fn to_spec(&self, grid: Option<&GridSpec>) -> Result<QuadratureSpec> {
        let mut spec = QuadratureSpec {
            circle_nodes: self.circle_nodes,
            ray_step: self.ray_step.unwrap_or(QuadratureSpec::default().ray_step),
            plane_step: self.plane_step,
            chord_step: self.chord_step,
            sphere_t: self.sphere_t,
            sphere_phi: self.sphere_phi,
        };
        if self.ray_step.is_none() {
            if let Some(g) = grid {
                spec = spec.for_grid(g);
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum ScenarioConfig {
    Full,
    /// Angle-restricted data: `angles` equispaced projectively distinct axis
    /// directions, checked nondegenerate through `degree`.
    Theorem2 { angles: usize, degree: usize },
    /// Vertex-restricted data: the lattice's u-nodes form the sampled set A.
    Theorem3,
    /// Cones missing the closed ball.
    Theorem4 { center: [f64; 3], radius: f64 },
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig::Theorem2 { angles: 9, degree: 8 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReconConfig {
    pub max_iters: usize,
    pub tol: f64,
    pub tikhonov: Option<f64>,
    pub rank_check: bool,
    pub rank_threshold: f64,
}

impl Default for ReconConfig {
    fn default() -> Self {
        let o = SolveOptions::default();
        ReconConfig {
            max_iters: o.max_iters,
            tol: o.tol,
            tikhonov: o.tikhonov,
            rank_check: o.rank_check,
            rank_threshold: o.rank_threshold,
        }
    }
}

impl ReconConfig {
    pub fn to_options(&self) -> SolveOptions {
        SolveOptions {
            max_iters: self.max_iters,
            tol: self.tol,
            tikhonov: self.tikhonov,
            rank_check: self.rank_check,
            rank_threshold: self.rank_threshold,
        }
    }
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("config is not valid JSON: {e}")))?;
        validate_phantom_keys(&raw)?;
        let cfg: RunConfig = serde_json::from_value(raw)
            .map_err(|e| Error::InvalidInput(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.grid.to_spec()?;
        self.lattice.to_lattice()?;
        self.quadrature.to_spec(Some(&grid))?;
        if self.disk_nodes < 3 {
            return Err(Error::InvalidInput("disk_nodes must be >= 3".into()));
        }
        if !(self.null_threshold > 0.0 && self.null_threshold < 1.0) {
            return Err(Error::InvalidInput("null_threshold must lie in (0, 1)".into()));
        }
        if self.max_entries == 0 {
            return Err(Error::InvalidInput("max_entries must be positive".into()));
        }
        if let ScenarioConfig::Theorem2 { angles, .. } = self.scenario {
            if angles == 0 {
                return Err(Error::InvalidInput("theorem2 scenario needs angles >= 1".into()));
            }
        }
        if let ScenarioConfig::Theorem4 { radius, .. } = self.scenario {
            if radius <= 0.0 {
                return Err(Error::InvalidInput("theorem4 ball radius must be positive".into()));
            }
        }
        validate_phantom(&self.phantom)?;
        Ok(())
    }
}

fn validate_phantom(phantom: &AnalyticPhantom) -> Result<()> {
    fn check(p: &Primitive) -> Result<()> {
        match p {
            Primitive::Ball { radius, .. } if *radius <= 0.0 => {
                Err(Error::InvalidInput("ball radius must be positive".into()))
            }
            Primitive::Gaussian { width, .. } if *width <= 0.0 => {
                Err(Error::InvalidInput("gaussian width must be positive".into()))
            }
            Primitive::OddY { inner } => check(inner),
            _ => Ok(()),
        }
    }
    phantom.primitives.iter().try_for_each(check)
}

/// Serde's internally tagged enums ignore unknown fields, so primitive specs
/// are walked by hand to keep the unknown-key rejection airtight.
fn validate_phantom_keys(raw: &serde_json::Value) -> Result<()> {
    let Some(primitives) = raw
        .get("phantom")
        .and_then(|p| p.get("primitives"))
        .and_then(|p| p.as_array())
    else {
        return Ok(());
    };
    for prim in primitives {
        validate_primitive_keys(prim)?;
    }
    Ok(())
}

fn validate_primitive_keys(prim: &serde_json::Value) -> Result<()> {
    let Some(obj) = prim.as_object() else {
        return Err(Error::InvalidInput("phantom primitive must be an object".into()));
    };
    let kind = obj
        .get("type")
        .and_then(|t| t.as_str())
        .ok_or_else(|| Error::InvalidInput("phantom primitive missing 'type'".into()))?;
    let allowed: &[&str] = match kind {
        "ball" => &["type", "center", "radius", "amplitude"],
        "gaussian" => &["type", "center", "width", "amplitude"],
        "odd_y" => &["type", "inner"],
        other => {
            return Err(Error::InvalidInput(format!("unknown primitive type '{other}'")));
        }
    };
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::InvalidInput(format!(
                "unknown key '{key}' in {kind} primitive"
            )));
        }
    }
    if kind == "odd_y" {
        if let Some(inner) = obj.get("inner") {
            validate_primitive_keys(inner)?;
        }
    }
    Ok(())
}
