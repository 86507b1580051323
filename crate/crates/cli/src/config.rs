//! Experiment configuration: TOML in, fully-resolved echo out.
//!
//! Every field has a default; the resolved config (all defaults filled in)
//! is written back into the bundle manifest so results are self-describing.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use landau_core::{BoundaryCondition, GeometryKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    BulkLevels,
    HalfplaneBands,
    GapFilling2d,
    SusyLadder,
    ImperfectBoundary,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::BulkLevels => "bulk_levels",
            ExperimentKind::HalfplaneBands => "halfplane_bands",
            ExperimentKind::GapFilling2d => "gap_filling_2d",
            ExperimentKind::SusyLadder => "susy_ladder",
            ExperimentKind::ImperfectBoundary => "imperfect_boundary",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub n: usize,
    pub s_max: f64,
    /// 2D spacings (q1, q2).
    pub h: f64,
    pub h2: Option<f64>,
    /// 2D box: q1_min, q1_max, q2_min, q2_max.
    pub bbox: [f64; 4],
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { n: 2000, s_max: 20.0, h: 0.05, h2: None, bbox: [-1.0, 3.0, 0.0, 28.0] }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub k_min: f64,
    pub k_max: f64,
    pub k_step: f64,
    pub bands: usize,
    pub adaptive: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { k_min: -10.0, k_max: 60.0, k_step: 0.5, bands: 3, adaptive: true }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub block_size: usize,
    pub restart_rounds: usize,
    pub max_count: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tolerance: 1e-9,
            max_iterations: 45,
            block_size: 8,
            restart_rounds: 3,
            max_count: 25,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    pub window: [f64; 2],
    pub delta: f64,
    pub subwindows: usize,
    pub localization_cutoff_factor: f64,
    pub localization_threshold: f64,
    pub cluster_tol: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            window: [2.25, 5.5],
            delta: 0.05,
            subwindows: 10,
            localization_cutoff_factor: 3.0,
            localization_threshold: 0.8,
            cluster_tol: 5e-3,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundaryConfig {
    /// "dirichlet" | "neumann" | "both" (both = sweep experiments only)
    pub bc: String,
    /// "none" | "geodesic" | "sinusoidal" | "step"
    pub profile: String,
    pub amplitude: f64,
    pub wavelength: f64,
    pub periodic: bool,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        BoundaryConfig {
            bc: "dirichlet".into(),
            profile: "geodesic".into(),
            amplitude: 1.0,
            wavelength: 4.0,
            periodic: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SectorConfig {
    pub ell_min: i64,
    pub ell_max: i64,
}

impl Default for SectorConfig {
    fn default() -> Self {
        SectorConfig { ell_min: -1, ell_max: 3 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// "euclidean" | "hyperbolic"
    pub geometry: String,
    pub theta: f64,
    pub seed: u64,
    pub out_dir: String,
    pub dump_operator: bool,
    pub grid: GridConfig,
    pub sweep: SweepConfig,
    pub solver: SolverConfig,
    pub analysis: AnalysisConfig,
    pub boundary: BoundaryConfig,
    pub sectors: SectorConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: ExperimentKind::BulkLevels,
            geometry: "hyperbolic".into(),
            theta: 2.2,
            seed: 26,
            out_dir: "results".into(),
            dump_operator: false,
            grid: GridConfig::default(),
            sweep: SweepConfig::default(),
            solver: SolverConfig::default(),
            analysis: AnalysisConfig::default(),
            boundary: BoundaryConfig::default(),
            sectors: SectorConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ExperimentConfig = toml::from_str(&text).context("parsing config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn geometry_kind(&self) -> Result<GeometryKind> {
        match self.geometry.as_str() {
            "euclidean" => Ok(GeometryKind::Euclidean),
            "hyperbolic" => Ok(GeometryKind::Hyperbolic),
            other => bail!("unknown geometry '{other}' (euclidean | hyperbolic)"),
        }
    }

    pub fn boundary_conditions(&self) -> Result<Vec<BoundaryCondition>> {
        match self.boundary.bc.as_str() {
            "dirichlet" => Ok(vec![BoundaryCondition::Dirichlet]),
            "neumann" => Ok(vec![BoundaryCondition::Neumann]),
            "both" => Ok(vec![BoundaryCondition::Dirichlet, BoundaryCondition::Neumann]),
            other => bail!("unknown boundary condition '{other}' (dirichlet | neumann | both)"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry_kind()?;
        self.boundary_conditions()?;
        if !self.theta.is_finite() {
            bail!("theta must be finite");
        }
        if self.grid.n < 16 || self.grid.n > 2_000_000 {
            bail!("grid.n = {} out of sane range [16, 2e6]", self.grid.n);
        }
        if self.grid.s_max <= 0.0 || self.grid.s_max > 1e4 {
            bail!("grid.s_max = {} out of sane range", self.grid.s_max);
        }
        if self.grid.h <= 0.0 || self.grid.h > 2.0 {
            bail!("grid.h = {} out of sane range", self.grid.h);
        }
        if self.sweep.k_min >= self.sweep.k_max {
            bail!("sweep.k_min must be below sweep.k_max");
        }
        if self.sweep.bands == 0 || self.sweep.bands > 64 {
            bail!("sweep.bands out of range");
        }
        if self.analysis.window[0] >= self.analysis.window[1] {
            bail!("analysis.window must be nonempty");
        }
        if self.analysis.delta <= 0.0 {
            bail!("analysis.delta must be positive");
        }
        if self.analysis.subwindows == 0 || self.analysis.subwindows > 1000 {
            bail!("analysis.subwindows out of range");
        }
        if !(0.0..=1.0).contains(&self.analysis.localization_threshold) {
            bail!("analysis.localization_threshold must be in [0,1]");
        }
        match self.boundary.profile.as_str() {
            "none" | "geodesic" | "sinusoidal" | "step" => {}
            other => bail!("unknown boundary profile '{other}'"),
        }
        if self.sectors.ell_min > self.sectors.ell_max {
            bail!("sectors.ell_min > sectors.ell_max");
        }
        Ok(())
    }

    /// Canonical serialization of the fully-resolved config.
    pub fn canonical_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn config_hash(&self) -> String {
        hex_digest(self.canonical_toml().as_bytes())
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    let mut s = String::with_capacity(64);
    for b in out {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_lossless() {
        let cfg = ExperimentConfig::default();
        let text = cfg.canonical_toml();
        let back: ExperimentConfig = toml::from_str(&text).unwrap();
        assert_eq!(back.canonical_toml(), text);
        assert_eq!(back.config_hash(), cfg.config_hash());
    }

    #[test]
    fn bad_values_rejected() {
        let mut cfg = ExperimentConfig::default();
        cfg.geometry = "spherical".into();
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.grid.n = 4;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.analysis.window = [5.0, 2.0];
        assert!(cfg.validate().is_err());
    }
}
