use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::solver::{ModelParams, Thresholds, TimeMesh};
use crate::spectral::{Field, GridSpec};

pub const SCHEMA_VERSION: u32 = 1;

/// Exponents shared by every run of a sweep; `p` is only needed by
/// single-run commands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseParams {
    pub alpha: f64,
    pub s: f64,
    pub sigma: f64,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

impl BaseParams {
    pub fn with_p(&self, p: f64) -> Result<ModelParams> {
        ModelParams::new(self.alpha, self.s, self.sigma, p, self.dim)
    }

    pub fn model(&self) -> Result<ModelParams> {
        let p = self.p.ok_or_else(|| FracError::Config("params.p is required for this command".into()))?;
        self.with_p(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    Gaussian,
    Zero,
    Indicator,
}

/// `gaussian`: A exp(−|x|²/width²); `indicator`: A on |x| < width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    pub kind: DataKind,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "one")]
    pub width: f64,
}

fn one() -> f64 {
    1.0
}

impl DataSpec {
    pub fn zero() -> Self {
        DataSpec { kind: DataKind::Zero, amplitude: 0.0, width: 1.0 }
    }

    pub fn gaussian(amplitude: f64, width: f64) -> Self {
        DataSpec { kind: DataKind::Gaussian, amplitude, width }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.amplitude.is_finite() {
            return Err(FracError::Config(format!("amplitude must be finite, got {}", self.amplitude)));
        }
        if !(self.width > 0.0) || !self.width.is_finite() {
            return Err(FracError::Config(format!("width must be positive, got {}", self.width)));
        }
        Ok(())
    }

    pub fn sample(&self, grid: GridSpec) -> Result<Field> {
        self.validate()?;
        let DataSpec { kind, amplitude: a, width: w } = *self;
        match kind {
            DataKind::Zero => Ok(Field::zeros(grid)),
            DataKind::Gaussian => Field::from_fn(grid, |x| a * (-x.iter().map(|v| v * v).sum::<f64>() / (w * w)).exp()),
            DataKind::Indicator => {
                Field::from_fn(grid, |x| if x.iter().map(|v| v * v).sum::<f64>() < w * w { a } else { 0.0 })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub points: usize,
    pub half_width: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { points: 4096, half_width: 200.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_end: f64,
    pub steps: usize,
    #[serde(default = "default_grading")]
    pub grading: f64,
}

fn default_grading() -> f64 {
    2.0
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig { t_end: 50.0, steps: 300, grading: 2.0 }
    }
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

fn default_q() -> f64 {
    4.0
}

/// One JSON document describing a run or a sweep over p.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_schema")]
    pub schema: u32,
    pub params: BaseParams,
    #[serde(default)]
    pub p_values: Vec<f64>,
    pub u0: DataSpec,
    pub w: DataSpec,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default = "default_q")]
    pub q_report: f64,
}

impl SweepConfig {
    /// The one-dimensional desk setup: α = 0.5, s = 0.4, σ = −0.25, u0 = 0 and
    /// a Gaussian forcing of the given amplitude.
    pub fn canonical(amplitude: f64, p_values: Vec<f64>) -> Self {
        SweepConfig {
            schema: SCHEMA_VERSION,
            params: BaseParams { alpha: 0.5, s: 0.4, sigma: -0.25, dim: 1, p: None },
            p_values,
            u0: DataSpec::zero(),
            w: DataSpec::gaussian(amplitude, 1.0),
            grid: GridConfig::default(),
            time: TimeConfig::default(),
            thresholds: Thresholds::default(),
            q_report: 4.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(FracError::Config(format!(
                "unsupported schema {} (expected {SCHEMA_VERSION})",
                self.schema
            )));
        }
        // any p > 1 will do for checking the remaining exponents
        self.params.with_p(2.0).map_err(|e| FracError::Config(e.to_string()))?;
        if let Some(p) = self.params.p {
            self.params.with_p(p).map_err(|e| FracError::Config(e.to_string()))?;
        }
        if let Some(bad) = self.p_values.iter().find(|p| !(**p > 1.0) || !p.is_finite()) {
            return Err(FracError::Config(format!("p values must exceed 1, got {bad}")));
        }
        self.u0.validate()?;
        self.w.validate()?;
        self.grid_spec()?;
        self.mesh()?;
        self.thresholds.validate().map_err(|e| FracError::Config(e.to_string()))?;
        if !(self.q_report >= 1.0) {
            return Err(FracError::Config(format!("q_report must be >= 1, got {}", self.q_report)));
        }
        Ok(())
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.params.dim, self.grid.points, self.grid.half_width).map_err(|e| FracError::Config(e.to_string()))
    }

    pub fn mesh(&self) -> Result<TimeMesh> {
        TimeMesh::graded(self.time.t_end, self.time.steps, self.time.grading).map_err(|e| FracError::Config(e.to_string()))
    }

    /// p values in ascending order.
    pub fn sorted_p_values(&self) -> Vec<f64> {
        let mut ps = self.p_values.clone();
        ps.sort_by(f64::total_cmp);
        ps
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SweepConfig = serde_json::from_str(text).map_err(|e| FracError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| FracError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let cfg = SweepConfig::canonical(0.1, vec![1.5, 4.0]);
        let back = SweepConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn minimal_document_gets_defaults() {
        let text = r#"{"schema": 1, "params": {"alpha": 0.5, "s": 0.4, "sigma": -0.25, "dim": 1},
            "u0": {"kind": "zero"}, "w": {"kind": "gaussian", "amplitude": 0.01}}"#;
        let cfg = SweepConfig::from_json(text).unwrap();
        assert_eq!(cfg.time.t_end, 50.0);
        assert_eq!(cfg.w.width, 1.0);
        assert_eq!(cfg.thresholds.u_max, 1e8);
    }

    #[test]
    fn rejects_bad_documents() {
        let good = SweepConfig::canonical(0.1, vec![2.0]);
        let mut v: serde_json::Value = serde_json::from_str(&good.to_json().unwrap()).unwrap();
        v["schema"] = 2.into();
        assert!(SweepConfig::from_json(&v.to_string()).is_err());
        let mut v: serde_json::Value = serde_json::from_str(&good.to_json().unwrap()).unwrap();
        v["extra"] = 1.into();
        assert!(SweepConfig::from_json(&v.to_string()).is_err());
        let mut bad = good.clone();
        bad.w.width = 0.0;
        assert!(bad.validate().is_err());
        let mut bad = good.clone();
        bad.params.sigma = -0.6;
        assert!(matches!(bad.validate(), Err(FracError::Config(_))));
        let mut bad = good;
        bad.p_values = vec![0.5];
        assert!(bad.validate().is_err());
    }

    #[test]
    fn data_shapes() {
        let grid = GridSpec::new(1, 64, 4.0).unwrap();
        let ind = DataSpec { kind: DataKind::Indicator, amplitude: 2.0, width: 1.0 }.sample(grid).unwrap();
        let h = grid.spacing();
        // points strictly inside (−1, 1)
        let inside = (0..64).filter(|&i| grid.coordinates(i)[0].abs() < 1.0).count();
        assert!((ind.integral() - 2.0 * inside as f64 * h).abs() < 1e-12);
        let g = DataSpec::gaussian(3.0, 0.5).sample(grid).unwrap();
        assert_eq!(g.max_abs(), 3.0);
        assert_eq!(DataSpec::zero().sample(grid).unwrap().max_abs(), 0.0);
    }
}
