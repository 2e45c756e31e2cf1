use serde::{Deserialize, Serialize};

use crate::error::{domain, FracError, Result};

/// Exponents of the forced problem ∂_t^α u + (−Δ)^s u = |u|^p + t^σ w in
/// `dim` space dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub s: f64,
    pub sigma: f64,
    pub p: f64,
    pub dim: usize,
}

impl ModelParams {
    pub fn new(alpha: f64, s: f64, sigma: f64, p: f64, dim: usize) -> Result<Self> {
        let params = ModelParams { alpha, s, sigma, p, dim };
        params.validate()?;
        Ok(params)
    }

    /// The one-dimensional desk configuration α = 0.5, s = 0.4, σ = −0.25.
    pub fn canonical(p: f64) -> Self {
        ModelParams { alpha: 0.5, s: 0.4, sigma: -0.25, p, dim: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_extended()?;
        if self.sigma <= -self.alpha {
            return Err(FracError::Regime(format!(
                "sigma = {} must exceed -alpha = {}",
                self.sigma, -self.alpha
            )));
        }
        Ok(())
    }

    /// Range checks that admit σ ∈ (−1, −α]. Exponent formulas still make
    /// sense there, the existence theory does not.
    pub fn validate_extended(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return domain(format!("alpha must lie in (0,1], got {}", self.alpha));
        }
        if !(self.s > 0.0 && self.s <= 1.0) {
            return domain(format!("s must lie in (0,1], got {}", self.s));
        }
        if !(self.p > 1.0) || !self.p.is_finite() {
            return domain(format!("p must exceed 1, got {}", self.p));
        }
        if !(1..=3).contains(&self.dim) {
            return domain(format!("dimension must be 1, 2 or 3, got {}", self.dim));
        }
        if !(self.sigma > -1.0) || !self.sigma.is_finite() {
            return domain(format!("sigma must exceed -1, got {}", self.sigma));
        }
        Ok(())
    }

    /// Nα/(2s), the diffusive scaling factor that appears in every exponent.
    pub fn scaling(&self) -> f64 {
        self.dim as f64 * self.alpha / (2.0 * self.s)
    }

    pub fn with_p(&self, p: f64) -> Self {
        ModelParams { p, ..*self }
    }
}

/// Time nodes t_j = T (j/M)^g.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeMesh {
    nodes: Vec<f64>,
    grading: f64,
}

impl TimeMesh {
    pub fn graded(t_end: f64, steps: usize, grading: f64) -> Result<Self> {
        if !(t_end > 0.0) || !t_end.is_finite() {
            return domain(format!("final time must be positive, got {t_end}"));
        }
        if steps == 0 {
            return domain("mesh needs at least one step");
        }
        if !(grading >= 1.0) || !grading.is_finite() {
            return domain(format!("grading exponent must be >= 1, got {grading}"));
        }
        let m = steps as f64;
        let mut nodes: Vec<f64> = (0..=steps).map(|j| t_end * (j as f64 / m).powf(grading)).collect();
        nodes[steps] = t_end;
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(FracError::Numerical("graded mesh collapsed below machine resolution".into()));
        }
        Ok(TimeMesh { nodes, grading })
    }

    pub fn uniform(t_end: f64, steps: usize) -> Result<Self> {
        Self::graded(t_end, steps, 1.0)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn t_end(&self) -> f64 {
        self.nodes[self.steps()]
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn max_step(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}
