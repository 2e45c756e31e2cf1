use serde::{Deserialize, Serialize};

use crate::error::{domain, FracError, Result};
use crate::quadrature::fit_line;

/// Blow-up detection thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Sup-norm level treated as blow-up.
    pub u_max: f64,
    /// Per-step growth ratio of the sup norm treated as blow-up.
    pub r_max: f64,
    /// The ratio test only applies once the previous sup norm reaches this
    /// level, so that growth out of tiny initial values does not trigger it.
    pub ratio_floor: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { u_max: 1e8, r_max: 10.0, ratio_floor: 1.0 }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.u_max > 0.0 && self.r_max > 1.0 && self.ratio_floor >= 0.0) {
            return domain(format!("invalid thresholds {self:?}"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Classification {
    Global,
    BlowUp { t_est: f64 },
    Undetermined,
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Classification::Global => "Global",
            Classification::BlowUp { .. } => "BlowUp",
            Classification::Undetermined => "Undetermined",
        }
    }

    pub fn blowup_time(&self) -> Option<f64> {
        match self {
            Classification::BlowUp { t_est } => Some(*t_est),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryPoint {
    pub t: f64,
    pub lq_norm: f64,
    pub linf_norm: f64,
    /// t^β ‖u(t)‖_q.
    pub tbeta_lq: f64,
}

impl HistoryPoint {
    pub fn new(t: f64, lq_norm: f64, linf_norm: f64, beta: f64) -> Self {
        let tbeta_lq = if t > 0.0 || beta == 0.0 {
            t.powf(beta) * lq_norm
        } else if beta > 0.0 || lq_norm == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        HistoryPoint { t, lq_norm, linf_norm, tbeta_lq }
    }
}

/// True when the step from `prev` to `cur` fires a blow-up trigger.
pub fn blowup_trigger(prev: Option<&HistoryPoint>, cur: &HistoryPoint, th: &Thresholds) -> bool {
    if !cur.linf_norm.is_finite() || !cur.lq_norm.is_finite() || cur.linf_norm >= th.u_max {
        return true;
    }
    match prev {
        Some(p) if p.linf_norm >= th.ratio_floor && p.linf_norm > 0.0 => cur.linf_norm / p.linf_norm >= th.r_max,
        _ => false,
    }
}

/// Classifies a (possibly truncated) run that was meant to reach `t_end`.
pub fn classify(history: &[HistoryPoint], th: &Thresholds, t_end: f64) -> Classification {
    for (i, cur) in history.iter().enumerate() {
        let prev = if i > 0 { history.get(i - 1) } else { None };
        if blowup_trigger(prev, cur, th) {
            return Classification::BlowUp { t_est: cur.t };
        }
    }
    let Some(last) = history.last() else {
        return Classification::Undetermined;
    };
    if last.t < t_end * (1.0 - 1e-12) {
        return Classification::Undetermined;
    }
    let window: Vec<f64> = history
        .iter()
        .filter(|h| h.t >= 0.75 * t_end && h.t > 0.0)
        .map(|h| h.tbeta_lq)
        .collect();
    let nonincreasing = window.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) || w[1] <= 0.0);
    if nonincreasing {
        Classification::Global
    } else {
        Classification::Undetermined
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub r_squared: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub points: usize,
}

/// Least-squares slope of log‖u‖_q against log t over `t_lo <= t <= t_hi`.
pub fn estimate_decay_exponent(history: &[HistoryPoint], t_lo: f64, t_hi: f64) -> Result<DecayFit> {
    let pts: Vec<&HistoryPoint> = history.iter().filter(|h| h.t >= t_lo && h.t <= t_hi && h.t > 0.0).collect();
    if pts.len() < 10 {
        return Err(FracError::Precondition(format!(
            "decay fit needs at least 10 points in [{t_lo}, {t_hi}], found {}",
            pts.len()
        )));
    }
    if pts.iter().any(|h| !(h.lq_norm > 0.0)) {
        return domain("decay fit needs positive norms");
    }
    let xs: Vec<f64> = pts.iter().map(|h| h.t.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|h| h.lq_norm.ln()).collect();
    let fit = fit_line(&xs, &ys).ok_or_else(|| FracError::Numerical("degenerate decay fit".into()))?;
    Ok(DecayFit { exponent: fit.slope, r_squared: fit.r_squared, t_lo, t_hi, points: pts.len() })
}
