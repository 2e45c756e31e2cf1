//! Discrete Riemann-Liouville and Caputo operators on sampled signals.
//!
//! All schemes treat the signal as piecewise linear between nodes and
//! integrate the weakly singular kernels exactly on every cell, so nonuniform
//! (graded) meshes are supported throughout.

use crate::error::{domain, FracError, Result};
use crate::special::gamma;

/// Samples of a signal on `0 = t_0 < t_1 < ... < t_M`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(FracError::Size(format!(
                "{} nodes but {} values",
                nodes.len(),
                values.len()
            )));
        }
        if nodes.is_empty() {
            return Err(FracError::Size("time series needs at least one node".into()));
        }
        if nodes[0] != 0.0 {
            return domain(format!("first node must be 0, got {}", nodes[0]));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || nodes.iter().any(|t| !t.is_finite()) {
            return domain("nodes must be finite and strictly increasing");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return domain("values must be finite");
        }
        Ok(TimeSeries { nodes, values })
    }

    /// Sample `f` on the given nodes.
    pub fn from_fn(nodes: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = nodes.iter().map(|&t| f(t)).collect();
        TimeSeries::new(nodes, values)
    }

    /// `m + 1` equally spaced nodes on `[0, t_end]`.
    pub fn uniform_nodes(t_end: f64, m: usize) -> Vec<f64> {
        (0..=m).map(|j| t_end * j as f64 / m as f64).collect()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn last_time(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Trapezoid rule for `∫_0^T values dt`.
    pub fn trapezoid(&self) -> f64 {
        self.nodes
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
            .sum()
    }
}

/// Result of a discrete derivative: the values plus the indices at which the
/// scheme has no value (reported there as 0).
#[derive(Debug, Clone, PartialEq)]
pub struct Derivative {
    pub series: TimeSeries,
    pub undefined_nodes: Vec<usize>,
}

fn check_order(alpha: f64, upper_closed: bool) -> Result<()> {
    let ok = alpha > 0.0 && if upper_closed { alpha <= 1.0 } else { alpha < 1.0 };
    if ok && alpha.is_finite() {
        Ok(())
    } else {
        let range = if upper_closed { "(0,1]" } else { "(0,1)" };
        domain(format!("order alpha must lie in {range}, got {alpha}"))
    }
}

/// Product-trapezoid Riemann-Liouville integral `I^α u` at every node.
pub fn rl_integral(u: &TimeSeries, alpha: f64) -> Result<TimeSeries> {
    check_order(alpha, true)?;
    let t = &u.nodes;
    let v = &u.values;
    let ga2 = gamma(alpha + 2.0)?;
    let mut out = vec![0.0; t.len()];
    for n in 1..t.len() {
        let mut acc = 0.0;
        for j in 0..n {
            // distances from t_n to the cell ends, a < b
            let a = t[n] - t[j + 1];
            let b = t[n] - t[j];
            let h = b - a;
            let ba = b.powf(alpha);
            let aa = if a > 0.0 { a.powf(alpha) } else { 0.0 };
            // ∫_a^b τ^{α-1} dτ and ∫_a^b τ^{α-1}(b-τ) dτ, times α(α+1)
            let i0 = (alpha + 1.0) * (ba - aa);
            let i1 = (alpha + 1.0) * b * (ba - aa) - alpha * (b * ba - a * aa);
            acc += v[j] * (i0 - i1 / h) + v[j + 1] * (i1 / h);
        }
        out[n] = acc / ga2;
    }
    TimeSeries::new(t.clone(), out)
}

/// L1-scheme Caputo derivative. Node 0 has no value and is reported as 0.
pub fn caputo_derivative(u: &TimeSeries, alpha: f64) -> Result<Derivative> {
    check_order(alpha, false)?;
    if u.len() < 2 {
        return Err(FracError::Size("Caputo derivative needs at least 2 nodes".into()));
    }
    let t = &u.nodes;
    let v = &u.values;
    let e = 1.0 - alpha;
    let g = gamma(2.0 - alpha)?;
    let mut out = vec![0.0; t.len()];
    for n in 1..t.len() {
        let mut acc = 0.0;
        for j in 0..n {
            let a = t[n] - t[j + 1];
            let b = t[n] - t[j];
            let slope = (v[j + 1] - v[j]) / (t[j + 1] - t[j]);
            let aa = if a > 0.0 { a.powf(e) } else { 0.0 };
            acc += slope * (b.powf(e) - aa);
        }
        out[n] = acc / g;
    }
    Ok(Derivative { series: TimeSeries::new(t.clone(), out)?, undefined_nodes: vec![0] })
}

/// Right-sided Riemann-Liouville derivative `D_{t|T}^α v` for a signal with
/// `v(T) = 0`, where `T` is the last node.
///
/// Sign convention: `D_{t|T}^α v = -(1/Γ(1-α)) d/dt ∫_t^T (s-t)^{-α} v(s) ds`,
/// so that the operator tends to `-v'` as `α → 1`. The last node is reported
/// as 0 and flagged.
pub fn rl_right_derivative(v: &TimeSeries, alpha: f64, t_end: f64) -> Result<Derivative> {
    check_order(alpha, false)?;
    if v.len() < 2 {
        return Err(FracError::Size("right derivative needs at least 2 nodes".into()));
    }
    let t = &v.nodes;
    let x = &v.values;
    let last = t.len() - 1;
    if (t[last] - t_end).abs() > 1e-12 * t_end.abs().max(1.0) {
        return Err(FracError::Precondition(format!(
            "series ends at {} but T = {t_end}",
            t[last]
        )));
    }
    if x[last].abs() > 1e-12 {
        return Err(FracError::Precondition(format!("v(T) must vanish, got {}", x[last])));
    }
    let e = 1.0 - alpha;
    let g = gamma(2.0 - alpha)?;
    let mut out = vec![0.0; t.len()];
    for i in 0..last {
        let mut acc = 0.0;
        for j in i..last {
            let a = t[j] - t[i];
            let b = t[j + 1] - t[i];
            let slope = (x[j + 1] - x[j]) / (t[j + 1] - t[j]);
            let aa = if a > 0.0 { a.powf(e) } else { 0.0 };
            acc += slope * (b.powf(e) - aa);
        }
        out[i] = -acc / g;
    }
    Ok(Derivative { series: TimeSeries::new(t.clone(), out)?, undefined_nodes: vec![last] })
}
