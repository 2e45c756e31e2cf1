use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criticality::{beta_value, forced_critical_exponent, scale_critical_exponent};
use crate::error::{FracError, Result};
use crate::solver::{integrate, Classification, SimResult, SolverOptions};

use super::config::SweepConfig;

pub const MASS_NOTE: &str = "forcing has nonpositive mass: the blow-up theorem does not apply";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: f64,
    pub p_c: f64,
    pub p_star: Option<f64>,
    pub beta: f64,
    pub classification: String,
    pub blowup_time_est: Option<f64>,
    pub decay_exponent: Option<f64>,
    pub r_squared: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SweepRow {
    pub fn outcome(&self) -> Option<Classification> {
        match self.classification.as_str() {
            "Global" => Some(Classification::Global),
            "Undetermined" => Some(Classification::Undetermined),
            "BlowUp" => Some(Classification::BlowUp { t_est: self.blowup_time_est.unwrap_or(f64::NAN) }),
            _ => None,
        }
    }
}

/// Runs the configured simulation at one value of p.
pub fn simulate(config: &SweepConfig, p: f64) -> Result<SimResult> {
    config.validate()?;
    let params = config.params.with_p(p)?;
    let grid = config.grid_spec()?;
    let u0 = config.u0.sample(grid)?;
    let w = config.w.sample(grid)?;
    let opts = SolverOptions { q_report: config.q_report, thresholds: config.thresholds, ..SolverOptions::default() };
    integrate(&params, &u0, &w, &config.mesh()?, &opts)
}

fn row_for(config: &SweepConfig, p: f64, mass_positive: bool) -> SweepRow {
    let base = config.params;
    let params = crate::solver::ModelParams { alpha: base.alpha, s: base.s, sigma: base.sigma, p, dim: base.dim };
    let mut row = SweepRow {
        p,
        p_c: scale_critical_exponent(&params),
        p_star: forced_critical_exponent(&params),
        beta: beta_value(&params, config.q_report),
        classification: "Error".into(),
        blowup_time_est: None,
        decay_exponent: None,
        r_squared: None,
        notes: Vec::new(),
        error: None,
    };
    if !mass_positive {
        row.notes.push(MASS_NOTE.into());
    }
    match simulate(config, p) {
        Ok(res) => {
            row.classification = res.classification.label().into();
            row.blowup_time_est = res.classification.blowup_time();
            row.decay_exponent = res.decay_fit.map(|f| f.exponent);
            row.r_squared = res.decay_fit.map(|f| f.r_squared);
            row.notes.extend(res.resolution_warnings);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// One classified simulation per p value, in ascending p order. Rows run
/// concurrently; a failing row records its error instead of aborting.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let mass = config.w.sample(config.grid_spec()?)?.integral();
    let ps = config.sorted_p_values();
    // duplicates are simulated once
    let unique: Vec<f64> = ps.iter().copied().fold(Vec::new(), |mut v, p| {
        if v.last() != Some(&p) {
            v.push(p);
        }
        v
    });
    let rows: Vec<SweepRow> = unique.par_iter().map(|&p| row_for(config, p, mass > 0.0)).collect();
    let by_p: BTreeMap<u64, &SweepRow> = unique.iter().map(|p| p.to_bits()).zip(&rows).collect();
    Ok(ps.iter().map(|p| by_p[&p.to_bits()].clone()).collect())
}

pub const SWEEP_COLUMNS: [&str; 8] =
    ["p", "p_c", "p_star", "beta", "classification", "blowup_time_est", "decay_exponent", "r_squared"];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_COLUMNS).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.p.to_string(),
            r.p_c.to_string(),
            opt(r.p_star),
            r.beta.to_string(),
            r.classification.clone(),
            opt(r.blowup_time_est),
            opt(r.decay_exponent),
            opt(r.r_squared),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_history_csv<W: Write>(res: &SimResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "Lq_norm", "Linf_norm", "tbeta_Lq"]).map_err(csv_err)?;
    for h in &res.history {
        w.write_record([h.t, h.lq_norm, h.linf_norm, h.tbeta_lq].map(|v| v.to_string())).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> FracError {
    FracError::Io(std::io::Error::other(e.to_string()))
}

/// Outcome of the p* bracketing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketReport {
    /// Largest p classified BlowUp.
    pub p_lo: f64,
    /// Smallest p classified Global.
    pub p_hi: f64,
    pub midpoint: f64,
    /// Bisection bracket of the blow-up edge: [largest BlowUp, smallest other].
    pub blowup_edge: (f64, f64),
    /// Bisection bracket of the global edge: [largest other, smallest Global].
    pub global_edge: (f64, f64),
    /// True when Undetermined outcomes separate the two edges.
    pub widened: bool,
    pub undetermined: Vec<f64>,
    /// Every probe in the order it was made.
    pub probes: Vec<(f64, String)>,
}

/// Two bisections on p: one locating where BlowUp stops, one locating where
/// Global starts. For a classifier without Undetermined outcomes both edges
/// coincide and the bracket is an ordinary bisection bracket.
pub fn bracket_with<F>(initial: &[f64], tol_p: f64, mut classify: F) -> Result<BracketReport>
where
    F: FnMut(f64) -> Result<Classification>,
{
    if !(tol_p > 0.0) {
        return Err(FracError::Config(format!("tol_p must be positive, got {tol_p}")));
    }
    let mut seen: BTreeMap<u64, (f64, Classification)> = BTreeMap::new();
    let mut probes = Vec::new();
    let mut probe = |p: f64, seen: &mut BTreeMap<u64, (f64, Classification)>| -> Result<Classification> {
        if let Some((_, c)) = seen.get(&p.to_bits()) {
            return Ok(*c);
        }
        let c = classify(p)?;
        seen.insert(p.to_bits(), (p, c));
        probes.push((p, c.label().to_string()));
        Ok(c)
    };
    for &p in initial {
        probe(p, &mut seen)?;
    }
    let is_blowup = |c: &Classification| matches!(c, Classification::BlowUp { .. });
    let is_global = |c: &Classification| matches!(c, Classification::Global);
    let lo_b = seen.values().filter(|(_, c)| is_blowup(c)).map(|(p, _)| *p).fold(f64::NAN, f64::max);
    let hi_g = seen.values().filter(|(_, c)| is_global(c)).map(|(p, _)| *p).fold(f64::NAN, f64::min);
    if lo_b.is_nan() || hi_g.is_nan() || lo_b >= hi_g {
        return Err(FracError::Bracketing(format!(
            "initial p values do not straddle a BlowUp/Global transition (largest BlowUp {lo_b}, smallest Global {hi_g})"
        )));
    }
    let nearest_above = |seen: &BTreeMap<u64, (f64, Classification)>, x: f64| {
        seen.values().filter(|(p, c)| *p > x && !is_blowup(c)).map(|(p, _)| *p).fold(f64::INFINITY, f64::min)
    };
    let nearest_below = |seen: &BTreeMap<u64, (f64, Classification)>, x: f64| {
        seen.values().filter(|(p, c)| *p < x && !is_global(c)).map(|(p, _)| *p).fold(f64::NEG_INFINITY, f64::max)
    };

    let (mut b_lo, mut b_hi) = (lo_b, nearest_above(&seen, lo_b));
    while b_hi - b_lo > tol_p {
        let mid = 0.5 * (b_lo + b_hi);
        if is_blowup(&probe(mid, &mut seen)?) {
            b_lo = mid;
        } else {
            b_hi = mid;
        }
    }
    let (mut g_lo, mut g_hi) = (nearest_below(&seen, hi_g), hi_g);
    // the blow-up edge may have found a larger BlowUp or a smaller Global
    g_lo = g_lo.max(b_lo);
    g_hi = g_hi.min(seen.values().filter(|(_, c)| is_global(c)).map(|(p, _)| *p).fold(f64::INFINITY, f64::min));
    while g_hi - g_lo > tol_p {
        let mid = 0.5 * (g_lo + g_hi);
        if is_global(&probe(mid, &mut seen)?) {
            g_hi = mid;
        } else {
            g_lo = mid;
        }
    }
    let p_lo = seen.values().filter(|(_, c)| is_blowup(c)).map(|(p, _)| *p).fold(f64::NEG_INFINITY, f64::max);
    let p_hi = seen.values().filter(|(_, c)| is_global(c)).map(|(p, _)| *p).fold(f64::INFINITY, f64::min);
    let undetermined: Vec<f64> = seen
        .values()
        .filter(|(p, c)| matches!(c, Classification::Undetermined) && *p > p_lo && *p < p_hi)
        .map(|(p, _)| *p)
        .collect();
    Ok(BracketReport {
        p_lo,
        p_hi,
        midpoint: 0.5 * (p_lo + p_hi),
        blowup_edge: (b_lo, b_hi),
        global_edge: (g_lo, g_hi),
        widened: !undetermined.is_empty(),
        undetermined,
        probes,
    })
}

/// Brackets the observed BlowUp/Global transition in p for the configured
/// data, starting from `config.p_values`.
pub fn bracket_pstar(config: &SweepConfig, tol_p: f64) -> Result<BracketReport> {
    config.validate()?;
    let initial = config.sorted_p_values();
    if initial.len() < 2 {
        return Err(FracError::Bracketing("need at least two initial p values".into()));
    }
    // the initial probes are independent, so run them as a sweep
    let rows = run_sweep(config)?;
    let mut first: BTreeMap<u64, Classification> = BTreeMap::new();
    for r in &rows {
        let c = match (&r.error, r.outcome()) {
            (None, Some(c)) => c,
            _ => return Err(FracError::Numerical(format!("probe at p = {} failed: {:?}", r.p, r.error))),
        };
        first.insert(r.p.to_bits(), c);
    }
    bracket_with(&initial, tol_p, |p| match first.get(&p.to_bits()) {
        Some(c) => Ok(*c),
        None => Ok(simulate(config, p)?.classification),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(at: f64) -> impl FnMut(f64) -> Result<Classification> {
        move |p| Ok(if p < at { Classification::BlowUp { t_est: 1.0 } } else { Classification::Global })
    }

    #[test]
    fn bisection_on_step_function() {
        let tol = 0.05;
        let r = bracket_with(&[1.2, 3.7], tol, step(2.0)).unwrap();
        assert!(r.p_lo < 2.0 && r.p_hi >= 2.0);
        assert!(r.p_hi - r.p_lo <= tol);
        assert!(r.p_lo >= 2.0 - tol && r.p_hi <= 2.0 + tol);
        assert!(!r.widened);
        assert_eq!(r.blowup_edge, r.global_edge);
    }

    #[test]
    fn undetermined_band_widens_bracket() {
        let classify = |p: f64| {
            Ok(if p < 1.8 {
                Classification::BlowUp { t_est: 1.0 }
            } else if p < 2.9 {
                Classification::Undetermined
            } else {
                Classification::Global
            })
        };
        let r = bracket_with(&[1.0, 4.0], 0.1, classify).unwrap();
        assert!(r.widened);
        assert!(r.blowup_edge.0 < 1.8 && r.blowup_edge.1 >= 1.8 && r.blowup_edge.1 - r.blowup_edge.0 <= 0.1);
        assert!(r.global_edge.0 < 2.9 && r.global_edge.1 >= 2.9 && r.global_edge.1 - r.global_edge.0 <= 0.1);
        assert_eq!(r.p_lo, r.blowup_edge.0);
        assert_eq!(r.p_hi, r.global_edge.1);
    }

    #[test]
    fn no_straddle_is_an_error() {
        let all_global = |_: f64| Ok(Classification::Global);
        assert!(matches!(bracket_with(&[1.5, 3.0], 0.1, all_global), Err(FracError::Bracketing(_))));
        assert!(matches!(bracket_with(&[1.5, 3.0], 0.1, step(1.0)), Err(FracError::Bracketing(_))));
    }

    #[test]
    fn csv_columns_are_fixed() {
        let row = SweepRow {
            p: 2.0,
            p_c: 1.25,
            p_star: Some(7.0 / 3.0),
            beta: 0.1,
            classification: "Global".into(),
            blowup_time_est: None,
            decay_exponent: Some(-0.1),
            r_squared: Some(0.99),
            notes: vec![],
            error: None,
        };
        let mut buf = Vec::new();
        write_sweep_csv(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), SWEEP_COLUMNS.join(","));
        assert_eq!(lines.next().unwrap(), "2,1.25,2.3333333333333335,0.1,Global,,-0.1,0.99");
    }
}
