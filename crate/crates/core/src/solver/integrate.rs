use num_complex::Complex64;
use rayon::prelude::*;

use crate::criticality::beta_value;
use crate::error::{FracError, Result};
use crate::spectral::{lq_norm_values, Field, GridSpec, SpectralField, Transform, TAIL_ENERGY_LIMIT};

use super::classify::{blowup_trigger, classify, estimate_decay_exponent, Classification, DecayFit, HistoryPoint, Thresholds};
use super::params::{ModelParams, TimeMesh};
use super::weights::{fill_left_row, trapezoid_row, StepKernels};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Lebesgue exponent of the reported norm.
    pub q_report: f64,
    pub thresholds: Thresholds,
    /// Coefficient in front of |u|^p; zero gives the linear problem.
    pub nonlinearity: f64,
    /// Keep the field at every node in the result.
    pub keep_fields: bool,
    /// Spectral tail check every this many steps (and at the last node).
    pub monitor_every: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            q_report: 4.0,
            thresholds: Thresholds::default(),
            nonlinearity: 1.0,
            keep_fields: false,
            monitor_every: 25,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimResult {
    pub classification: Classification,
    pub history: Vec<HistoryPoint>,
    /// Fit of log‖u‖_q against log t over the last quarter of a complete run.
    pub decay_fit: Option<DecayFit>,
    pub resolution_warnings: Vec<String>,
    pub beta: f64,
    pub q_report: f64,
    /// Field at the last computed node; `None` if it overflowed.
    pub final_field: Option<Field>,
    /// Fields at every node, when requested.
    pub fields: Vec<Field>,
}

/// Modes sharing one value of |ξ|², and that value's λ = |ξ|^{2s}.
pub(crate) struct ModeGroups {
    pub lam: Vec<f64>,
    pub members: Vec<Vec<usize>>,
}

impl ModeGroups {
    pub fn new(grid: &GridSpec, s: f64) -> Self {
        let (xi_sq, group) = grid.mode_groups();
        let mut members = vec![Vec::new(); xi_sq.len()];
        for (idx, &g) in group.iter().enumerate() {
            members[g].push(idx);
        }
        let lam = xi_sq.iter().map(|x| x.powf(s)).collect();
        ModeGroups { lam, members }
    }

    /// Evaluates `f(group, λ)` per group in parallel and scatters the
    /// per-mode outputs into `out`.
    pub fn fill<F>(&self, out: &mut [Complex64], f: F)
    where
        F: Fn(usize, f64) -> Vec<Complex64> + Sync,
    {
        let parts: Vec<Vec<Complex64>> = (0..self.lam.len()).into_par_iter().map(|g| f(g, self.lam[g])).collect();
        for (g, vals) in parts.into_iter().enumerate() {
            for (&idx, v) in self.members[g].iter().zip(vals) {
                out[idx] = v;
            }
        }
    }
}

pub(crate) fn check_inputs(params: &ModelParams, u0: &Field, w: &Field) -> Result<GridSpec> {
    params.validate()?;
    if u0.grid() != w.grid() {
        return Err(FracError::Size("u0 and w live on different grids".into()));
    }
    if u0.grid().dim != params.dim {
        return Err(FracError::Size(format!(
            "grid dimension {} does not match model dimension {}",
            u0.grid().dim,
            params.dim
        )));
    }
    Ok(*u0.grid())
}

fn power_nonlinearity(values: &[f64], p: f64, coef: f64) -> Vec<f64> {
    values.iter().map(|v| coef * v.abs().powf(p)).collect()
}

/// Time-steps the mild formulation with exact Mittag-Leffler history weights
/// and the nonlinearity frozen at left endpoints.
pub fn integrate(
    params: &ModelParams,
    u0: &Field,
    w: &Field,
    mesh: &TimeMesh,
    opts: &SolverOptions,
) -> Result<SimResult> {
    let grid = check_inputs(params, u0, w)?;
    opts.thresholds.validate()?;
    if !(opts.q_report >= 1.0) {
        return crate::error::domain(format!("q_report must be >= 1, got {}", opts.q_report));
    }
    let q = opts.q_report;
    let beta = beta_value(params, q);
    let transform = Transform::new(&grid)?;
    let groups = ModeGroups::new(&grid, params.s);
    let kernels = StepKernels::new(params)?;
    let cell = grid.cell_volume();
    let len = grid.len();

    let mut u0_hat = vec![Complex64::default(); len];
    transform.forward_into(u0.values(), &mut u0_hat)?;
    let mut w_hat = vec![Complex64::default(); len];
    transform.forward_into(w.values(), &mut w_hat)?;

    let t = mesh.nodes();
    let steps = mesh.steps();
    let mut history = Vec::with_capacity(steps + 1);
    history.push(HistoryPoint::new(0.0, lq_norm_values(u0.values(), cell, q)?, u0.max_abs(), beta));
    let mut fields = Vec::new();
    if opts.keep_fields {
        fields.push(u0.clone());
    }
    let mut warnings = Vec::new();

    let mut nonlin_hat: Vec<Vec<Complex64>> = Vec::with_capacity(steps + 1);
    let mut buf = vec![Complex64::default(); len];
    let track_nonlinear = opts.nonlinearity != 0.0;
    if track_nonlinear {
        transform.forward_into(&power_nonlinearity(u0.values(), params.p, opts.nonlinearity), &mut buf)?;
        nonlin_hat.push(buf.clone());
    }
    let mut u = u0.values().to_vec();
    let mut halted = false;

    for n in 1..=steps {
        let tn = t[n];
        let dist: Vec<f64> = (0..=n).map(|j| (tn - t[j]).powf(params.alpha)).collect();
        let history_hat = &nonlin_hat;
        groups.fill(&mut buf, |g, lam| {
            let z = kernels.z(lam, tn);
            let force = kernels.forcing(lam, tn);
            let mut weights = Vec::with_capacity(n);
            if track_nonlinear {
                fill_left_row(&kernels, lam, &dist, &mut weights);
            }
            groups.members[g]
                .iter()
                .map(|&idx| {
                    let mut acc = u0_hat[idx] * z + w_hat[idx] * force;
                    for (wj, nj) in weights.iter().zip(history_hat) {
                        acc += nj[idx] * *wj;
                    }
                    acc
                })
                .collect()
        });
        let monitor = n == steps || (opts.monitor_every > 0 && n % opts.monitor_every == 0);
        if monitor {
            let tail = SpectralField::new(grid, buf.clone())?.tail_energy_fraction();
            if tail > TAIL_ENERGY_LIMIT {
                warnings.push(format!("spectral tail energy fraction {tail:.2e} at t = {tn:.6}"));
            }
        }
        transform.inverse_into(&mut buf, &mut u)?;

        let linf = if u.iter().all(|v| v.is_finite()) {
            u.iter().fold(0.0f64, |m, v| m.max(v.abs()))
        } else {
            f64::INFINITY
        };
        let lq = if linf.is_finite() { lq_norm_values(&u, cell, q)? } else { f64::NAN };
        let point = HistoryPoint::new(tn, lq, linf, beta);
        let fired = blowup_trigger(history.last(), &point, &opts.thresholds);
        history.push(point);
        if opts.keep_fields && linf.is_finite() {
            fields.push(Field::new(grid, u.clone())?);
        }
        if fired {
            halted = true;
            break;
        }
        if track_nonlinear && n < steps {
            let mut nh = vec![Complex64::default(); len];
            transform.forward_into(&power_nonlinearity(&u, params.p, opts.nonlinearity), &mut nh)?;
            nonlin_hat.push(nh);
        }
    }

    let classification = classify(&history, &opts.thresholds, mesh.t_end());
    let decay_fit = if halted {
        None
    } else {
        estimate_decay_exponent(&history, 0.75 * mesh.t_end(), mesh.t_end()).ok()
    };
    let final_field = if u.iter().all(|v| v.is_finite()) { Some(Field::new(grid, u)?) } else { None };
    Ok(SimResult {
        classification,
        history,
        decay_fit,
        resolution_warnings: warnings,
        beta,
        q_report: q,
        final_field,
        fields,
    })
}

/// The two linear parts of the mild formula at time `t`: the propagated
/// initial datum Z(t)*u0 and the forcing response ∫₀^t τ^σ Y(t−τ)*w dτ.
pub fn linear_parts(params: &ModelParams, u0: &Field, w: &Field, t: f64) -> Result<(Field, Field)> {
    let grid = check_inputs(params, u0, w)?;
    if !(t > 0.0) {
        return crate::error::domain(format!("time must be positive, got {t}"));
    }
    let transform = Transform::new(&grid)?;
    let groups = ModeGroups::new(&grid, params.s);
    let kernels = StepKernels::new(params)?;
    let len = grid.len();
    let mut out = Vec::with_capacity(2);
    for (data, forcing) in [(u0, false), (w, true)] {
        let mut hat = vec![Complex64::default(); len];
        transform.forward_into(data.values(), &mut hat)?;
        let mut buf = vec![Complex64::default(); len];
        groups.fill(&mut buf, |g, lam| {
            let m = if forcing { kernels.forcing(lam, t) } else { kernels.z(lam, t) };
            groups.members[g].iter().map(|&idx| hat[idx] * m).collect()
        });
        let mut v = vec![0.0; len];
        transform.inverse_into(&mut buf, &mut v)?;
        out.push(Field::new(grid, v)?);
    }
    let forced = out.pop().expect("two parts");
    let propagated = out.pop().expect("two parts");
    Ok((propagated, forced))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    pub tol: f64,
    pub max_iterations: usize,
    pub nonlinearity: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions { tol: 1e-12, max_iterations: 200, nonlinearity: 1.0 }
    }
}

#[derive(Debug, Clone)]
pub struct PicardResult {
    /// Fixed point sampled at every mesh node.
    pub fields: Vec<Field>,
    pub iterations: usize,
    /// Sup-norm change of each iteration.
    pub changes: Vec<f64>,
    /// Largest observed ratio of successive changes (0 when fewer than two
    /// nonzero changes were seen).
    pub contraction_factor: f64,
}

/// Plain fixed-point iteration of the full Duhamel map on the mesh. The
/// nonlinearity is interpolated linearly in time against the exact kernel,
/// an independent discretization from [`integrate`].
pub fn picard_solve(
    params: &ModelParams,
    u0: &Field,
    w: &Field,
    mesh: &TimeMesh,
    opts: &PicardOptions,
) -> Result<PicardResult> {
    let grid = check_inputs(params, u0, w)?;
    if !(opts.tol > 0.0) {
        return crate::error::domain("Picard tolerance must be positive");
    }
    let transform = Transform::new(&grid)?;
    let groups = ModeGroups::new(&grid, params.s);
    let kernels = StepKernels::new(params)?;
    let t = mesh.nodes();
    let steps = mesh.steps();
    let len = grid.len();

    // rows[g][n] holds the trapezoid coefficients for node n of group g
    let rows: Vec<Vec<Vec<f64>>> = groups
        .lam
        .par_iter()
        .map(|&lam| {
            (0..=steps)
                .map(|n| {
                    let mut r = Vec::new();
                    if n > 0 {
                        trapezoid_row(&kernels, lam, t, n, &mut r);
                    }
                    r
                })
                .collect()
        })
        .collect();

    let mut u0_hat = vec![Complex64::default(); len];
    transform.forward_into(u0.values(), &mut u0_hat)?;
    let mut w_hat = vec![Complex64::default(); len];
    transform.forward_into(w.values(), &mut w_hat)?;

    let mut linear: Vec<Vec<f64>> = Vec::with_capacity(steps + 1);
    let mut buf = vec![Complex64::default(); len];
    linear.push(u0.values().to_vec());
    for &tn in &t[1..] {
        groups.fill(&mut buf, |g, lam| {
            let z = kernels.z(lam, tn);
            let force = kernels.forcing(lam, tn);
            groups.members[g].iter().map(|&idx| u0_hat[idx] * z + w_hat[idx] * force).collect()
        });
        let mut v = vec![0.0; len];
        transform.inverse_into(&mut buf, &mut v)?;
        linear.push(v);
    }

    let mut current = linear.clone();
    let mut changes = Vec::new();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let nonlin_hat: Vec<Vec<Complex64>> = current
            .iter()
            .map(|u| {
                let mut h = vec![Complex64::default(); len];
                transform.forward_into(&power_nonlinearity(u, params.p, opts.nonlinearity), &mut h)?;
                Ok(h)
            })
            .collect::<Result<_>>()?;
        let mut next = Vec::with_capacity(steps + 1);
        next.push(u0.values().to_vec());
        for n in 1..=steps {
            groups.fill(&mut buf, |g, _| {
                let row = &rows[g][n];
                groups.members[g]
                    .iter()
                    .map(|&idx| row.iter().zip(&nonlin_hat).map(|(c, h)| h[idx] * *c).sum())
                    .collect()
            });
            let mut v = vec![0.0; len];
            transform.inverse_into(&mut buf, &mut v)?;
            for (vi, li) in v.iter_mut().zip(&linear[n]) {
                *vi += li;
            }
            next.push(v);
        }
        let change = next
            .iter()
            .zip(&current)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0f64, |m, d| if d.is_finite() { m.max(d) } else { f64::INFINITY });
        current = next;
        changes.push(change);
        if !change.is_finite() {
            return Err(FracError::NonContraction { iterations, last_change: change });
        }
        if change < opts.tol {
            break;
        }
        if iterations >= opts.max_iterations {
            return Err(FracError::NonContraction { iterations, last_change: change });
        }
    }
    let contraction_factor = changes
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .fold(0.0, f64::max);
    let fields = current.into_iter().map(|v| Field::new(grid, v)).collect::<Result<_>>()?;
    Ok(PicardResult { fields, iterations, changes, contraction_factor })
}
