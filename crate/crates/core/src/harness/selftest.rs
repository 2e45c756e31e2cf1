use std::time::Instant;

use crate::criticality::{beta_value, forced_critical_exponent, scale_critical_exponent};
use crate::kernels::{apply_propagator, delta_approx, KernelKind, KernelSymbols};
use crate::solver::ModelParams;
use crate::special::{beta_fn, mittag_leffler, wright_phi, MLParams};
use crate::spectral::{fractional_laplacian, Field, GridSpec};
use crate::Result;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub error: f64,
    pub tolerance: f64,
    pub seconds: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.error <= self.tolerance
    }
}

fn timed(name: &'static str, tolerance: f64, f: impl FnOnce() -> Result<f64>) -> Check {
    let start = Instant::now();
    let error = f().unwrap_or(f64::INFINITY);
    let error = if error.is_nan() { f64::INFINITY } else { error };
    Check { name, error, tolerance, seconds: start.elapsed().as_secs_f64() }
}

/// Fast golden values and invariants; every entry runs in well under a second.
pub fn run_selftest() -> Vec<Check> {
    vec![
        timed("E_{1,1}(-x) = exp(-x)", 1e-10, || {
            let ml = MLParams::new(1.0, 1.0)?;
            let mut worst: f64 = 0.0;
            for i in 0..=200 {
                let x = 50.0 * i as f64 / 200.0;
                worst = worst.max((mittag_leffler(ml, -x)? - (-x).exp()).abs());
            }
            Ok(worst)
        }),
        timed("E_{1/2,1}(-1)", 1e-8, || Ok((mittag_leffler(MLParams::new(0.5, 1.0)?, -1.0)? - 0.427583576155807).abs())),
        timed("Wright phi_{1/2} Gaussian", 1e-8, || {
            let mut worst: f64 = 0.0;
            for i in 0..=50 {
                let th = 10.0 * i as f64 / 50.0;
                let exact = (-th * th / 4.0).exp() / std::f64::consts::PI.sqrt();
                worst = worst.max((wright_phi(0.5, th)? - exact).abs());
            }
            Ok(worst)
        }),
        timed("B(3/4, 1/2)", 1e-9, || Ok((beta_fn(0.75, 0.5)? - 2.396280469471184).abs())),
        timed("p_star = 7/3 at canonical params", 1e-12, || {
            Ok((forced_critical_exponent(&ModelParams::canonical(2.0)).unwrap_or(f64::NAN) - 7.0 / 3.0).abs())
        }),
        timed("beta = 0 at q = p_c", 1e-12, || {
            let mut worst: f64 = 0.0;
            for &(alpha, s, sigma, p, dim) in
                &[(0.5, 0.4, -0.25, 3.0, 1), (0.3, 0.9, -0.1, 2.5, 2), (0.9, 0.6, 0.2, 4.0, 3)]
            {
                let params = ModelParams { alpha, s, sigma, p, dim };
                worst = worst.max(beta_value(&params, scale_critical_exponent(&params)).abs());
            }
            Ok(worst)
        }),
        timed("mass of Z(t) * delta", 1e-4, || {
            let grid = GridSpec::new(1, 1024, 50.0)?;
            let delta = delta_approx(&grid, 2.0 * grid.spacing())?;
            let sym = KernelSymbols::new(0.5, 0.4)?;
            Ok((apply_propagator(&sym, KernelKind::Z, 1.0, &delta)?.integral() - 1.0).abs())
        }),
        timed("fractional Laplacian self-adjoint", 1e-12, || {
            let grid = GridSpec::new(1, 256, 10.0)?;
            let f = Field::from_fn(grid, |x| (-x[0] * x[0]).exp())?;
            let g = Field::from_fn(grid, |x| (-(x[0] - 1.0).powi(2) / 2.0).exp() * x[0])?;
            let a = fractional_laplacian(&f, 0.4)?.inner(&g)?;
            let b = f.inner(&fractional_laplacian(&g, 0.4)?)?;
            Ok((a - b).abs() / a.abs().max(b.abs()).max(1e-300))
        }),
    ]
}

pub fn format_table(checks: &[Check]) -> String {
    let mut out = format!("{:<36} {:>12} {:>10} {:>8}  result\n", "check", "error", "tol", "secs");
    for c in checks {
        out.push_str(&format!(
            "{:<36} {:>12.3e} {:>10.0e} {:>8.3}  {}\n",
            c.name,
            c.error,
            c.tolerance,
            c.seconds,
            if c.passed() { "PASS" } else { "FAIL" }
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        let checks = run_selftest();
        assert!(checks.iter().all(Check::passed), "{}", format_table(&checks));
    }
}
