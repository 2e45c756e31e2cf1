use crate::error::Result;
use crate::special::{gamma, MLParams, MittagLeffler};

use super::params::{ModelParams, TimeMesh};

/// Mittag-Leffler evaluators for the four families of Duhamel coefficients.
#[derive(Debug, Clone)]
pub(crate) struct StepKernels {
    alpha: f64,
    sigma: f64,
    gamma_sigma: f64,
    e_z: MittagLeffler,
    e_phi: MittagLeffler,
    e_psi: MittagLeffler,
    e_force: MittagLeffler,
}

impl StepKernels {
    pub fn new(params: &ModelParams) -> Result<Self> {
        let a = params.alpha;
        Ok(StepKernels {
            alpha: a,
            sigma: params.sigma,
            gamma_sigma: gamma(params.sigma + 1.0)?,
            e_z: MittagLeffler::new(MLParams::new(a, 1.0)?)?,
            e_phi: MittagLeffler::new(MLParams::new(a, a + 1.0)?)?,
            e_psi: MittagLeffler::new(MLParams::new(a, a + 2.0)?)?,
            e_force: MittagLeffler::new(MLParams::new(a, a + params.sigma + 1.0)?)?,
        })
    }

    /// E_{α,1}(−λ t^α).
    pub fn z(&self, lam: f64, t: f64) -> f64 {
        self.e_z.value(-lam * t.powf(self.alpha))
    }

    /// Φ(h) = ∫₀^h τ^{α−1}E_{α,α}(−λτ^α)dτ = h^α E_{α,α+1}(−λh^α), given h^α.
    #[inline]
    pub fn phi_pow(&self, lam: f64, h_alpha: f64) -> f64 {
        if h_alpha <= 0.0 {
            return 0.0;
        }
        h_alpha * self.e_phi.value(-lam * h_alpha)
    }

    /// Ψ(h) = ∫₀^h Φ = h^{α+1}E_{α,α+2}(−λh^α).
    #[inline]
    pub fn psi(&self, lam: f64, h: f64) -> f64 {
        if h <= 0.0 {
            return 0.0;
        }
        let ha = h.powf(self.alpha);
        h * ha * self.e_psi.value(-lam * ha)
    }

    /// ∫₀^t τ^σ (t−τ)^{α−1}E_{α,α}(−λ(t−τ)^α)dτ = Γ(σ+1) t^{σ+α} E_{α,α+σ+1}(−λt^α).
    pub fn forcing(&self, lam: f64, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let ta = t.powf(self.alpha);
        self.gamma_sigma * t.powf(self.sigma) * ta * self.e_force.value(-lam * ta)
    }
}

/// Left-endpoint history weights W_{n,j}, j < n, for one value of |ξ|².
#[derive(Debug, Clone, PartialEq)]
pub struct DuhamelWeights {
    steps: usize,
    values: Vec<f64>,
}

impl DuhamelWeights {
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Row n (length n) of the table, n = 1..=M.
    pub fn row(&self, n: usize) -> &[f64] {
        let start = n * (n - 1) / 2;
        &self.values[start..start + n]
    }

    pub fn get(&self, n: usize, j: usize) -> f64 {
        self.row(n)[j]
    }
}

/// Writes row n of the left-endpoint weights into `out`, given
/// `dist_alpha[j] = (t_n − t_j)^α` for j ≤ n.
pub(crate) fn fill_left_row(k: &StepKernels, lam: f64, dist_alpha: &[f64], out: &mut Vec<f64>) {
    let n = dist_alpha.len() - 1;
    out.clear();
    let mut prev = k.phi_pow(lam, dist_alpha[0]);
    for j in 0..n {
        let next = k.phi_pow(lam, dist_alpha[j + 1]);
        out.push(prev - next);
        prev = next;
    }
}

pub fn duhamel_weights(mesh: &TimeMesh, xi_sq: f64, params: &ModelParams) -> Result<DuhamelWeights> {
    params.validate()?;
    if !(xi_sq >= 0.0) {
        return crate::error::domain("|ξ|² must be nonnegative");
    }
    let k = StepKernels::new(params)?;
    let lam = xi_sq.powf(params.s);
    let t = mesh.nodes();
    let steps = mesh.steps();
    let mut values = Vec::with_capacity(steps * (steps + 1) / 2);
    let mut row = Vec::new();
    for n in 1..=steps {
        let dist: Vec<f64> = (0..=n).map(|j| (t[n] - t[j]).powf(params.alpha)).collect();
        fill_left_row(&k, lam, &dist, &mut row);
        values.extend_from_slice(&row);
    }
    Ok(DuhamelWeights { steps, values })
}

/// Product-trapezoid weights: row n holds the coefficients c_{n,i},
/// i = 0..=n, of the nonlinearity values at t_i, for linear interpolation of
/// the nonlinearity in time against the exact kernel.
pub(crate) fn trapezoid_row(k: &StepKernels, lam: f64, t: &[f64], n: usize, out: &mut Vec<f64>) {
    out.clear();
    out.resize(n + 1, 0.0);
    let tn = t[n];
    let mut phi_b = k.phi_pow(lam, tn.powf(k.alpha));
    let mut psi_b = k.psi(lam, tn);
    for j in 0..n {
        let b = tn - t[j];
        let a = tn - t[j + 1];
        let phi_a = k.phi_pow(lam, a.powf(k.alpha));
        let psi_a = k.psi(lam, a);
        let mean = (psi_b - psi_a) / (b - a);
        out[j] += phi_b - mean;
        out[j + 1] += mean - phi_a;
        phi_b = phi_a;
        psi_b = psi_a;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use crate::special::mittag_leffler;

    fn params(alpha: f64) -> ModelParams {
        ModelParams::new(alpha, 0.4, -0.25 * alpha, 3.0, 1).unwrap()
    }

    #[test]
    fn zero_frequency_weights_are_power_differences() {
        let mesh = TimeMesh::graded(2.0, 12, 2.0).unwrap();
        let p = params(0.5);
        let w = duhamel_weights(&mesh, 0.0, &p).unwrap();
        let t = mesh.nodes();
        let g = gamma(1.5).unwrap();
        for n in 1..=12 {
            let mut total = 0.0;
            for j in 0..n {
                let expect = ((t[n] - t[j]).sqrt() - (t[n] - t[j + 1]).sqrt()) / g;
                assert!((w.get(n, j) - expect).abs() < 1e-14);
                total += w.get(n, j);
            }
            assert!((total - t[n].sqrt() / g).abs() < 1e-13);
        }
    }

    #[test]
    fn classical_exponential_weights() {
        let mesh = TimeMesh::uniform(1.0, 8).unwrap();
        let p = ModelParams::new(1.0, 1.0, 0.0, 2.0, 1).unwrap();
        let xi_sq = 3.0;
        let w = duhamel_weights(&mesh, xi_sq, &p).unwrap();
        let t = mesh.nodes();
        for n in 1..=8 {
            for j in 0..n {
                let expect = ((-xi_sq * (t[n] - t[j + 1])).exp() - (-xi_sq * (t[n] - t[j])).exp()) / xi_sq;
                assert!((w.get(n, j) - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn weights_match_kernel_quadrature() {
        let alpha = 0.6;
        let p = params(alpha);
        let mesh = TimeMesh::graded(1.5, 6, 1.5).unwrap();
        let xi_sq: f64 = 2.5;
        let lam = xi_sq.powf(p.s);
        let w = duhamel_weights(&mesh, xi_sq, &p).unwrap();
        let t = mesh.nodes();
        let ml = MLParams::new(alpha, alpha).unwrap();
        let kernel = |tau: f64| tau.powf(alpha - 1.0) * mittag_leffler(ml, -lam * tau.powf(alpha)).unwrap();
        let n = 6;
        for j in 0..n {
            let r = integrate(kernel, t[n] - t[j + 1], t[n] - t[j], 1e-13, 1e-12, 4000);
            assert!((w.get(n, j) - r.value).abs() < 1e-9 * r.value.max(1e-3), "j={j}");
            assert!(w.get(n, j) >= 0.0);
        }
    }

    #[test]
    fn forcing_integral_matches_quadrature() {
        let p = params(0.5);
        let k = StepKernels::new(&p).unwrap();
        let ml = MLParams::new(0.5, 0.5).unwrap();
        let lam = 1.7;
        let t = 2.0;
        // substitutions τ = x^k and t − τ = y^{1/α} remove both endpoint singularities
        let k_left = 1.0 / (1.0 + p.sigma);
        let left = integrate(
            |x: f64| {
                let tau = x.powf(k_left);
                k_left * (t - tau).powf(-0.5) * mittag_leffler(ml, -lam * (t - tau).sqrt()).unwrap()
            },
            0.0,
            1.0,
            1e-14,
            1e-13,
            4000,
        )
        .value;
        let right = integrate(
            |y: f64| 2.0 * (t - y * y).powf(p.sigma) * mittag_leffler(ml, -lam * y).unwrap(),
            0.0,
            (t - 1.0f64).sqrt(),
            1e-14,
            1e-13,
            4000,
        )
        .value;
        let exact = left + right;
        assert!((k.forcing(lam, t) - exact).abs() < 1e-9 * exact, "{} {}", k.forcing(lam, t), exact);
    }

    #[test]
    fn trapezoid_rows_integrate_linear_functions_exactly() {
        let p = params(0.7);
        let k = StepKernels::new(&p).unwrap();
        let mesh = TimeMesh::graded(1.0, 10, 2.0).unwrap();
        let t = mesh.nodes();
        let lam = 0.8;
        let ml = MLParams::new(0.7, 0.7).unwrap();
        let n = 10;
        let mut row = Vec::new();
        trapezoid_row(&k, lam, t, n, &mut row);
        // ∫₀^{t_n} Ŷ(t_n − τ)(1 + 2τ) dτ
        let approx: f64 = row.iter().zip(t).map(|(c, &ti)| c * (1.0 + 2.0 * ti)).sum();
        // h = t_n − τ = y^{1/α}
        let f = |y: f64| {
            let tau = t[n] - y.powf(1.0 / 0.7);
            mittag_leffler(ml, -lam * y).unwrap() * (1.0 + 2.0 * tau) / 0.7
        };
        let exact = integrate(f, 0.0, t[n].powf(0.7), 1e-14, 1e-13, 4000).value;
        assert!((approx - exact).abs() < 1e-9, "{approx} {exact}");
    }
}
