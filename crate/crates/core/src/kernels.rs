//! The fundamental kernels `Z` and `Y`.
//!
//! Fourier symbols are `Ẑ(t,ξ) = E_{α,1}(-|ξ|^{2s} t^α)` and
//! `Ŷ(t,ξ) = t^{α-1} E_{α,α}(-|ξ|^{2s} t^α)`. The self-similar profiles are the
//! kernels at `t = 1`:
//!
//! ```text
//! Z(t,x) = t^{-Nα/2s} F(|x| t^{-α/2s}),   Y(t,x) = t^{-(1-α+Nα/2s)} G(|x| t^{-α/2s}).
//! ```
//!
//! Profiles are radial inverse Fourier transforms of the `t = 1` symbols:
//! a cosine transform in 1D, a `J_0` Hankel transform in 2D and a sine
//! transform in 3D, each summed over half-periods and accelerated with Wynn's
//! epsilon algorithm. Large radii use the algebraic tail expansion generated
//! by the non-smooth terms `|ξ|^{2sk}` of the symbol; `s = 1` uses the
//! subordination integral over the Wright density instead.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, FracError, Result};
use crate::quadrature::{fit_line, integrate, wynn_epsilon, LineFit};
use crate::special::{
    bessel_j0, gamma, gamma_signed, mittag_leffler, rgamma, MLParams, MittagLeffler, WrightPhi,
};
use crate::spectral::{lq_norm, Field, GridSpec, Transform};
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    Z,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileKind {
    F,
    G,
}

impl ProfileKind {
    pub fn kernel(self) -> KernelKind {
        match self {
            ProfileKind::F => KernelKind::Z,
            ProfileKind::G => KernelKind::Y,
        }
    }
}

fn check_alpha_s(alpha: f64, s: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return domain(format!("alpha must lie in (0,1], got {alpha}"));
    }
    if !(s > 0.0 && s <= 1.0) {
        return domain(format!("s must lie in (0,1], got {s}"));
    }
    Ok(())
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        domain(format!("kernel time must be positive, got {t}"))
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if (1..=3).contains(&dim) {
        Ok(())
    } else {
        domain(format!("dimension must be 1, 2 or 3, got {dim}"))
    }
}

/// `Ẑ(t,ξ) = E_{α,1}(-|ξ|^{2s} t^α)`.
pub fn symbol_z(t: f64, xi_sq: f64, alpha: f64, s: f64) -> Result<f64> {
    check_alpha_s(alpha, s)?;
    check_time(t)?;
    if xi_sq < 0.0 {
        return domain("|ξ|² must be nonnegative");
    }
    mittag_leffler(MLParams::new(alpha, 1.0)?, -xi_sq.powf(s) * t.powf(alpha))
}

/// `Ŷ(t,ξ) = t^{α-1} E_{α,α}(-|ξ|^{2s} t^α)`.
pub fn symbol_y(t: f64, xi_sq: f64, alpha: f64, s: f64) -> Result<f64> {
    check_alpha_s(alpha, s)?;
    check_time(t)?;
    if xi_sq < 0.0 {
        return domain("|ξ|² must be nonnegative");
    }
    let e = mittag_leffler(MLParams::new(alpha, alpha)?, -xi_sq.powf(s) * t.powf(alpha))?;
    Ok(t.powf(alpha - 1.0) * e)
}

/// Both symbols for one `(α, s)` with cached Mittag-Leffler evaluators.
#[derive(Debug, Clone)]
pub struct KernelSymbols {
    alpha: f64,
    s: f64,
    e1: MittagLeffler,
    ea: MittagLeffler,
}

impl KernelSymbols {
    pub fn new(alpha: f64, s: f64) -> Result<Self> {
        check_alpha_s(alpha, s)?;
        Ok(KernelSymbols {
            alpha,
            s,
            e1: MittagLeffler::new(MLParams::new(alpha, 1.0)?)?,
            ea: MittagLeffler::new(MLParams::new(alpha, alpha)?)?,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// Unchecked `Ẑ`; `t > 0` is the caller's responsibility.
    #[inline]
    pub fn z(&self, t: f64, xi_sq: f64) -> f64 {
        self.e1.value(-xi_sq.powf(self.s) * t.powf(self.alpha))
    }

    /// Unchecked `Ŷ`.
    #[inline]
    pub fn y(&self, t: f64, xi_sq: f64) -> f64 {
        t.powf(self.alpha - 1.0) * self.ea.value(-xi_sq.powf(self.s) * t.powf(self.alpha))
    }

    pub fn eval(&self, kind: KernelKind, t: f64, xi_sq: f64) -> Result<f64> {
        check_time(t)?;
        if xi_sq < 0.0 {
            return domain("|ξ|² must be nonnegative");
        }
        Ok(match kind {
            KernelKind::Z => self.z(t, xi_sq),
            KernelKind::Y => self.y(t, xi_sq),
        })
    }
}

/// `q_c = N/(N-2s)`, or infinity when `N ≤ 2s`.
pub fn q_critical(dim: usize, s: f64) -> f64 {
    let n = dim as f64;
    if n > 2.0 * s {
        n / (n - 2.0 * s)
    } else {
        f64::INFINITY
    }
}

/// Exponent of `t` in `‖Z(t)‖_q` or `‖Y(t)‖_q`.
pub fn predicted_slope(kind: KernelKind, dim: usize, alpha: f64, s: f64, q: f64) -> f64 {
    let base = -(dim as f64 * alpha / (2.0 * s)) * (1.0 - 1.0 / q);
    match kind {
        KernelKind::Z => base,
        KernelKind::Y => base - (1.0 - alpha),
    }
}

const MAX_LOBES: usize = 400_000;
const ASYMPTOTIC_TERMS: usize = 60;

/// Evaluator of one self-similar profile.
#[derive(Debug, Clone)]
pub struct ProfileEvaluator {
    kind: ProfileKind,
    dim: usize,
    alpha: f64,
    s: f64,
    ml: MittagLeffler,
    tail_coeffs: Vec<f64>,
    wright: Option<WrightPhi>,
}

impl ProfileEvaluator {
    pub fn new(kind: ProfileKind, alpha: f64, s: f64, dim: usize) -> Result<Self> {
        check_alpha_s(alpha, s)?;
        check_dim(dim)?;
        let beta = match kind {
            ProfileKind::F => 1.0,
            ProfileKind::G => alpha,
        };
        let n = dim as f64;
        // F(r) ~ Σ_k c_k r^{-N-2sk}, from the transforms of |ξ|^{2sk}
        let mut tail_coeffs = Vec::with_capacity(ASYMPTOTIC_TERMS);
        for k in 1..=ASYMPTOTIC_TERMS {
            let a = 2.0 * s * k as f64;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let c = sign
                * rgamma(alpha * k as f64 + beta)
                * 2f64.powf(a)
                * PI.powf(-0.5 * n)
                * gamma_signed(0.5 * (n + a))
                * rgamma(-0.5 * a);
            tail_coeffs.push(if c.is_finite() { c } else { 0.0 });
        }
        let wright = if s == 1.0 && alpha < 1.0 { Some(WrightPhi::new(alpha)?) } else { None };
        Ok(ProfileEvaluator {
            kind,
            dim,
            alpha,
            s,
            ml: MittagLeffler::new(MLParams::new(alpha, beta)?)?,
            tail_coeffs,
            wright,
        })
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `(2π)^{-N} × (surface of the unit sphere in ξ)`.
    fn radial_constant(&self) -> f64 {
        match self.dim {
            1 => 1.0 / PI,
            2 => 1.0 / (2.0 * PI),
            _ => 1.0 / (2.0 * PI * PI),
        }
    }

    #[inline]
    fn symbol(&self, xi: f64) -> f64 {
        self.ml.value(-xi.powf(2.0 * self.s))
    }

    /// Value at `r = 0`; infinite when the symbol is not integrable.
    pub fn origin(&self) -> f64 {
        let mu = self.dim as f64 / (2.0 * self.s);
        let pre = self.radial_constant() / (2.0 * self.s);
        // Mellin transform ∫ x^{μ-1} E_{α,β}(-x) dx = Γ(μ)Γ(1-μ)/Γ(β-αμ)
        if self.alpha == 1.0 {
            return pre * gamma(mu).unwrap_or(f64::INFINITY);
        }
        let g_mu = gamma_signed(mu);
        match self.kind {
            ProfileKind::F => {
                if mu < 1.0 {
                    pre * g_mu * gamma_signed(1.0 - mu) * rgamma(1.0 - self.alpha * mu)
                } else {
                    f64::INFINITY
                }
            }
            ProfileKind::G => {
                if (mu - 1.0).abs() < 1e-12 {
                    // Γ(1-μ)/Γ(α(1-μ)) → α
                    pre * self.alpha
                } else if mu < 2.0 {
                    pre * g_mu * gamma_signed(1.0 - mu) * rgamma(self.alpha * (1.0 - mu))
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        if r.is_nan() || r < 0.0 {
            return domain(format!("radius must be nonnegative, got {r}"));
        }
        if self.alpha == 1.0 && self.s == 1.0 {
            let n = self.dim as f64;
            return Ok((4.0 * PI).powf(-0.5 * n) * (-r * r / 4.0).exp());
        }
        if r == 0.0 {
            return Ok(self.origin());
        }
        if r == f64::INFINITY {
            return Ok(0.0);
        }
        if let Some(w) = &self.wright {
            return self.subordinated(w, r);
        }
        if let Some(v) = self.asymptotic(r) {
            return Ok(v);
        }
        self.quadrature(r)
    }

    /// Tail expansion, accepted only if its smallest retained term is below
    /// `1e-13` of the sum.
    fn asymptotic(&self, r: f64) -> Option<f64> {
        let n = self.dim as f64;
        let x = r.powf(-2.0 * self.s);
        let mut power = r.powf(-n);
        let mut sum = 0.0;
        let mut last = f64::INFINITY;
        let mut smallest = f64::INFINITY;
        for c in &self.tail_coeffs {
            power *= x;
            if *c == 0.0 {
                continue;
            }
            let term = c * power;
            if term.abs() > last {
                break;
            }
            last = term.abs();
            smallest = smallest.min(last);
            sum += term;
            if last < 1e-17 * sum.abs() {
                break;
            }
        }
        if sum > 0.0 && smallest <= 1e-13 * sum {
            Some(sum)
        } else {
            None
        }
    }

    fn quadrature(&self, r: f64) -> Result<f64> {
        let c = self.radial_constant();
        match self.dim {
            1 => oscillatory(
                |xi| c * self.symbol(xi),
                |x| x.cos(),
                |k| (k as f64 - 0.5) * PI,
                r,
            ),
            2 => oscillatory(
                |xi| c * xi * self.symbol(xi),
                bessel_j0,
                |k| {
                    let b = (k as f64 - 0.25) * PI;
                    b + 1.0 / (8.0 * b)
                },
                r,
            ),
            _ => oscillatory(
                |xi| c / r * xi * self.symbol(xi),
                |x| x.sin(),
                |k| k as f64 * PI,
                r,
            ),
        }
    }

    /// `s = 1`: `F(r) = ∫ w(θ) (4πθ)^{-N/2} e^{-r²/4θ} dθ` with `w = φ_α` for
    /// `F` and `w = αθφ_α` for `G`.
    fn subordinated(&self, w: &WrightPhi, r: f64) -> Result<f64> {
        let n = self.dim as f64;
        let alpha = self.alpha;
        let kind = self.kind;
        let integrand = |theta: f64| {
            if theta <= 0.0 {
                return 0.0;
            }
            let phi = w.eval(theta).unwrap_or(0.0);
            let weight = match kind {
                ProfileKind::F => phi,
                ProfileKind::G => alpha * theta * phi,
            };
            weight * (4.0 * PI * theta).powf(-0.5 * n) * (-r * r / (4.0 * theta)).exp()
        };
        let mut total = 0.0;
        let mut a = 0.0;
        let mut b = 1.0 / 64.0;
        while a < 1024.0 {
            let res = integrate(integrand, a, b, 0.0, 1e-12, 400);
            total += res.value;
            a = b;
            b *= 4.0;
        }
        // exact zero is an underflow of a super-exponentially small value
        if !(total >= 0.0) {
            return Err(FracError::Numerical(format!(
                "subordination integral for the profile at r = {r} returned {total}"
            )));
        }
        Ok(total)
    }
}

/// `∫_0^∞ amp(ξ) osc(rξ) dξ`, summed over the intervals between consecutive
/// `breaks(k)/r` and extrapolated with Wynn's epsilon algorithm.
fn oscillatory(
    amp: impl Fn(f64) -> f64,
    osc: impl Fn(f64) -> f64,
    breaks: impl Fn(usize) -> f64,
    r: f64,
) -> Result<f64> {
    let f = |xi: f64| amp(xi) * osc(r * xi);
    let mut sums = Vec::new();
    let mut total = 0.0;
    let mut scale: f64 = 0.0;
    let mut a = 0.0;
    let mut previous: Option<f64> = None;
    for k in 1..=MAX_LOBES {
        let b = breaks(k) / r;
        let piece = integrate(f, a, b, 0.0, 1e-13, 200);
        total += piece.value;
        scale = scale.max(total.abs());
        sums.push(total);
        a = b;
        if k >= 16 && k % 4 == 0 {
            let window = &sums[sums.len().saturating_sub(30)..];
            let (v, e) = wynn_epsilon(window);
            let tol = 1e-12 * v.abs() + 1e-15 * scale;
            if e <= tol {
                if let Some(p) = previous {
                    if (p - v).abs() <= tol {
                        return Ok(v);
                    }
                }
                previous = Some(v);
            } else {
                previous = None;
            }
        }
    }
    Err(FracError::Numerical(format!(
        "radial transform at r = {r} did not converge after {MAX_LOBES} half-periods (partial sum {total:.6e})"
    )))
}

/// Samples of `F` or `G` on a radial grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelProfile {
    pub kind: ProfileKind,
    pub dim: usize,
    pub alpha: f64,
    pub s: f64,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

/// Evaluate a profile on increasing nonnegative radii. The result is checked
/// for positivity and radial monotonicity.
pub fn profile(kind: ProfileKind, alpha: f64, s: f64, dim: usize, radii: &[f64]) -> Result<KernelProfile> {
    if radii.iter().any(|r| r.is_nan() || *r < 0.0) || radii.windows(2).any(|w| !(w[1] > w[0])) {
        return domain("radii must be nonnegative and strictly increasing");
    }
    let ev = ProfileEvaluator::new(kind, alpha, s, dim)?;
    let values: Vec<f64> = radii
        .par_iter()
        .map(|&r| ev.value(r))
        .collect::<Result<Vec<f64>>>()?;
    for (i, v) in values.iter().enumerate() {
        let underflow = *v == 0.0 && i > 0 && values[i - 1] < 1e-250;
        if !(*v > 0.0) && !underflow {
            return Err(FracError::Numerical(format!(
                "profile value {v:e} at r = {} is not positive",
                radii[i]
            )));
        }
        if i > 0 && *v > values[i - 1] * (1.0 + 1e-9) {
            return Err(FracError::Numerical(format!(
                "profile increases between r = {} and r = {} ({:e} -> {v:e})",
                radii[i - 1],
                radii[i],
                values[i - 1]
            )));
        }
    }
    Ok(KernelProfile { kind, dim, alpha, s, radii: radii.to_vec(), values })
}

/// Radial region of the profile variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Region {
    Whole,
    /// `|x| < δ`
    Inside(f64),
    /// `|x| > δ`
    Outside(f64),
}

/// An `L^q` norm of a profile with the pieces that came from power-law
/// extrapolation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileNorm {
    pub q: f64,
    pub value: f64,
    /// Share of `‖·‖_q^q` contributed below the smallest sampled radius.
    pub head_fraction: f64,
    /// Share contributed beyond the largest sampled radius.
    pub tail_fraction: f64,
    pub head_r_squared: Option<f64>,
    pub tail_r_squared: Option<f64>,
}

const NORM_R_MIN: f64 = 1e-4;
const NORM_R_MAX: f64 = 1e4;
const NORM_PER_DECADE: f64 = 32.0;

fn unit_sphere(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 4.0 * PI,
    }
}

/// Power-law fit `F ≈ c r^{-a}` on log-spaced samples; returns `(c, a, fit)`.
fn power_fit(rs: &[f64], fs: &[f64]) -> Option<(f64, f64, LineFit)> {
    let xs: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = fs.iter().map(|f| f.ln()).collect();
    let fit = fit_line(&xs, &ys)?;
    Some((fit.intercept.exp(), -fit.slope, fit))
}

/// `L^q` norm of `F` or `G` over a radial region of R^N.
///
/// Rejects `q ≥ q_c` when `N > 2s`.
pub fn profile_lq_norm(
    kind: ProfileKind,
    alpha: f64,
    s: f64,
    dim: usize,
    q: f64,
    region: Region,
) -> Result<ProfileNorm> {
    let ev = ProfileEvaluator::new(kind, alpha, s, dim)?;
    profile_lq_norm_with(&ev, q, region)
}

pub fn profile_lq_norm_with(ev: &ProfileEvaluator, q: f64, region: Region) -> Result<ProfileNorm> {
    if q.is_nan() || q < 1.0 {
        return domain(format!("L^q norm requires q >= 1, got {q}"));
    }
    let qc = q_critical(ev.dim, ev.s);
    if q >= qc {
        return Err(FracError::Regime(format!(
            "q = {q} is not below q_c = {qc}; the kernel is not in L^q"
        )));
    }
    let n = ev.dim as f64;
    if q == f64::INFINITY {
        let value = match region {
            Region::Outside(d) => ev.value(d)?,
            _ => ev.origin(),
        };
        return Ok(ProfileNorm {
            q,
            value,
            head_fraction: 0.0,
            tail_fraction: 0.0,
            head_r_squared: None,
            tail_r_squared: None,
        });
    }
    let (lo, hi, with_head, with_tail) = match region {
        Region::Whole => (NORM_R_MIN, NORM_R_MAX, true, true),
        Region::Inside(d) => {
            if !(d > 0.0) {
                return domain("region radius must be positive");
            }
            (NORM_R_MIN.min(d / 10.0), d, true, false)
        }
        Region::Outside(d) => {
            if !(d > 0.0) {
                return domain("region radius must be positive");
            }
            (d, NORM_R_MAX.max(10.0 * d), false, true)
        }
    };
    let decades = (hi / lo).log10();
    let mut intervals = (decades * NORM_PER_DECADE).ceil() as usize;
    intervals += intervals % 2;
    let du = (hi / lo).ln() / intervals as f64;
    let rs: Vec<f64> = (0..=intervals).map(|i| lo * (du * i as f64).exp()).collect();
    let fs: Vec<f64> = rs.par_iter().map(|&r| ev.value(r)).collect::<Result<Vec<f64>>>()?;
    if fs.iter().any(|f| !(*f >= 0.0)) {
        return Err(FracError::Numerical("profile negative on the norm grid".into()));
    }
    // Simpson in u = ln r of r^N F^q
    let g: Vec<f64> = rs.iter().zip(&fs).map(|(r, f)| r.powf(n) * f.powf(q)).collect();
    let mut body = g[0] + g[intervals];
    for (i, v) in g.iter().enumerate().take(intervals).skip(1) {
        body += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    body *= du / 3.0;

    let per_decade = NORM_PER_DECADE as usize + 1;
    let mut head = 0.0;
    let mut head_r2 = None;
    if with_head {
        let origin = ev.origin();
        if origin.is_finite() {
            head = origin.powf(q) * lo.powf(n) / n;
        } else {
            let (c, a, fit) = power_fit(&rs[..per_decade], &fs[..per_decade])
                .ok_or_else(|| FracError::Numerical("head fit failed".into()))?;
            if fit.r_squared < 0.99 || n - a * q <= 0.0 {
                return Err(FracError::Numerical(format!(
                    "near-origin power law unusable (exponent {a:.4}, R² {:.5})",
                    fit.r_squared
                )));
            }
            head = c.powf(q) * lo.powf(n - a * q) / (n - a * q);
            head_r2 = Some(fit.r_squared);
        }
    }
    let mut tail = 0.0;
    let mut tail_r2 = None;
    if with_tail {
        let last = g[intervals];
        // skip the extrapolation when the integrand is already negligible
        if last > 1e-14 * body {
            let m = rs.len();
            let (c, a, fit) = power_fit(&rs[m - per_decade..], &fs[m - per_decade..])
                .ok_or_else(|| FracError::Numerical("tail fit failed".into()))?;
            if fit.r_squared < 0.99 || a * q - n <= 0.0 {
                return Err(FracError::Numerical(format!(
                    "tail power law unusable (exponent {a:.4}, R² {:.5})",
                    fit.r_squared
                )));
            }
            tail = c.powf(q) * rs[m - 1].powf(n - a * q) / (a * q - n);
            tail_r2 = Some(fit.r_squared);
        }
    }
    let total = body + head + tail;
    Ok(ProfileNorm {
        q,
        value: (unit_sphere(ev.dim) * total).powf(1.0 / q),
        head_fraction: head / total,
        tail_fraction: tail / total,
        head_r_squared: head_r2,
        tail_r_squared: tail_r2,
    })
}

/// Parity phase `(-1)^{Σ k_a}` that centres a spectrum on `x = 0`.
fn centring_phase(grid: &GridSpec, idx: usize) -> f64 {
    let ii = grid.unravel(idx);
    let parity: usize = ii[..grid.dim].iter().sum();
    if parity % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// The periodized kernel `Z(t,·)` or `Y(t,·)` sampled on the grid, centred
/// at the origin.
pub fn kernel_field(symbols: &KernelSymbols, kind: KernelKind, t: f64, grid: &GridSpec) -> Result<Field> {
    check_time(t)?;
    let transform = Transform::new(grid)?;
    let vol = grid.volume();
    let mut modes: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let sym = match kind {
                KernelKind::Z => symbols.z(t, grid.xi_sq(idx)),
                KernelKind::Y => symbols.y(t, grid.xi_sq(idx)),
            };
            Complex64::new(sym * centring_phase(grid, idx) / vol, 0.0)
        })
        .collect();
    let mut values = vec![0.0; grid.len()];
    transform.inverse_into(&mut modes, &mut values)?;
    Field::new(*grid, values)
}

/// Unit-mass Gaussian of standard deviation `width` centred at the origin.
pub fn delta_approx(grid: &GridSpec, width: f64) -> Result<Field> {
    if !(width > 0.0) {
        return domain("delta approximation width must be positive");
    }
    let n = grid.dim as f64;
    let norm = (2.0 * PI * width * width).powf(-0.5 * n);
    Field::from_fn(*grid, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        norm * (-r2 / (2.0 * width * width)).exp()
    })
}

/// `Z(t) * f` or `Y(t) * f` by mode-wise multiplication.
pub fn apply_propagator(symbols: &KernelSymbols, kind: KernelKind, t: f64, f: &Field) -> Result<Field> {
    check_time(t)?;
    let transform = Transform::new(f.grid())?;
    let mut spec = transform.to_spectral(f)?;
    let grid = *f.grid();
    for (idx, c) in spec.modes_mut().iter_mut().enumerate() {
        let xi_sq = grid.xi_sq(idx);
        *c *= match kind {
            KernelKind::Z => symbols.z(t, xi_sq),
            KernelKind::Y => symbols.y(t, xi_sq),
        };
    }
    transform.to_real(&spec)
}

/// Log-log regression of a kernel norm against time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub kind: KernelKind,
    pub q: f64,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub predicted_slope: f64,
    pub fitted_slope: f64,
    pub r_squared: f64,
}

/// Fit the exponent of `‖Z(t)‖_q` or `‖Y(t)‖_q` using grid kernels.
pub fn norm_scaling(
    symbols: &KernelSymbols,
    kind: KernelKind,
    grid: &GridSpec,
    q: f64,
    times: &[f64],
) -> Result<ScalingFit> {
    if times.len() < 2 {
        return Err(FracError::Size("scaling fit needs at least two times".into()));
    }
    let norms = times
        .iter()
        .map(|&t| lq_norm(&kernel_field(symbols, kind, t, grid)?, q))
        .collect::<Result<Vec<f64>>>()?;
    let xs: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    let fit = fit_line(&xs, &ys).ok_or_else(|| FracError::Numerical("degenerate scaling fit".into()))?;
    Ok(ScalingFit {
        kind,
        q,
        times: times.to_vec(),
        norms,
        predicted_slope: predicted_slope(kind, grid.dim, symbols.alpha, symbols.s, q),
        fitted_slope: fit.slope,
        r_squared: fit.r_squared,
    })
}

/// Largest `‖Y(t)-Y(t₀)‖_{L¹} / ((t-t₀)^γ t₀^{α-1-γ})` over pairs `t₀ < t`
/// drawn from `times`.
pub fn holder_constant(symbols: &KernelSymbols, grid: &GridSpec, gamma_exp: f64, times: &[f64]) -> Result<f64> {
    if !(gamma_exp > 0.0 && gamma_exp < 1.0) {
        return domain(format!("Hölder exponent must lie in (0,1), got {gamma_exp}"));
    }
    let fields = times
        .iter()
        .map(|&t| kernel_field(symbols, KernelKind::Y, t, grid))
        .collect::<Result<Vec<Field>>>()?;
    let alpha = symbols.alpha;
    let cell = grid.cell_volume();
    let mut worst: f64 = 0.0;
    for i in 0..times.len() {
        for j in i + 1..times.len() {
            let (t0, t) = (times[i], times[j]);
            let diff: f64 = fields[j]
                .values()
                .iter()
                .zip(fields[i].values())
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
                * cell;
            let denom = (t - t0).powf(gamma_exp) * t0.powf(alpha - 1.0 - gamma_exp);
            worst = worst.max(diff / denom);
        }
    }
    Ok(worst)
}
