use fracsim::quadrature::integrate as quad;
use fracsim::solver::{
    duhamel_weights, integrate, picard_solve, Classification, ModelParams, PicardOptions, SolverOptions, TimeMesh,
};
use fracsim::spectral::{lq_norm, to_real, to_spectral, Field, GridSpec, SpectralField};
use fracsim::special::{beta_fn, gamma, mittag_leffler, MLParams};
use fracsim::FracError;
use num_complex::Complex64;

fn linear_opts() -> SolverOptions {
    SolverOptions { nonlinearity: 0.0, keep_fields: true, ..SolverOptions::default() }
}

fn gaussian(grid: GridSpec, amp: f64) -> Field {
    Field::from_fn(grid, |x| amp * (-x.iter().map(|v| v * v).sum::<f64>()).exp()).unwrap()
}

fn max_diff(a: &Field, b: &Field) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn linear_stepper_is_exact_per_mode() {
    let grid = GridSpec::new(1, 64, 10.0).unwrap();
    let k = 5.0;
    let xi = std::f64::consts::PI * k / grid.half_width;
    let u0 = Field::from_fn(grid, |x| (xi * x[0]).cos()).unwrap();
    let zero = Field::zeros(grid);
    let params = ModelParams::canonical(3.0);
    let lam = (xi * xi).powf(params.s);
    let ml = MLParams::new(params.alpha, 1.0).unwrap();
    for (steps, grading) in [(7, 1.0), (20, 2.0)] {
        let mesh = TimeMesh::graded(3.0, steps, grading).unwrap();
        let r = integrate(&params, &u0, &zero, &mesh, &linear_opts()).unwrap();
        for (field, &t) in r.fields.iter().zip(mesh.nodes()) {
            let e = mittag_leffler(ml, -lam * t.powf(params.alpha)).unwrap();
            let expect = u0.scaled(e);
            assert!(max_diff(field, &expect) < 1e-12, "t = {t}");
        }
    }
}

#[test]
fn weights_sum_to_power_at_zero_frequency() {
    let params = ModelParams::canonical(2.0);
    let mesh = TimeMesh::graded(5.0, 30, 2.0).unwrap();
    let w = duhamel_weights(&mesh, 0.0, &params).unwrap();
    let g = gamma(1.5).unwrap();
    for n in 1..=30 {
        let total: f64 = w.row(n).iter().sum();
        assert!((total - mesh.nodes()[n].sqrt() / g).abs() < 1e-13);
        assert!(w.row(n).iter().all(|&v| v >= 0.0));
    }
}

/// Integrating-factor RK4 for u_t = Δu + |u|³ in Fourier space.
fn heat_reference(u0: &Field, t_end: f64, steps: usize) -> Field {
    let grid = *u0.grid();
    let dt = t_end / steps as f64;
    let decay: Vec<f64> = (0..grid.len()).map(|i| grid.xi_sq(i)).collect();
    let nonlin = |modes: &[Complex64]| -> Vec<Complex64> {
        let f = to_real(&SpectralField::new(grid, modes.to_vec()).unwrap()).unwrap();
        let cube = Field::new(grid, f.values().iter().map(|v| v.abs().powi(3)).collect()).unwrap();
        to_spectral(&cube).unwrap().modes().to_vec()
    };
    let mut v = to_spectral(u0).unwrap().modes().to_vec();
    let e_half: Vec<f64> = decay.iter().map(|d| (-d * dt / 2.0).exp()).collect();
    for _ in 0..steps {
        let k1 = nonlin(&v);
        let a: Vec<Complex64> = (0..v.len()).map(|i| (v[i] + k1[i] * (dt / 2.0)) * e_half[i]).collect();
        let k2 = nonlin(&a);
        let b: Vec<Complex64> = (0..v.len()).map(|i| v[i] * e_half[i] + k2[i] * (dt / 2.0)).collect();
        let k3 = nonlin(&b);
        let c: Vec<Complex64> = (0..v.len()).map(|i| (v[i] * e_half[i] + k3[i] * dt) * e_half[i]).collect();
        let k4 = nonlin(&c);
        for i in 0..v.len() {
            let ee = e_half[i] * e_half[i];
            v[i] = v[i] * ee + (k1[i] * ee + (k2[i] + k3[i]) * 2.0 * e_half[i] + k4[i]) * (dt / 6.0);
        }
    }
    to_real(&SpectralField::new(grid, v).unwrap()).unwrap()
}

#[test]
fn classical_heat_limit_matches_reference_integrator() {
    let grid = GridSpec::new(1, 256, 20.0).unwrap();
    let u0 = gaussian(grid, 0.5);
    let zero = Field::zeros(grid);
    let params = ModelParams::new(1.0, 1.0, 0.0, 3.0, 1).unwrap();
    let mesh = TimeMesh::uniform(1.0, 400).unwrap();
    let r = integrate(&params, &u0, &zero, &mesh, &SolverOptions::default()).unwrap();
    let reference = heat_reference(&u0, 1.0, 2000);
    let err = max_diff(r.final_field.as_ref().unwrap(), &reference);
    assert!(err < 1e-4, "{err}");
    // the nonlinearity is visible at this amplitude
    let linear = integrate(&params, &u0, &zero, &mesh, &linear_opts()).unwrap();
    assert!(max_diff(linear.final_field.as_ref().unwrap(), &reference) > 1e-3);
}

#[test]
fn forcing_only_single_mode_closed_form() {
    let grid = GridSpec::new(1, 64, 8.0).unwrap();
    let params = ModelParams::canonical(3.0);
    let mesh = TimeMesh::graded(2.0, 10, 2.0).unwrap();
    let zero = Field::zeros(grid);
    let k = 3usize;
    let xi = std::f64::consts::PI * k as f64 / grid.half_width;
    let lam = (xi * xi).powf(params.s);
    let w = Field::from_fn(grid, |x| (xi * x[0]).cos()).unwrap();
    let r = integrate(&params, &zero, &w, &mesh, &linear_opts()).unwrap();
    let w_hat = to_spectral(&w).unwrap().modes()[k];
    let ml = MLParams::new(params.alpha, params.alpha).unwrap();
    for (field, &t) in r.fields.iter().zip(mesh.nodes()).skip(1) {
        let u_hat = to_spectral(field).unwrap().modes()[k];
        // ∫₀^t τ^σ (t−τ)^{α−1}E_{α,α}(−λ(t−τ)^α)dτ with the endpoint singularities
        // removed by τ = x^4 on [0, t/2] and t − τ = y² on [t/2, t]
        let left = quad(
            |x: f64| {
                let tau = x.powi(4);
                4.0 * x.powi(3) * tau.powf(params.sigma) * (t - tau).powf(-0.5)
                    * mittag_leffler(ml, -lam * (t - tau).sqrt()).unwrap()
            },
            0.0,
            (t / 2.0).powf(0.25),
            1e-15,
            1e-13,
            2000,
        )
        .value;
        let right = quad(
            |y: f64| 2.0 * (t - y * y).powf(params.sigma) * mittag_leffler(ml, -lam * y).unwrap(),
            0.0,
            (t / 2.0).sqrt(),
            1e-15,
            1e-13,
            2000,
        )
        .value;
        let expect = w_hat * (left + right);
        assert!((u_hat - expect).norm() < 1e-6 * expect.norm(), "t = {t}");
    }
    // constant forcing: ŵ t^{σ+α} B(σ+1, α) after undoing the 1/Γ(α) of the kernel
    let one = Field::from_fn(grid, |_| 1.0).unwrap();
    let r = integrate(&params, &zero, &one, &mesh, &linear_opts()).unwrap();
    let b = beta_fn(params.sigma + 1.0, params.alpha).unwrap();
    for (field, &t) in r.fields.iter().zip(mesh.nodes()).skip(1) {
        let u_hat = to_spectral(field).unwrap().modes()[0].re;
        let expect = t.powf(params.sigma + params.alpha) * b;
        assert!((gamma(params.alpha).unwrap() * u_hat - expect).abs() < 1e-12 * expect);
    }
}

#[test]
fn picard_zero_data_and_linear_case() {
    let grid = GridSpec::new(1, 64, 10.0).unwrap();
    let params = ModelParams::canonical(3.0);
    let mesh = TimeMesh::graded(0.5, 20, 2.0).unwrap();
    let zero = Field::zeros(grid);
    let r = picard_solve(&params, &zero, &zero, &mesh, &PicardOptions::default()).unwrap();
    assert_eq!(r.iterations, 1);
    assert!(r.fields.iter().all(|f| f.max_abs() == 0.0));

    let u0 = gaussian(grid, 0.3);
    let w = gaussian(grid, 0.2);
    let opts = PicardOptions { nonlinearity: 0.0, ..PicardOptions::default() };
    let pic = picard_solve(&params, &u0, &w, &mesh, &opts).unwrap();
    let int = integrate(&params, &u0, &w, &mesh, &linear_opts()).unwrap();
    for (a, b) in pic.fields.iter().zip(&int.fields) {
        assert!(max_diff(a, b) < 1e-12);
    }
}

#[test]
fn picard_agrees_with_stepper_on_small_data() {
    let grid = GridSpec::new(1, 256, 20.0).unwrap();
    let params = ModelParams::canonical(3.0);
    let mesh = TimeMesh::graded(0.5, 100, 2.0).unwrap();
    let u0 = gaussian(grid, 0.1);
    let w = gaussian(grid, 0.1);
    let pic = picard_solve(&params, &u0, &w, &mesh, &PicardOptions::default()).unwrap();
    assert!(pic.contraction_factor > 0.0 && pic.contraction_factor < 1.0);
    let int = integrate(&params, &u0, &w, &mesh, &SolverOptions { keep_fields: true, ..SolverOptions::default() })
        .unwrap();
    let diff = pic.fields.iter().zip(&int.fields).map(|(a, b)| max_diff(a, b)).fold(0.0, f64::max);
    assert!(diff < 1e-4, "{diff}");
}

#[test]
fn picard_reports_non_contraction() {
    let grid = GridSpec::new(1, 64, 10.0).unwrap();
    let params = ModelParams::canonical(3.0);
    let mesh = TimeMesh::graded(5.0, 40, 2.0).unwrap();
    let u0 = gaussian(grid, 3.0);
    let w = gaussian(grid, 3.0);
    let err = picard_solve(&params, &u0, &w, &mesh, &PicardOptions::default()).unwrap_err();
    assert!(matches!(err, FracError::NonContraction { .. }), "{err}");
    assert!(err.is_numerical());
}

#[test]
fn mesh_refinement_reduces_error() {
    let grid = GridSpec::new(1, 128, 15.0).unwrap();
    let params = ModelParams::canonical(3.0);
    let u0 = gaussian(grid, 0.5);
    let w = gaussian(grid, 0.5);
    let run = |m: usize| {
        let mesh = TimeMesh::graded(1.0, m, 2.0).unwrap();
        integrate(&params, &u0, &w, &mesh, &SolverOptions::default()).unwrap().final_field.unwrap()
    };
    let reference = run(640);
    let errs: Vec<f64> = [20, 40, 80, 160]
        .iter()
        .map(|&m| lq_norm(&Field::new(grid, run(m).values().iter().zip(reference.values()).map(|(a, b)| a - b).collect()).unwrap(), 2.0).unwrap())
        .collect();
    for w in errs.windows(2) {
        assert!(w[1] < w[0], "{errs:?}");
    }
    // observed order against the finest run, which itself carries error
    let order = (errs[0] / errs[2]).log2() / 2.0;
    assert!(order > 0.5, "{errs:?}");
}

#[test]
fn runs_are_bit_identical() {
    let grid = GridSpec::new(1, 128, 15.0).unwrap();
    let params = ModelParams::canonical(2.0);
    let mesh = TimeMesh::graded(3.0, 60, 2.0).unwrap();
    let u0 = gaussian(grid, 0.4);
    let w = gaussian(grid, 0.6);
    let a = integrate(&params, &u0, &w, &mesh, &SolverOptions::default()).unwrap();
    let b = integrate(&params, &u0, &w, &mesh, &SolverOptions::default()).unwrap();
    let bits = |r: &fracsim::solver::SimResult| -> Vec<u64> {
        r.history.iter().flat_map(|h| [h.t, h.lq_norm, h.linf_norm, h.tbeta_lq]).map(f64::to_bits).collect()
    };
    assert_eq!(bits(&a), bits(&b));
    assert_eq!(a.final_field, b.final_field);
    assert_eq!(a.classification, b.classification);
}

#[test]
fn blowup_halts_early() {
    let grid = GridSpec::new(1, 128, 15.0).unwrap();
    let params = ModelParams::canonical(1.5);
    let mesh = TimeMesh::graded(20.0, 200, 2.0).unwrap();
    let zero = Field::zeros(grid);
    let w = gaussian(grid, 2.0);
    let r = integrate(&params, &zero, &w, &mesh, &SolverOptions::default()).unwrap();
    let Classification::BlowUp { t_est } = r.classification else {
        panic!("{:?}", r.classification)
    };
    assert!(t_est < 20.0);
    assert_eq!(r.history.last().unwrap().t, t_est);
    assert!(r.decay_fit.is_none());
    let ts: Vec<f64> = r.history.iter().map(|h| h.t).collect();
    assert!(ts.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn rejects_mismatched_inputs() {
    let params = ModelParams::canonical(2.0);
    let a = Field::zeros(GridSpec::new(1, 64, 5.0).unwrap());
    let b = Field::zeros(GridSpec::new(1, 128, 5.0).unwrap());
    let mesh = TimeMesh::uniform(1.0, 4).unwrap();
    assert!(matches!(integrate(&params, &a, &b, &mesh, &SolverOptions::default()), Err(FracError::Size(_))));
    let c = Field::zeros(GridSpec::new(2, 64, 5.0).unwrap());
    assert!(matches!(integrate(&params, &c, &c, &mesh, &SolverOptions::default()), Err(FracError::Size(_))));
}
