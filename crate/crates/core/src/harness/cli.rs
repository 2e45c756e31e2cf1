use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::criticality::{critical_exponents, local_average_hypotheses, HypothesisInputs, OuterNormExponent};
use crate::error::{FracError, Result};
use crate::kernels::{norm_scaling, profile, KernelKind, KernelSymbols, ProfileKind};
use crate::solver::ModelParams;
use crate::spectral::GridSpec;

use super::config::SweepConfig;
use super::selftest::{format_table, run_selftest, Check};
use super::sweep::{bracket_pstar, run_sweep, simulate, write_history_csv, write_sweep_csv, csv_err};

pub const THREADS_ENV: &str = "FRACSIM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "fracsim", version, about = "Time-fractional forced semilinear diffusion: exponents, kernels and simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Critical exponents and regime flags as JSON.
    Exponents(ExponentArgs),
    /// Kernel profile samples or norm-scaling fit as CSV.
    Kernel(KernelArgs),
    /// One simulation; history CSV with columns t, Lq_norm, Linf_norm, tbeta_Lq.
    Simulate(SimulateArgs),
    /// Classify one simulation per p value.
    Sweep(SweepArgs),
    /// Bracket the BlowUp/Global transition in p.
    Bracket(BracketArgs),
    /// Left and right sides of the local-average hypotheses as JSON.
    Hypotheses(HypothesesArgs),
    /// Golden values and invariants.
    Selftest,
}

#[derive(Debug, Args)]
struct ExponentArgs {
    #[arg(long, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    s: f64,
    #[arg(long, allow_hyphen_values = true)]
    sigma: f64,
    #[arg(long, allow_hyphen_values = true)]
    p: f64,
    #[arg(long = "N")]
    dim: usize,
    #[arg(long, allow_hyphen_values = true)]
    q: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KernelMode {
    /// r, F(r) or r, G(r)
    Profile,
    /// t, q, norm, predicted_slope, fitted_slope
    Scaling,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KernelName {
    F,
    G,
    Z,
    Y,
}

#[derive(Debug, Args)]
struct KernelArgs {
    #[arg(long, value_enum, default_value = "profile")]
    mode: KernelMode,
    /// F or G for profiles, Z or Y for scaling (F and Z, G and Y are paired).
    #[arg(long, value_enum, default_value = "f")]
    kind: KernelName,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    s: f64,
    #[arg(long = "N", default_value_t = 1)]
    dim: usize,
    /// Profile radii or scaling times: smallest value.
    #[arg(long, default_value_t = 0.01)]
    from: f64,
    #[arg(long, default_value_t = 10.0)]
    to: f64,
    #[arg(long, default_value_t = 40)]
    count: usize,
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    #[arg(long, default_value_t = 8192)]
    points: usize,
    #[arg(long, default_value_t = 100.0)]
    half_width: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides params.p.
    #[arg(long)]
    p: Option<f64>,
    /// History CSV destination; the summary JSON then goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON summary with notes and per-row errors.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BracketArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 0.2)]
    tol: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OuterArg {
    Q,
    R,
}

#[derive(Debug, Args)]
struct HypothesesArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: f64,
    #[arg(long = "M", default_value_t = 1.0)]
    big_m: f64,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Value of the smallness constant; a heuristic is used when omitted.
    #[arg(long)]
    m_script: Option<f64>,
    #[arg(long, value_enum, default_value = "q")]
    outer: OuterArg,
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load(path: &Path, p: Option<f64>) -> Result<SweepConfig> {
    let mut cfg = SweepConfig::load(path)?;
    if p.is_some() {
        cfg.params.p = p;
        cfg.validate()?;
    }
    Ok(cfg)
}

fn geometric(from: f64, to: f64, count: usize) -> Result<Vec<f64>> {
    if !(from > 0.0 && to > from && count >= 2) {
        return Err(FracError::Config(format!("need 0 < from < to and count >= 2, got {from}, {to}, {count}")));
    }
    Ok((0..count).map(|i| from * (to / from).powf(i as f64 / (count - 1) as f64)).collect())
}

fn exponents(a: &ExponentArgs) -> Result<()> {
    let params = ModelParams { alpha: a.alpha, s: a.s, sigma: a.sigma, p: a.p, dim: a.dim };
    let report = critical_exponents(&params, a.q)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn kernel(a: &KernelArgs) -> Result<()> {
    let values = geometric(a.from, a.to, a.count)?;
    let mut w = csv::Writer::from_writer(output(&a.out)?);
    match a.mode {
        KernelMode::Profile => {
            let (kind, label) = match a.kind {
                KernelName::F | KernelName::Z => (ProfileKind::F, "F"),
                KernelName::G | KernelName::Y => (ProfileKind::G, "G"),
            };
            let prof = profile(kind, a.alpha, a.s, a.dim, &values)?;
            w.write_record(["r", label]).map_err(csv_err)?;
            for (r, v) in prof.radii.iter().zip(&prof.values) {
                w.write_record([r.to_string(), v.to_string()]).map_err(csv_err)?;
            }
        }
        KernelMode::Scaling => {
            let kind = match a.kind {
                KernelName::F | KernelName::Z => KernelKind::Z,
                KernelName::G | KernelName::Y => KernelKind::Y,
            };
            let grid = GridSpec::new(a.dim, a.points, a.half_width).map_err(|e| FracError::Config(e.to_string()))?;
            let fit = norm_scaling(&KernelSymbols::new(a.alpha, a.s)?, kind, &grid, a.q, &values)?;
            w.write_record(["t", "q", "norm", "predicted_slope", "fitted_slope"]).map_err(csv_err)?;
            for (t, n) in fit.times.iter().zip(&fit.norms) {
                w.write_record([t, &fit.q, n, &fit.predicted_slope, &fit.fitted_slope].map(|v| v.to_string()))
                    .map_err(csv_err)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn simulate_cmd(a: &SimulateArgs) -> Result<()> {
    let cfg = load(&a.config, a.p)?;
    let p = cfg.params.model()?.p;
    let res = simulate(&cfg, p)?;
    let summary = serde_json::json!({
        "p": p,
        "classification": res.classification,
        "beta": res.beta,
        "q_report": res.q_report,
        "decay_fit": res.decay_fit,
        "resolution_warnings": res.resolution_warnings,
    });
    write_history_csv(&res, output(&a.out)?)?;
    let text = serde_json::to_string_pretty(&summary)?;
    if a.out.is_some() {
        println!("{text}");
    } else {
        eprintln!("{text}");
    }
    Ok(())
}

fn sweep_cmd(a: &SweepArgs) -> Result<()> {
    let cfg = load(&a.config, None)?;
    let rows = run_sweep(&cfg)?;
    write_sweep_csv(&rows, output(&a.out)?)?;
    if let Some(path) = &a.summary {
        let summary = serde_json::json!({ "schema": cfg.schema, "config": cfg, "rows": rows });
        std::fs::write(path, serde_json::to_string_pretty(&summary)?)?;
    }
    Ok(())
}

fn bracket_cmd(a: &BracketArgs) -> Result<()> {
    let cfg = load(&a.config, None)?;
    let report = bracket_pstar(&cfg, a.tol)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn hypotheses_cmd(a: &HypothesesArgs) -> Result<()> {
    let cfg = load(&a.config, a.p)?;
    let params = cfg.params.model()?;
    let grid = cfg.grid_spec()?;
    let inputs = HypothesisInputs {
        q: a.q,
        big_m: a.big_m,
        delta: a.delta,
        m_script: a.m_script,
        outer_exponent: match a.outer {
            OuterArg::Q => OuterNormExponent::Q,
            OuterArg::R => OuterNormExponent::R,
        },
    };
    let report = local_average_hypotheses(&params, &cfg.u0.sample(grid)?, &cfg.w.sample(grid)?, &inputs)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn dispatch(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Exponents(a) => exponents(a),
        Command::Kernel(a) => kernel(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::Bracket(a) => bracket_cmd(a),
        Command::Hypotheses(a) => hypotheses_cmd(a),
        Command::Selftest => {
            let checks = run_selftest();
            print!("{}", format_table(&checks));
            return if checks.iter().all(Check::passed) { 0 } else { 2 };
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("fracsim: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

/// Parses `argv` (program name first) and runs the subcommand. Exit codes:
/// 0 success, 1 usage, configuration or input errors, 2 numerical failures.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match std::env::var(THREADS_ENV) {
        Err(_) => dispatch(cli),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(pool) => pool.install(|| dispatch(cli)),
                Err(e) => {
                    eprintln!("fracsim: cannot build thread pool: {e}");
                    1
                }
            },
            _ => {
                eprintln!("fracsim: {THREADS_ENV} must be a positive integer, got {v:?}");
                1
            }
        },
    }
}
