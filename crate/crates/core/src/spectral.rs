//! Periodic-box discretization of R^N.
//!
//! The box is `[-L, L]^N` with `n` points per axis and spacing `h = 2L/n`;
//! values are stored row-major (last axis fastest). Fourier modes are the
//! DFT divided by `n^N`, so a constant field `c` has zero mode exactly `c`
//! and Parseval reads `Σ|f|² h^N = (2L)^N Σ|F|²`. The wavenumber of index
//! `k` (signed, `-n/2 ≤ k < n/2`) is `ξ = πk/L`.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{domain, FracError, Result};

/// Fraction of spectral energy allowed in the top octave before a resolution
/// warning is raised.
pub const TAIL_ENERGY_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub points: usize,
    pub half_width: f64,
}

impl GridSpec {
    pub fn new(dim: usize, points: usize, half_width: f64) -> Result<Self> {
        let g = GridSpec { dim, points, half_width };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return domain(format!("dimension must be 1, 2 or 3, got {}", self.dim));
        }
        if self.points < 64 || !self.points.is_power_of_two() {
            return domain(format!("points per axis must be a power of two >= 64, got {}", self.points));
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return domain(format!("half width must be positive, got {}", self.half_width));
        }
        Ok(())
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn volume(&self) -> f64 {
        (2.0 * self.half_width).powi(self.dim as i32)
    }

    /// Per-axis indices of a flat index.
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let n = self.points;
        let mut out = [0; 3];
        let mut rest = idx;
        for a in (0..self.dim).rev() {
            out[a] = rest % n;
            rest /= n;
        }
        out
    }

    /// Physical coordinates of a flat index (unused axes are 0).
    pub fn coordinates(&self, idx: usize) -> [f64; 3] {
        let ii = self.unravel(idx);
        let h = self.spacing();
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = -self.half_width + ii[a] as f64 * h;
        }
        x
    }

    pub fn radius(&self, idx: usize) -> f64 {
        let x = self.coordinates(idx);
        (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
    }

    fn signed(&self, i: usize) -> i64 {
        let n = self.points as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Squared integer wavenumber `Σ k_a²` of a flat mode index.
    pub fn mode_index_sq(&self, idx: usize) -> u64 {
        let ii = self.unravel(idx);
        (0..self.dim).map(|a| (self.signed(ii[a]).pow(2)) as u64).sum()
    }

    /// `|ξ|²` of a flat mode index.
    pub fn xi_sq(&self, idx: usize) -> f64 {
        let unit = std::f64::consts::PI / self.half_width;
        self.mode_index_sq(idx) as f64 * unit * unit
    }

    /// Distinct values of `|ξ|²` (ascending) and, for every mode, the index of
    /// its value in that list.
    pub fn mode_groups(&self) -> (Vec<f64>, Vec<usize>) {
        let keys: Vec<u64> = (0..self.len()).map(|i| self.mode_index_sq(i)).collect();
        let mut distinct = keys.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let group = keys.iter().map(|k| distinct.binary_search(k).unwrap()).collect();
        let unit = std::f64::consts::PI / self.half_width;
        let xi_sq = distinct.iter().map(|&k| k as f64 * unit * unit).collect();
        (xi_sq, group)
    }

    fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self != other {
            return Err(FracError::Size(format!("grid mismatch: {self:?} vs {other:?}")));
        }
        Ok(())
    }
}

/// Real-valued samples on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridSpec,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(FracError::Size(format!(
                "field has {} values, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return domain("field values must be finite");
        }
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Field { grid, values: vec![0.0; grid.len()] }
    }

    /// Sample `f(x)` at every grid point; `x` has `dim` coordinates.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.len())
            .map(|i| f(&grid.coordinates(i)[..grid.dim]))
            .collect();
        Field::new(grid, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `Σ f h^N`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// `Σ f g h^N`.
    pub fn inner(&self, other: &Field) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        Ok(s * self.grid.cell_volume())
    }

    pub fn scaled(&self, c: f64) -> Field {
        Field { grid: self.grid, values: self.values.iter().map(|v| c * v).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Fourier modes of a real field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    modes: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: GridSpec, modes: Vec<Complex64>) -> Result<Self> {
        grid.validate()?;
        if modes.len() != grid.len() {
            return Err(FracError::Size(format!(
                "spectrum has {} modes, grid needs {}",
                modes.len(),
                grid.len()
            )));
        }
        Ok(SpectralField { grid, modes })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn modes(&self) -> &[Complex64] {
        &self.modes
    }

    pub fn modes_mut(&mut self) -> &mut [Complex64] {
        &mut self.modes
    }

    /// Largest `|F(k) - conj(F(-k))|`; zero for the spectrum of a real field.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.grid.points;
        let mut worst: f64 = 0.0;
        for idx in 0..self.modes.len() {
            let ii = self.grid.unravel(idx);
            let mut mirror = 0;
            for a in 0..self.grid.dim {
                mirror = mirror * n + (n - ii[a]) % n;
            }
            worst = worst.max((self.modes[idx] - self.modes[mirror].conj()).norm());
        }
        worst
    }

    /// Multiply every mode by `m(|ξ|²)`.
    pub fn apply_multiplier(&mut self, m: impl Fn(f64) -> f64) {
        for (idx, c) in self.modes.iter_mut().enumerate() {
            *c *= m(self.grid.xi_sq(idx));
        }
    }

    /// Fraction of `Σ|F|²` carried by modes with some `|k_a| ≥ n/4`.
    pub fn tail_energy_fraction(&self) -> f64 {
        let quarter = (self.grid.points / 4) as i64;
        let mut total = 0.0;
        let mut tail = 0.0;
        for (idx, c) in self.modes.iter().enumerate() {
            let e = c.norm_sqr();
            total += e;
            let ii = self.grid.unravel(idx);
            if (0..self.grid.dim).any(|a| self.grid.signed(ii[a]).abs() >= quarter) {
                tail += e;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            tail / total
        }
    }
}

/// Reusable FFT plans for one grid. Immutable once built and shareable
/// across threads.
#[derive(Clone)]
pub struct Transform {
    grid: GridSpec,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transform").field("grid", &self.grid).finish()
    }
}

impl Transform {
    pub fn new(grid: &GridSpec) -> Result<Self> {
        grid.validate()?;
        let mut planner = FftPlanner::new();
        Ok(Transform {
            grid: *grid,
            forward: planner.plan_fft_forward(grid.points),
            inverse: planner.plan_fft_inverse(grid.points),
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn run(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.grid.points;
        let dim = self.grid.dim;
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        // last axis is contiguous
        for line in data.chunks_exact_mut(n) {
            plan.process_with_scratch(line, &mut scratch);
        }
        if dim == 1 {
            return;
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for axis in 0..dim - 1 {
            let stride = n.pow((dim - 1 - axis) as u32);
            let block = stride * n;
            for start in (0..data.len()).step_by(block) {
                for off in 0..stride {
                    let base = start + off;
                    for k in 0..n {
                        buf[k] = data[base + k * stride];
                    }
                    plan.process_with_scratch(&mut buf, &mut scratch);
                    for k in 0..n {
                        data[base + k * stride] = buf[k];
                    }
                }
            }
        }
    }

    /// Forward transform of raw values into a preallocated mode buffer.
    pub fn forward_into(&self, values: &[f64], modes: &mut [Complex64]) -> Result<()> {
        if values.len() != self.grid.len() || modes.len() != self.grid.len() {
            return Err(FracError::Size("buffer length does not match grid".into()));
        }
        for (m, v) in modes.iter_mut().zip(values) {
            *m = Complex64::new(*v, 0.0);
        }
        self.run(modes, &self.forward);
        let scale = 1.0 / self.grid.len() as f64;
        for m in modes.iter_mut() {
            *m *= scale;
        }
        Ok(())
    }

    /// Inverse transform in place; the real parts are written to `values`.
    pub fn inverse_into(&self, modes: &mut [Complex64], values: &mut [f64]) -> Result<()> {
        if values.len() != self.grid.len() || modes.len() != self.grid.len() {
            return Err(FracError::Size("buffer length does not match grid".into()));
        }
        self.run(modes, &self.inverse);
        for (v, m) in values.iter_mut().zip(modes.iter()) {
            *v = m.re;
        }
        Ok(())
    }

    pub fn to_spectral(&self, f: &Field) -> Result<SpectralField> {
        self.grid.check_same(&f.grid)?;
        let mut modes = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        self.forward_into(&f.values, &mut modes)?;
        Ok(SpectralField { grid: self.grid, modes })
    }

    pub fn to_real(&self, spec: &SpectralField) -> Result<Field> {
        self.grid.check_same(&spec.grid)?;
        let mut modes = spec.modes.clone();
        let mut values = vec![0.0; self.grid.len()];
        self.inverse_into(&mut modes, &mut values)?;
        Field::new(self.grid, values)
    }
}

pub fn to_spectral(f: &Field) -> Result<SpectralField> {
    Transform::new(&f.grid)?.to_spectral(f)
}

pub fn to_real(spec: &SpectralField) -> Result<Field> {
    Transform::new(&spec.grid)?.to_real(spec)
}

fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s <= 1.0 {
        Ok(())
    } else {
        domain(format!("fractional order s must lie in (0,1], got {s}"))
    }
}

/// Spectral fractional Laplacian: multiply mode `ξ` by `|ξ|^{2s}`.
pub fn fractional_laplacian(f: &Field, s: f64) -> Result<Field> {
    check_s(s)?;
    let t = Transform::new(&f.grid)?;
    let mut spec = t.to_spectral(f)?;
    spec.apply_multiplier(|xi_sq| if xi_sq == 0.0 { 0.0 } else { xi_sq.powf(s) });
    t.to_real(&spec)
}

/// Riemann-sum `L^q` norm of raw samples with cell volume `cell`.
pub fn lq_norm_values(values: &[f64], cell: f64, q: f64) -> Result<f64> {
    if q.is_nan() || q < 1.0 {
        return domain(format!("L^q norm requires q >= 1, got {q}"));
    }
    let peak = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if q == f64::INFINITY || peak == 0.0 {
        return Ok(peak);
    }
    // scale by the peak so large q cannot overflow
    let s: f64 = values.iter().map(|v| (v.abs() / peak).powf(q)).sum();
    Ok(peak * (s * cell).powf(1.0 / q))
}

/// `(Σ |f|^q h^N)^{1/q}`, or the max-abs value for `q = ∞`.
pub fn lq_norm(f: &Field, q: f64) -> Result<f64> {
    lq_norm_values(&f.values, f.grid.cell_volume(), q)
}

/// Sidecar metadata written next to a raw field dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DumpHeader {
    pub dim: usize,
    pub points: usize,
    pub half_width: f64,
}

fn sidecar_path(raw: &Path) -> PathBuf {
    let mut p = raw.as_os_str().to_owned();
    p.push(".json");
    PathBuf::from(p)
}

/// Write the values as raw little-endian f64 (row-major) to `path` and the
/// grid description to `path.json`.
pub fn write_field_dump(f: &Field, path: &Path) -> Result<()> {
    let bytes: Vec<u8> = f.values.iter().flat_map(|v| v.to_le_bytes()).collect();
    fs::write(path, bytes)?;
    let header = DumpHeader { dim: f.grid.dim, points: f.grid.points, half_width: f.grid.half_width };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&header)?)?;
    Ok(())
}

pub fn read_field_dump(path: &Path) -> Result<Field> {
    let header: DumpHeader = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
    let grid = GridSpec::new(header.dim, header.points, header.half_width)?;
    let bytes = fs::read(path)?;
    if bytes.len() != 8 * grid.len() {
        return Err(FracError::Size(format!(
            "dump holds {} bytes, grid needs {}",
            bytes.len(),
            8 * grid.len()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Field::new(grid, values)
}
