//! Multidimensional real-input DFT on periodic grids.
//!
//! Conventions: the forward transform is unnormalized, the inverse divides by
//! `n^dim`, and the last axis is the real-transform axis (half spectrum of
//! `n/2 + 1` entries). Spectra are row-major in the shape returned by
//! [`PeriodicGrid::spectral_shape`].

use std::sync::Arc;

use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{signed_frequency, Field, PeriodicGrid};

/// Cached plans and line buffers for one grid.
pub struct FftPlan {
    grid: PeriodicGrid,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    real_line: Vec<f64>,
    half_line: Vec<Complex64>,
    line: Vec<Complex64>,
    scratch: Vec<Complex64>,
    work: Vec<Complex64>,
}

impl FftPlan {
    pub fn new(grid: PeriodicGrid) -> Self {
        let n = grid.n();
        let mut real_planner = RealFftPlanner::<f64>::new();
        let r2c = real_planner.plan_fft_forward(n);
        let c2r = real_planner.plan_fft_inverse(n);
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch_len = [
            r2c.get_scratch_len(),
            c2r.get_scratch_len(),
            fwd.get_inplace_scratch_len(),
            inv.get_inplace_scratch_len(),
        ]
        .into_iter()
        .max()
        .unwrap_or(0);
        Self {
            grid,
            r2c,
            c2r,
            fwd,
            inv,
            real_line: vec![0.0; n],
            half_line: vec![Complex64::default(); n / 2 + 1],
            line: vec![Complex64::default(); n],
            scratch: vec![Complex64::default(); scratch_len],
            work: vec![Complex64::default(); grid.spectral_len()],
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    /// Forward transform of one real channel into `out` (half spectrum).
    pub fn forward(&mut self, input: &[f64], out: &mut [Complex64]) {
        let n = self.grid.n();
        let h = n / 2 + 1;
        assert_eq!(input.len(), self.grid.len());
        assert_eq!(out.len(), self.grid.spectral_len());
        for (src, dst) in input.chunks_exact(n).zip(out.chunks_exact_mut(h)) {
            self.real_line.copy_from_slice(src);
            self.r2c
                .process_with_scratch(&mut self.real_line, dst, &mut self.scratch)
                .expect("buffer sizes match the plan");
        }
        for axis in 0..self.grid.dim() - 1 {
            self.complex_axis(out, axis, false);
        }
    }

    /// Inverse transform of one half spectrum into `out`, normalized by `n^dim`.
    pub fn inverse(&mut self, input: &[Complex64], out: &mut [f64]) {
        let n = self.grid.n();
        let h = n / 2 + 1;
        assert_eq!(input.len(), self.grid.spectral_len());
        assert_eq!(out.len(), self.grid.len());
        let mut work = std::mem::take(&mut self.work);
        work.copy_from_slice(input);
        for axis in 0..self.grid.dim() - 1 {
            self.complex_axis(&mut work, axis, true);
        }
        let norm = 1.0 / self.grid.len() as f64;
        for (src, dst) in work.chunks_exact(h).zip(out.chunks_exact_mut(n)) {
            self.half_line.copy_from_slice(src);
            // DC and Nyquist must be real for a real output.
            self.half_line[0].im = 0.0;
            self.half_line[h - 1].im = 0.0;
            self.c2r
                .process_with_scratch(&mut self.half_line, dst, &mut self.scratch)
                .expect("buffer sizes match the plan");
            for v in dst.iter_mut() {
                *v *= norm;
            }
        }
        self.work = work;
    }

    fn complex_axis(&mut self, data: &mut [Complex64], axis: usize, inverse: bool) {
        let shape = self.grid.spectral_shape();
        let n = shape[axis];
        let stride: usize = shape[axis + 1..].iter().product();
        let outer: usize = shape[..axis].iter().product();
        let plan = if inverse { &self.inv } else { &self.fwd };
        for o in 0..outer {
            let base = o * n * stride;
            for s in 0..stride {
                for i in 0..n {
                    self.line[i] = data[base + i * stride + s];
                }
                plan.process_with_scratch(&mut self.line, &mut self.scratch);
                for i in 0..n {
                    data[base + i * stride + s] = self.line[i];
                }
            }
        }
    }
}

/// Spectral coefficients of a multichannel field.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    grid: PeriodicGrid,
    channels: usize,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub(crate) fn from_parts(grid: PeriodicGrid, channels: usize, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.spectral_len() * channels);
        Self {
            grid,
            channels,
            coeffs,
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn channel(&self, c: usize) -> &[Complex64] {
        let len = self.grid.spectral_len();
        &self.coeffs[c * len..(c + 1) * len]
    }

    /// `sum |x|^2` of the physical field, recovered from the half spectrum.
    pub fn energy(&self) -> f64 {
        let n = self.grid.n();
        let h = n / 2 + 1;
        let total: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let last = i % h;
                let weight = if last == 0 || last == h - 1 { 1.0 } else { 2.0 };
                weight * c.norm_sqr()
            })
            .sum();
        total / self.grid.len() as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

pub fn forward(field: &Field) -> Result<Spectrum> {
    if let Some(index) = field.values().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let grid = *field.grid();
    let mut plan = FftPlan::new(grid);
    let len = grid.spectral_len();
    let mut coeffs = vec![Complex64::default(); len * field.channels()];
    for c in 0..field.channels() {
        plan.forward(field.channel(c), &mut coeffs[c * len..(c + 1) * len]);
    }
    Ok(Spectrum {
        grid,
        channels: field.channels(),
        coeffs,
    })
}

pub fn inverse(spectrum: &Spectrum) -> Result<Field> {
    if let Some(index) = spectrum
        .coeffs
        .iter()
        .position(|v| !(v.re.is_finite() && v.im.is_finite()))
    {
        return Err(Error::NonFinite { index });
    }
    let grid = spectrum.grid;
    let mut plan = FftPlan::new(grid);
    let len = grid.spectral_len();
    let mut values = vec![0.0; grid.len() * spectrum.channels];
    for (c, out) in values.chunks_exact_mut(grid.len()).enumerate() {
        plan.inverse(&spectrum.coeffs[c * len..(c + 1) * len], out);
    }
    Field::new(grid, spectrum.channels, values)
}

/// Signed frequency of every half-spectrum entry, one `[i64; 3]` per entry
/// (unused trailing axes are zero).
pub fn mode_indices(grid: &PeriodicGrid) -> Vec<[i64; 3]> {
    let shape = grid.spectral_shape();
    let dim = grid.dim();
    let n = grid.n();
    (0..grid.spectral_len())
        .map(|flat| {
            let mut rem = flat;
            let mut m = [0i64; 3];
            for axis in (0..dim).rev() {
                let i = rem % shape[axis];
                rem /= shape[axis];
                m[axis] = if axis == dim - 1 {
                    i as i64
                } else {
                    signed_frequency(i, n)
                };
            }
            m
        })
        .collect()
}

/// Largest retained frequency under the 2/3 rule: products of modes up to
/// this bound alias only onto modes above it.
pub fn dealias_cutoff(n: usize) -> i64 {
    ((n - 1) / 3) as i64
}

/// `true` for entries kept by 2/3-rule truncation on every axis.
pub fn dealias_mask(grid: &PeriodicGrid) -> Vec<bool> {
    let cutoff = dealias_cutoff(grid.n());
    mode_indices(grid)
        .iter()
        .map(|m| m.iter().all(|v| v.abs() <= cutoff))
        .collect()
}

/// Copy modes representable on both grids (strictly below either Nyquist),
/// rescaling for the unnormalized forward convention.
pub(crate) fn resample(spec: &Spectrum, target: PeriodicGrid) -> Spectrum {
    let src = spec.grid;
    let keep = (src.n().min(target.n()) / 2) as i64;
    let scale = target.len() as f64 / src.len() as f64;
    let src_shape = src.spectral_shape();
    let dst_len = target.spectral_len();
    let src_len = src.spectral_len();
    let dim = src.dim();
    let modes = mode_indices(&target);
    let mut coeffs = vec![Complex64::default(); dst_len * spec.channels];
    for (flat, m) in modes.iter().enumerate() {
        if m[..dim].iter().any(|v| v.abs() >= keep) {
            continue;
        }
        let mut src_flat = 0usize;
        for axis in 0..dim {
            let idx = if m[axis] >= 0 {
                m[axis] as usize
            } else {
                (src.n() as i64 + m[axis]) as usize
            };
            src_flat = src_flat * src_shape[axis] + idx;
        }
        for c in 0..spec.channels {
            coeffs[c * dst_len + flat] = spec.coeffs[c * src_len + src_flat] * scale;
        }
    }
    Spectrum {
        grid: target,
        channels: spec.channels,
        coeffs,
    }
}

/// Truncate a field to a coarser grid in Fourier space. Modes at or above the
/// target Nyquist are dropped; `target_n == n` is the identity.
pub fn spectral_downsample(field: &Field, target_n: usize) -> Result<Field> {
    let grid = *field.grid();
    if target_n > grid.n() {
        return Err(Error::arg(format!(
            "downsample target {target_n} exceeds resolution {}",
            grid.n()
        )));
    }
    let target = grid.with_resolution(target_n)?;
    if target_n == grid.n() {
        return Ok(field.clone());
    }
    inverse(&resample(&forward(field)?, target))
}

/// Trigonometric interpolation of a field onto a finer grid (zero padding).
/// The source Nyquist mode is dropped so the result stays symmetric.
pub fn spectral_upsample(field: &Field, target_n: usize) -> Result<Field> {
    let grid = *field.grid();
    if target_n < grid.n() {
        return Err(Error::arg(format!(
            "upsample target {target_n} below resolution {}",
            grid.n()
        )));
    }
    let target = grid.with_resolution(target_n)?;
    if target_n == grid.n() {
        return Ok(field.clone());
    }
    inverse(&resample(&forward(field)?, target))
}

/// Bring a field to resolution `target_n` in either direction.
pub fn spectral_resample(field: &Field, target_n: usize) -> Result<Field> {
    if target_n <= field.grid().n() {
        spectral_downsample(field, target_n)
    } else {
        spectral_upsample(field, target_n)
    }
}
