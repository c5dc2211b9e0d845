//! Periodic grids, fields sampled on them, and stored trajectories.
//!
//! All grids are square (or cubic): the same number of points `n` along every
//! axis of a periodic box `[0, L)^dim`. Field values are stored row-major with
//! the last axis contiguous, channel after channel.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicGrid {
    dim: usize,
    n: usize,
    length: f64,
}

impl PeriodicGrid {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "resolution {n} must be even and at least 4"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("edge length {length} must be > 0")));
        }
        Ok(Self { dim, n, length })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Number of physical grid points, `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Same box and dimension at a different resolution.
    pub fn with_resolution(&self, n: usize) -> Result<Self> {
        Self::new(self.dim, n, self.length)
    }

    /// Shape of the half spectrum: `n` along every axis but the last, which
    /// holds `n/2 + 1` non-negative frequencies.
    pub fn spectral_shape(&self) -> Vec<usize> {
        let mut shape = vec![self.n; self.dim];
        shape[self.dim - 1] = self.n / 2 + 1;
        shape
    }

    pub fn spectral_len(&self) -> usize {
        self.n.pow(self.dim as u32 - 1) * (self.n / 2 + 1)
    }

    /// Physical coordinates of a flat point index.
    pub fn coordinates(&self, flat: usize) -> Vec<f64> {
        let mut idx = flat;
        let mut coords = vec![0.0; self.dim];
        for axis in (0..self.dim).rev() {
            coords[axis] = (idx % self.n) as f64 * self.dx();
            idx /= self.n;
        }
        coords
    }
}

/// Signed integer frequency of index `i` on a full axis of length `n`
/// (standard DFT ordering, the Nyquist index maps to `-n/2`).
pub fn signed_frequency(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Angular wavenumbers `2 pi m / L` along one full axis, in DFT ordering.
pub fn wavenumbers(grid: &PeriodicGrid) -> Vec<Vec<f64>> {
    let scale = 2.0 * PI / grid.length();
    let axis: Vec<f64> = (0..grid.n())
        .map(|i| scale * signed_frequency(i, grid.n()) as f64)
        .collect();
    vec![axis; grid.dim()]
}

/// Wavenumbers laid out per the real-transform contract: every axis is full
/// except the last, which carries the `n/2 + 1` non-negative frequencies.
pub fn spectral_wavenumbers(grid: &PeriodicGrid) -> Vec<Vec<f64>> {
    let scale = 2.0 * PI / grid.length();
    let mut axes = wavenumbers(grid);
    axes[grid.dim() - 1] = (0..=grid.n() / 2).map(|m| scale * m as f64).collect();
    axes
}

/// Squared wavenumber magnitude `|k|^2` for every entry of the half spectrum.
pub fn wavenumber_sq(grid: &PeriodicGrid) -> Vec<f64> {
    let axes = spectral_wavenumbers(grid);
    let shape = grid.spectral_shape();
    let mut out = Vec::with_capacity(grid.spectral_len());
    for flat in 0..grid.spectral_len() {
        let mut rem = flat;
        let mut k2 = 0.0;
        for axis in (0..grid.dim()).rev() {
            let i = rem % shape[axis];
            rem /= shape[axis];
            k2 += axes[axis][i] * axes[axis][i];
        }
        out.push(k2);
    }
    out
}

/// Real-valued multichannel field on a periodic grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Field {
    grid: PeriodicGrid,
    channels: usize,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: PeriodicGrid, channels: usize, values: Vec<f64>) -> Result<Self> {
        if channels == 0 {
            return Err(Error::ShapeMismatch("a field needs at least one channel".into()));
        }
        if values.len() != channels * grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} values for {channels} channel(s) on {}^{}, got {}",
                channels * grid.len(),
                grid.n(),
                grid.dim(),
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            grid,
            channels,
            values,
        })
    }

    pub fn zeros(grid: PeriodicGrid, channels: usize) -> Self {
        Self {
            grid,
            channels,
            values: vec![0.0; channels * grid.len()],
        }
    }

    pub fn constant(grid: PeriodicGrid, channels: usize, value: f64) -> Self {
        Self {
            grid,
            channels,
            values: vec![value; channels * grid.len()],
        }
    }

    /// Build a field by evaluating `f(channel, coordinates)` at every point.
    pub fn from_fn(
        grid: PeriodicGrid,
        channels: usize,
        mut f: impl FnMut(usize, &[f64]) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(channels * grid.len());
        for c in 0..channels {
            for p in 0..grid.len() {
                values.push(f(c, &grid.coordinates(p)));
            }
        }
        Self::new(grid, channels, values)
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let len = self.grid.len();
        &self.values[c * len..(c + 1) * len]
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn rms(&self) -> f64 {
        (self.norm_sq() / self.values.len() as f64).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub(crate) fn from_parts_unchecked(grid: PeriodicGrid, channels: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), channels * grid.len());
        Self {
            grid,
            channels,
            values,
        }
    }
}

/// Ordered frames of one simulated solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub pde_id: String,
    pub seed: u64,
    frames: Vec<Field>,
    times: Vec<f64>,
}

impl Trajectory {
    pub fn new(pde_id: impl Into<String>, seed: u64, frames: Vec<Field>, times: Vec<f64>) -> Result<Self> {
        let Some(first) = frames.first() else {
            return Err(Error::ShapeMismatch("a trajectory needs at least one frame".into()));
        };
        if frames.len() != times.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} frames but {} times",
                frames.len(),
                times.len()
            )));
        }
        if frames
            .iter()
            .any(|f| f.grid() != first.grid() || f.channels() != first.channels())
        {
            return Err(Error::ShapeMismatch("frames disagree on grid or channels".into()));
        }
        if times[0] < 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::ShapeMismatch(
                "frame times must start at >= 0 and increase strictly".into(),
            ));
        }
        Ok(Self {
            pde_id: pde_id.into(),
            seed,
            frames,
            times,
        })
    }

    pub fn frames(&self) -> &[Field] {
        &self.frames
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.frames[0].grid()
    }

    pub fn channels(&self) -> usize {
        self.frames[0].channels()
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavenumbers_unit_box() {
        let g = PeriodicGrid::new(1, 4, 2.0 * PI).unwrap();
        let k = wavenumbers(&g);
        let expected = [0.0, 1.0, -2.0, -1.0];
        for (a, b) in k[0].iter().zip(expected) {
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn wavenumbers_scale_with_length() {
        let g = PeriodicGrid::new(1, 4, 2.0).unwrap();
        assert_eq!(wavenumbers(&g)[0], vec![0.0, PI, -2.0 * PI, -PI]);
    }

    #[test]
    fn wavenumbers_2d_ordering() {
        let g = PeriodicGrid::new(2, 8, 50.0).unwrap();
        let k = wavenumbers(&g);
        let m = [0, 1, 2, 3, -4, -3, -2, -1];
        for axis in &k {
            for (kk, mm) in axis.iter().zip(m) {
                let exact = 2.0 * PI * mm as f64 / 50.0;
                assert!((kk - exact).abs() <= 1e-15 * exact.abs().max(1.0));
            }
        }
        let half = spectral_wavenumbers(&g);
        assert_eq!(half[0].len(), 8);
        assert_eq!(half[1].len(), 5);
        assert!((half[1][4] - 2.0 * PI * 4.0 / 50.0).abs() < 1e-15);
    }

    #[test]
    fn wavenumbers_antisymmetric_off_nyquist() {
        for n in [4, 6, 16, 64] {
            let g = PeriodicGrid::new(1, n, 3.7).unwrap();
            let k = &wavenumbers(&g)[0];
            for i in 1..n {
                if i == n / 2 {
                    continue;
                }
                assert_eq!(k[i], -k[n - i]);
            }
        }
    }

    #[test]
    fn grid_invariants() {
        assert!(PeriodicGrid::new(0, 8, 1.0).is_err());
        assert!(PeriodicGrid::new(4, 8, 1.0).is_err());
        assert!(PeriodicGrid::new(2, 6, 1.0).is_ok());
        assert!(PeriodicGrid::new(2, 7, 1.0).is_err());
        assert!(PeriodicGrid::new(2, 2, 1.0).is_err());
        assert!(PeriodicGrid::new(2, 8, 0.0).is_err());
        let g = PeriodicGrid::new(3, 8, 1.0).unwrap();
        assert_eq!(g.len(), 512);
        assert_eq!(g.spectral_len(), 8 * 8 * 5);
    }

    #[test]
    fn field_rejects_non_finite_and_bad_shape() {
        let g = PeriodicGrid::new(1, 4, 1.0).unwrap();
        assert!(matches!(
            Field::new(g, 1, vec![0.0, f64::NAN, 0.0, 0.0]),
            Err(Error::NonFinite { index: 1 })
        ));
        assert!(Field::new(g, 2, vec![0.0; 4]).is_err());
    }

    #[test]
    fn trajectory_requires_increasing_times() {
        let g = PeriodicGrid::new(1, 4, 1.0).unwrap();
        let f = Field::zeros(g, 1);
        assert!(Trajectory::new("x", 0, vec![f.clone(), f.clone()], vec![0.5, 0.5]).is_err());
        assert!(Trajectory::new("x", 0, vec![], vec![]).is_err());
        assert!(Trajectory::new("x", 0, vec![f.clone(), f], vec![0.0, 0.5]).is_ok());
    }
}
