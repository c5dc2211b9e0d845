use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;

use crate::error::Result;
use crate::grid::{Field, PeriodicGrid};
use crate::solver::pde::Pde;
use crate::spectral::{mode_indices, FftPlan};

#[derive(Clone, Debug, PartialEq)]
pub struct InitialConditionOptions {
    /// Highest per-axis frequency of the Fourier noise (K-S, N-S).
    pub cutoff: usize,
    /// Number of square perturbation patches (G-S).
    pub patches: usize,
    /// Patch side as a fraction of the edge length.
    pub patch_fraction: f64,
}

impl Default for InitialConditionOptions {
    fn default() -> Self {
        Self {
            cutoff: 5,
            patches: 3,
            patch_fraction: 0.1,
        }
    }
}

pub fn sample_initial_condition(pde: &Pde, grid: &PeriodicGrid, seed: u64) -> Result<Field> {
    sample_initial_condition_with(pde, grid, seed, &InitialConditionOptions::default())
}

pub fn sample_initial_condition_with(
    pde: &Pde,
    grid: &PeriodicGrid,
    seed: u64,
    opts: &InitialConditionOptions,
) -> Result<Field> {
    pde.check_grid(grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match pde {
        Pde::KuramotoSivashinsky { .. } | Pde::NavierStokes { .. } => {
            Ok(fourier_noise(grid, opts.cutoff, &mut rng))
        }
        Pde::GrayScott { .. } => Ok(gray_scott_patches(grid, opts, &mut rng)),
    }
}

/// Hermitian-symmetric Gaussian noise on modes `0 < max|m_j| <= cutoff`,
/// scaled to unit RMS.
fn fourier_noise(grid: &PeriodicGrid, cutoff: usize, rng: &mut ChaCha8Rng) -> Field {
    let dim = grid.dim();
    let cutoff = cutoff.min(grid.n() / 2 - 1) as i64;
    let side = (2 * cutoff + 1) as usize;
    // Draw a complex normal for every mode of the full box in a fixed order.
    let box_len = side.pow(dim as u32);
    let draws: Vec<Complex64> = (0..box_len)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let box_index = |m: &[i64]| -> usize {
        m[..dim]
            .iter()
            .fold(0usize, |acc, &v| acc * side + (v + cutoff) as usize)
    };
    let mut spec = vec![Complex64::default(); grid.spectral_len()];
    for (e, m) in mode_indices(grid).iter().enumerate() {
        if m[..dim].iter().any(|v| v.abs() > cutoff) || m[..dim].iter().all(|&v| v == 0) {
            continue;
        }
        let neg: Vec<i64> = m[..dim].iter().map(|v| -v).collect();
        spec[e] = 0.5 * (draws[box_index(m)] + draws[box_index(&neg)].conj());
    }
    let mut values = vec![0.0; grid.len()];
    FftPlan::new(*grid).inverse(&spec, &mut values);
    let rms = (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt();
    for v in &mut values {
        *v /= rms;
    }
    Field::from_parts_unchecked(*grid, 1, values)
}

/// `u = 1, v = 0` background with square patches of `u = 0.5, v = 0.25`.
fn gray_scott_patches(grid: &PeriodicGrid, opts: &InitialConditionOptions, rng: &mut ChaCha8Rng) -> Field {
    let length = grid.length();
    let side = opts.patch_fraction * length;
    let corners: Vec<Vec<f64>> = (0..opts.patches)
        .map(|_| (0..grid.dim()).map(|_| rng.random_range(0.0..length)).collect())
        .collect();
    let npts = grid.len();
    let mut values = vec![1.0; npts];
    values.extend(std::iter::repeat_n(0.0, npts));
    for p in 0..npts {
        let x = grid.coordinates(p);
        let inside = corners
            .iter()
            .any(|c| x.iter().zip(c).all(|(xi, ci)| (xi - ci).rem_euclid(length) < side));
        if inside {
            values[p] = 0.5;
            values[npts + p] = 0.25;
        }
    }
    Field::from_parts_unchecked(*grid, 2, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::forward;

    #[test]
    fn deterministic_in_seed() {
        let grid = PeriodicGrid::new(2, 32, 50.0).unwrap();
        for pde in [Pde::kuramoto_sivashinsky(2), Pde::gray_scott(0.029, 0.057, 2.1e-5, 1.1e-5)] {
            let a = sample_initial_condition(&pde, &grid, 7).unwrap();
            let b = sample_initial_condition(&pde, &grid, 7).unwrap();
            let c = sample_initial_condition(&pde, &grid, 8).unwrap();
            assert_eq!(a, b);
            assert_ne!(a, c);
        }
    }

    #[test]
    fn noise_has_unit_rms_and_is_band_limited() {
        for dim in 1..=3 {
            let grid = PeriodicGrid::new(dim, 16, 50.0).unwrap();
            let f = sample_initial_condition(&Pde::kuramoto_sivashinsky(dim), &grid, 3).unwrap();
            assert!((f.rms() - 1.0).abs() < 1e-12);
            let spec = forward(&f).unwrap();
            assert!(spec.coeffs()[0].norm() < 1e-9);
            for (m, c) in mode_indices(&grid).iter().zip(spec.coeffs()) {
                if m.iter().any(|v| v.abs() > 5) {
                    assert!(c.norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn gray_scott_values_are_two_valued() {
        let grid = PeriodicGrid::new(2, 64, 2.0).unwrap();
        let f = sample_initial_condition(&Pde::gray_scott(0.029, 0.057, 2.1e-5, 1.1e-5), &grid, 1).unwrap();
        let (u, v) = (f.channel(0), f.channel(1));
        let mut perturbed = 0;
        for (a, b) in u.iter().zip(v) {
            match (*a, *b) {
                (1.0, 0.0) => {}
                (0.5, 0.25) => perturbed += 1,
                other => panic!("unexpected value {other:?}"),
            }
        }
        assert!(perturbed > 0);
    }
}
