use std::f64::consts::PI;

use breakeven::grid::{wavenumbers, Field, PeriodicGrid};
use breakeven::spectral::{forward, inverse, spectral_downsample, spectral_upsample};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_field(dim: usize, n: usize, channels: usize, seed: u64) -> Field {
    let grid = PeriodicGrid::new(dim, n, 2.0 * PI).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.len() * channels).map(|_| rng.random_range(-1.0..1.0)).collect();
    Field::new(grid, channels, values).unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn shape() -> impl Strategy<Value = (usize, usize)> {
    prop_oneof![
        prop::sample::select(vec![4usize, 6, 16, 30, 64]).prop_map(|n| (1, n)),
        prop::sample::select(vec![4usize, 8, 12, 32]).prop_map(|n| (2, n)),
        prop::sample::select(vec![4usize, 6, 8]).prop_map(|n| (3, n)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inverse_undoes_forward((dim, n) in shape(), channels in 1usize..3, seed in any::<u64>()) {
        let f = random_field(dim, n, channels, seed);
        let back = inverse(&forward(&f).unwrap()).unwrap();
        let scale = f.max_abs();
        prop_assert!(max_diff(back.values(), f.values()) <= 1e-12 * scale);
    }

    #[test]
    fn downsample_is_idempotent((dim, n) in shape(), seed in any::<u64>(), pick in 0usize..3) {
        let targets: Vec<usize> = (4..n).filter(|m| m % 2 == 0).collect();
        prop_assume!(!targets.is_empty());
        let m = targets[pick % targets.len()];
        let f = random_field(dim, n, 1, seed);
        let once = spectral_downsample(&f, m).unwrap();
        let twice = spectral_downsample(&once, m).unwrap();
        prop_assert_eq!(twice.values(), once.values());
    }

    #[test]
    fn chained_downsampling_matches_direct(seed in any::<u64>()) {
        let f = random_field(2, 32, 1, seed);
        let direct = spectral_downsample(&f, 8).unwrap();
        let chained = spectral_downsample(&spectral_downsample(&f, 16).unwrap(), 8).unwrap();
        prop_assert!(max_diff(direct.values(), chained.values()) < 1e-13);
    }

    #[test]
    fn band_limited_downsample_is_exact_on_shared_points(
        dim in 1usize..=3,
        amps in prop::collection::vec(-1.0f64..1.0, 6),
    ) {
        // Modes |k| <= 2 survive a downsample to n = 8 (Nyquist 4).
        let n = if dim == 3 { 16 } else { 32 };
        let m = 8;
        let grid = PeriodicGrid::new(dim, n, 2.0 * PI).unwrap();
        let f = Field::from_fn(grid, 1, |_, x| {
            let s: f64 = x.iter().sum();
            amps[0] + amps[1] * s.cos() + amps[2] * (2.0 * x[0]).sin()
                + amps[3] * (x[0] - 2.0 * x[dim - 1]).cos()
                + amps[4] * (2.0 * s).sin() + amps[5] * x[dim - 1].sin()
        })
        .unwrap();
        let coarse = spectral_downsample(&f, m).unwrap();
        let stride = n / m;
        let coarse_grid = coarse.grid();
        for (i, v) in coarse.values().iter().enumerate() {
            let x = coarse_grid.coordinates(i);
            let fine_index = x
                .iter()
                .fold(0usize, |acc, xi| acc * n + (xi / grid.dx()).round() as usize);
            prop_assert!((v - f.values()[fine_index]).abs() < 1e-10, "point {i}");
            prop_assert_eq!(fine_index % stride, 0);
        }
    }

    #[test]
    fn upsample_then_downsample_restores((dim, n) in shape(), seed in any::<u64>()) {
        // Drop the Nyquist mode first: it does not survive upsampling.
        let f = spectral_downsample(&spectral_upsample(&random_field(dim, n, 1, seed), 2 * n).unwrap(), n).unwrap();
        let back = spectral_downsample(&spectral_upsample(&f, 2 * n).unwrap(), n).unwrap();
        prop_assert!(max_diff(back.values(), f.values()) < 1e-12);
    }
}

#[test]
fn wavenumbers_antisymmetric_on_full_axes() {
    for n in [4usize, 6, 8, 10, 16, 34, 128] {
        let grid = PeriodicGrid::new(2, n, 3.0).unwrap();
        let k = &wavenumbers(&grid)[0];
        for i in 1..n {
            let j = n - i;
            if 2 * i == n {
                continue;
            }
            assert_eq!(k[i], -k[j], "n = {n}, i = {i}");
        }
        assert_eq!(k[0], 0.0);
    }
}
