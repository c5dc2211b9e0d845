//! Fourth-order exponential time differencing (Cox-Matthews ETDRK4).
//!
//! The phi-type coefficients are evaluated by averaging over a circle of
//! radius one around each scaled symbol value `z = dt * L`, which avoids the
//! cancellation of the closed forms near `z = 0`.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

/// Points on the averaging contour.
pub const CONTOUR_POINTS: usize = 32;
pub const CONTOUR_RADIUS: f64 = 1.0;

fn contour_mean(z: f64, f: impl Fn(Complex64) -> Complex64) -> f64 {
    let mut acc = Complex64::default();
    for j in 0..CONTOUR_POINTS {
        let theta = 2.0 * PI * (j as f64 + 0.5) / CONTOUR_POINTS as f64;
        let zr = Complex64::new(z, 0.0) + Complex64::from_polar(CONTOUR_RADIUS, theta);
        acc += f(zr);
    }
    (acc / CONTOUR_POINTS as f64).re
}

/// `phi_1(z) = (e^z - 1) / z` by contour averaging.
pub fn phi1(z: f64) -> f64 {
    contour_mean(z, |w| (w.exp() - 1.0) / w)
}

/// `(e^z - 1) / z` evaluated directly; accurate only away from zero.
pub fn phi1_direct(z: f64) -> f64 {
    z.exp_m1() / z
}

/// Per-mode stepping coefficients for one timestep `dt`.
#[derive(Clone, Debug)]
pub struct EtdrkCoefficients {
    pub dt: f64,
    /// `e^{dt L}`
    pub exp_full: Vec<f64>,
    /// `e^{dt L / 2}`
    pub exp_half: Vec<f64>,
    /// Half-step weight `dt * (e^{z/2} - 1) / z`.
    pub q: Vec<f64>,
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    pub f3: Vec<f64>,
}

impl EtdrkCoefficients {
    pub fn len(&self) -> usize {
        self.exp_full.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exp_full.is_empty()
    }
}

/// Coefficient tables for a real diagonal symbol.
pub fn etdrk_coefficients(symbol: &[f64], dt: f64) -> EtdrkCoefficients {
    assert!(dt > 0.0, "dt must be positive");
    let len = symbol.len();
    let mut c = EtdrkCoefficients {
        dt,
        exp_full: Vec::with_capacity(len),
        exp_half: Vec::with_capacity(len),
        q: Vec::with_capacity(len),
        f1: Vec::with_capacity(len),
        f2: Vec::with_capacity(len),
        f3: Vec::with_capacity(len),
    };
    // Symbols repeat heavily (they depend on |k| only); memoize by bit pattern.
    let mut cache: std::collections::HashMap<u64, [f64; 4]> = std::collections::HashMap::new();
    for &l in symbol {
        let z = dt * l;
        c.exp_full.push(z.exp());
        c.exp_half.push((z / 2.0).exp());
        let [q, f1, f2, f3] = *cache.entry(z.to_bits()).or_insert_with(|| {
            [
                dt * contour_mean(z, |w| ((w / 2.0).exp() - 1.0) / w),
                dt * contour_mean(z, |w| {
                    (-4.0 - w + w.exp() * (4.0 - 3.0 * w + w * w)) / (w * w * w)
                }),
                dt * contour_mean(z, |w| (2.0 + w + w.exp() * (w - 2.0)) / (w * w * w)),
                dt * contour_mean(z, |w| {
                    (-4.0 - 3.0 * w - w * w + w.exp() * (4.0 - w)) / (w * w * w)
                }),
            ]
        });
        c.q.push(q);
        c.f1.push(f1);
        c.f2.push(f2);
        c.f3.push(f3);
    }
    c
}
