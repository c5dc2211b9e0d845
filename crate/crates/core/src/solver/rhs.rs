use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{spectral_wavenumbers, Field, PeriodicGrid};
use crate::solver::pde::Pde;
use crate::spectral::{dealias_mask, forward, FftPlan};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Pseudo-spectral evaluator of the nonlinear part `N(u)` for one PDE on one
/// grid. States and outputs are half spectra, channel after channel.
pub struct NonlinearOperator {
    pde: Pde,
    grid: PeriodicGrid,
    plan: FftPlan,
    /// Per-axis wavenumber for every half-spectrum entry.
    k: Vec<Vec<f64>>,
    k2: Vec<f64>,
    mask: Vec<bool>,
    forcing: Option<Vec<Complex64>>,
    spec_tmp: Vec<Complex64>,
    phys: Vec<Vec<f64>>,
}

impl NonlinearOperator {
    pub fn new(pde: &Pde, grid: PeriodicGrid) -> Result<Self> {
        pde.validate()?;
        pde.check_grid(&grid)?;
        let axes = spectral_wavenumbers(&grid);
        let shape = grid.spectral_shape();
        let len = grid.spectral_len();
        let dim = grid.dim();
        let mut k = vec![Vec::with_capacity(len); dim];
        for flat in 0..len {
            let mut rem = flat;
            for axis in (0..dim).rev() {
                let i = rem % shape[axis];
                rem /= shape[axis];
                k[axis].push(axes[axis][i]);
            }
        }
        let k2 = (0..len).map(|e| k.iter().map(|kk| kk[e] * kk[e]).sum()).collect();
        let forcing = match pde {
            Pde::NavierStokes {
                forcing: Some(f), ..
            } => {
                if f.grid() != &grid {
                    return Err(Error::ShapeMismatch("forcing grid differs from solver grid".into()));
                }
                Some(forward(f)?.coeffs().to_vec())
            }
            _ => None,
        };
        let scratch_fields = match pde {
            Pde::KuramotoSivashinsky { .. } => dim + 1,
            Pde::NavierStokes { .. } => 5,
            Pde::GrayScott { .. } => 3,
        };
        Ok(Self {
            pde: pde.clone(),
            grid,
            plan: FftPlan::new(grid),
            k,
            k2,
            mask: dealias_mask(&grid),
            forcing,
            spec_tmp: vec![Complex64::default(); len],
            phys: vec![vec![0.0; grid.len()]; scratch_fields],
        })
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    /// Inverse transform of `mult[e] * state[e]` restricted to dealiased modes.
    fn to_physical(&mut self, state: &[Complex64], mult: impl Fn(usize) -> Complex64, slot: usize) {
        for (e, out) in self.spec_tmp.iter_mut().enumerate() {
            *out = if self.mask[e] { mult(e) * state[e] } else { Complex64::default() };
        }
        let mut buf = std::mem::take(&mut self.phys[slot]);
        self.plan.inverse(&self.spec_tmp, &mut buf);
        self.phys[slot] = buf;
    }

    fn project(&mut self, slot: usize, out: &mut [Complex64], scale: f64) {
        let buf = std::mem::take(&mut self.phys[slot]);
        self.plan.forward(&buf, out);
        self.phys[slot] = buf;
        for (e, v) in out.iter_mut().enumerate() {
            *v = if self.mask[e] { *v * scale } else { Complex64::default() };
        }
    }

    /// Evaluate `N(state)` into `out`, both of length `channels * spectral_len`.
    pub fn eval(&mut self, state: &[Complex64], out: &mut [Complex64]) {
        let len = self.grid.spectral_len();
        let npts = self.grid.len();
        debug_assert_eq!(state.len(), len * self.pde.channels());
        match self.pde.clone() {
            Pde::KuramotoSivashinsky { .. } => {
                let dim = self.grid.dim();
                for axis in 0..dim {
                    let k = std::mem::take(&mut self.k[axis]);
                    self.to_physical(state, |e| I * k[e], axis);
                    self.k[axis] = k;
                }
                let (grads, rest) = self.phys.split_at_mut(dim);
                let acc = &mut rest[0];
                for p in 0..npts {
                    acc[p] = grads.iter().map(|g| g[p] * g[p]).sum();
                }
                self.project(dim, out, -0.5);
            }
            Pde::NavierStokes { .. } => {
                let (kx, ky, k2) = (
                    std::mem::take(&mut self.k[0]),
                    std::mem::take(&mut self.k[1]),
                    std::mem::take(&mut self.k2),
                );
                let inv_k2 = |e: usize| if k2[e] > 0.0 { 1.0 / k2[e] } else { 0.0 };
                // Streamfunction: Δψ = -ω, velocity u = (∂y ψ, -∂x ψ).
                self.to_physical(state, |e| I * ky[e] * inv_k2(e), 0);
                self.to_physical(state, |e| -I * kx[e] * inv_k2(e), 1);
                self.to_physical(state, |e| I * kx[e], 2);
                self.to_physical(state, |e| I * ky[e], 3);
                self.k[0] = kx;
                self.k[1] = ky;
                self.k2 = k2;
                let (src, dst) = self.phys.split_at_mut(4);
                for p in 0..npts {
                    dst[0][p] = src[0][p] * src[2][p] + src[1][p] * src[3][p];
                }
                self.project(4, out, -1.0);
                if let Some(f) = &self.forcing {
                    for (e, o) in out.iter_mut().enumerate() {
                        if self.mask[e] {
                            *o += f[e];
                        }
                    }
                }
            }
            Pde::GrayScott { feed, .. } => {
                self.to_physical(&state[..len], |_| Complex64::new(1.0, 0.0), 0);
                self.to_physical(&state[len..], |_| Complex64::new(1.0, 0.0), 1);
                let (src, dst) = self.phys.split_at_mut(2);
                for p in 0..npts {
                    let v = src[1][p];
                    dst[0][p] = src[0][p] * v * v;
                }
                let (out_u, out_v) = out.split_at_mut(len);
                self.project(2, out_v, 1.0);
                for (u, v) in out_u.iter_mut().zip(out_v.iter()) {
                    *u = -*v;
                }
                // Constant feed +F lives in the zero mode (unnormalized forward).
                out_u[0] += feed * npts as f64;
            }
        }
    }
}

/// Nonlinear term of `pde` at a physical state, returned as a physical field.
pub fn nonlinear_term(pde: &Pde, state: &Field) -> Result<Field> {
    if state.channels() != pde.channels() {
        return Err(Error::ShapeMismatch(format!(
            "{} expects {} channel(s), state has {}",
            pde.id(),
            pde.channels(),
            state.channels()
        )));
    }
    let grid = *state.grid();
    let mut op = NonlinearOperator::new(pde, grid)?;
    let spec = forward(state)?;
    let mut out = vec![Complex64::default(); spec.coeffs().len()];
    op.eval(spec.coeffs(), &mut out);
    let len = grid.spectral_len();
    let mut values = vec![0.0; grid.len() * state.channels()];
    for (c, dst) in values.chunks_exact_mut(grid.len()).enumerate() {
        op.plan.inverse(&out[c * len..(c + 1) * len], dst);
    }
    Field::new(grid, state.channels(), values)
}
