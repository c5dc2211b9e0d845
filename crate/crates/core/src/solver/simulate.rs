use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, PeriodicGrid, Trajectory};
use crate::solver::config::SolverConfig;
use crate::solver::etdrk::{etdrk_coefficients, EtdrkCoefficients};
use crate::solver::pde::{linear_symbol, Pde};
use crate::solver::rhs::NonlinearOperator;
use crate::spectral::{forward, inverse, resample, spectral_downsample, Spectrum};

/// ETDRK4 integrator holding a spectral state.
pub struct Stepper {
    grid: PeriodicGrid,
    channels: usize,
    coeffs: Vec<EtdrkCoefficients>,
    op: NonlinearOperator,
    state: Vec<Complex64>,
    steps: usize,
    nv: Vec<Complex64>,
    na: Vec<Complex64>,
    nb: Vec<Complex64>,
    nc: Vec<Complex64>,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    c: Vec<Complex64>,
}

impl Stepper {
    pub fn new(pde: &Pde, dt: f64, initial: &Field) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidConfig(format!("dt = {dt} must be > 0")));
        }
        let grid = *initial.grid();
        if initial.channels() != pde.channels() {
            return Err(Error::ShapeMismatch(format!(
                "{} expects {} channel(s), initial condition has {}",
                pde.id(),
                pde.channels(),
                initial.channels()
            )));
        }
        let symbols = linear_symbol(pde, &grid)?;
        let coeffs = symbols.iter().map(|s| etdrk_coefficients(s, dt)).collect();
        let op = NonlinearOperator::new(pde, grid)?;
        let state = forward(initial)?.coeffs().to_vec();
        let zeros = vec![Complex64::default(); state.len()];
        Ok(Self {
            grid,
            channels: pde.channels(),
            coeffs,
            op,
            steps: 0,
            nv: zeros.clone(),
            na: zeros.clone(),
            nb: zeros.clone(),
            nc: zeros.clone(),
            a: zeros.clone(),
            b: zeros.clone(),
            c: zeros,
            state,
        })
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.coeffs[0].dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.dt()
    }

    /// Advance one step. Fails with [`Error::BlowUp`] if the state stops
    /// being finite.
    pub fn step(&mut self) -> Result<()> {
        let len = self.grid.spectral_len();
        let chan = |i: usize| i / len;
        let at = |i: usize| i % len;

        self.op.eval(&self.state, &mut self.nv);
        for i in 0..self.state.len() {
            let k = &self.coeffs[chan(i)];
            let e = at(i);
            self.a[i] = k.exp_half[e] * self.state[i] + k.q[e] * self.nv[i];
        }
        self.op.eval(&self.a, &mut self.na);
        for i in 0..self.state.len() {
            let k = &self.coeffs[chan(i)];
            let e = at(i);
            self.b[i] = k.exp_half[e] * self.state[i] + k.q[e] * self.na[i];
        }
        self.op.eval(&self.b, &mut self.nb);
        for i in 0..self.state.len() {
            let k = &self.coeffs[chan(i)];
            let e = at(i);
            self.c[i] = k.exp_half[e] * self.a[i] + k.q[e] * (2.0 * self.nb[i] - self.nv[i]);
        }
        self.op.eval(&self.c, &mut self.nc);
        let mut finite = true;
        for i in 0..self.state.len() {
            let k = &self.coeffs[chan(i)];
            let e = at(i);
            let v = k.exp_full[e] * self.state[i]
                + k.f1[e] * self.nv[i]
                + 2.0 * k.f2[e] * (self.na[i] + self.nb[i])
                + k.f3[e] * self.nc[i];
            finite &= v.re.is_finite() && v.im.is_finite();
            self.state[i] = v;
        }
        self.steps += 1;
        if !finite {
            return Err(Error::BlowUp {
                step: self.steps,
                time: self.time(),
            });
        }
        Ok(())
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum::from_parts(self.grid, self.channels, self.state.clone())
    }

    /// Current state in physical space at resolution `n` (spectral truncation).
    pub fn state_at(&self, n: usize) -> Result<Field> {
        let spec = self.spectrum();
        if n == self.grid.n() {
            inverse(&spec)
        } else {
            if n > self.grid.n() {
                return Err(Error::arg(format!("store resolution {n} exceeds {}", self.grid.n())));
            }
            inverse(&resample(&spec, self.grid.with_resolution(n)?))
        }
    }

    pub fn state(&self) -> Result<Field> {
        self.state_at(self.grid.n())
    }
}

/// Integrate `pde` from `initial` over the schedule in `config`, returning the
/// stored frames at `config.store_resolution`.
pub fn simulate(pde: &Pde, config: &SolverConfig, initial: &Field) -> Result<Trajectory> {
    config.validate()?;
    if initial.grid().n() != config.resolution {
        return Err(Error::ShapeMismatch(format!(
            "initial condition resolution {} differs from configured {}",
            initial.grid().n(),
            config.resolution
        )));
    }
    let mut stepper = Stepper::new(pde, config.dt, initial)?;
    let spf = config.steps_per_frame();
    let mut frames = Vec::with_capacity(config.n_frames + 1);
    if config.include_initial {
        frames.push(spectral_downsample(initial, config.store_resolution)?);
    }
    for _ in 0..config.n_frames {
        for _ in 0..spf {
            stepper.step()?;
        }
        frames.push(stepper.state_at(config.store_resolution)?);
    }
    Trajectory::new(pde.id(), 0, frames, config.frame_times())
}
