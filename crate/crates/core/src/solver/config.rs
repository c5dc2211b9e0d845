use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::PeriodicGrid;
use crate::solver::pde::Pde;

/// One classical solver fidelity: resolution, timestep and frame schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub resolution: usize,
    pub dt: f64,
    pub t_end: f64,
    /// Stored frames, evenly spaced over `(0, t_end]`.
    pub n_frames: usize,
    /// Saved frames are spectrally truncated to this resolution.
    pub store_resolution: usize,
    /// Also store the initial condition as a frame at `t = 0`.
    #[serde(default)]
    pub include_initial: bool,
}

/// Relative slack when checking that `t_end / dt` is a whole number of steps.
const STEP_TOLERANCE: f64 = 1e-9;

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt = {} must be > 0", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end >= self.dt) {
            return bad(format!("horizon {} must be >= dt {}", self.t_end, self.dt));
        }
        if self.n_frames == 0 {
            return bad("at least one frame must be stored".into());
        }
        if self.store_resolution > self.resolution {
            return bad(format!(
                "store resolution {} exceeds resolution {}",
                self.store_resolution, self.resolution
            ));
        }
        let steps = self.t_end / self.dt;
        if (self.n_frames as f64) > steps * (1.0 + STEP_TOLERANCE) {
            return bad(format!("{} frames but only {steps} steps", self.n_frames));
        }
        let per_frame = steps / self.n_frames as f64;
        if (per_frame - per_frame.round()).abs() > STEP_TOLERANCE * per_frame {
            return bad(format!(
                "t_end/dt = {steps} is not a whole multiple of {} frames",
                self.n_frames
            ));
        }
        Ok(())
    }

    pub fn steps_per_frame(&self) -> usize {
        (self.t_end / self.dt / self.n_frames as f64).round() as usize
    }

    pub fn total_steps(&self) -> usize {
        self.steps_per_frame() * self.n_frames
    }

    /// Times of the stored frames.
    pub fn frame_times(&self) -> Vec<f64> {
        let mut times = Vec::with_capacity(self.n_frames + 1);
        if self.include_initial {
            times.push(0.0);
        }
        let spf = self.steps_per_frame();
        times.extend((1..=self.n_frames).map(|k| (k * spf) as f64 * self.dt));
        times
    }

    /// Shrink `dt` (never grow it) so that a whole number of steps fits
    /// between consecutive frames.
    pub fn round_dt_down(&mut self) {
        let per_frame = self.t_end / self.dt / self.n_frames as f64;
        let steps = if (per_frame - per_frame.round()).abs() <= STEP_TOLERANCE * per_frame {
            per_frame.round()
        } else {
            per_frame.ceil()
        }
        .max(1.0);
        self.dt = self.t_end / (steps * self.n_frames as f64);
    }
}

/// The periodic benchmark families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Benchmark {
    NavierStokes,
    KuramotoSivashinsky { dim: usize },
    GrayScott,
}

impl Benchmark {
    /// Short id used in file names and record files (`NS`, `KS`, `GS`, `KS1D`, `KS3D`).
    pub fn id(&self) -> String {
        match self {
            Benchmark::NavierStokes => "NS".into(),
            Benchmark::GrayScott => "GS".into(),
            Benchmark::KuramotoSivashinsky { dim: 2 } => "KS".into(),
            Benchmark::KuramotoSivashinsky { dim } => format!("KS{dim}D"),
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for Benchmark {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "ns" | "navierstokes" => Ok(Benchmark::NavierStokes),
            "gs" | "grayscott" => Ok(Benchmark::GrayScott),
            "ks" | "ks2d" | "kuramotosivashinsky" => Ok(Benchmark::KuramotoSivashinsky { dim: 2 }),
            "ks1d" => Ok(Benchmark::KuramotoSivashinsky { dim: 1 }),
            "ks3d" => Ok(Benchmark::KuramotoSivashinsky { dim: 3 }),
            other => Err(Error::arg(format!("unknown benchmark `{other}`"))),
        }
    }
}

/// Reference configuration of one benchmark.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalSpec {
    pub benchmark: Benchmark,
    pub pde: Pde,
    pub grid: PeriodicGrid,
    pub config: SolverConfig,
}

pub const NS_DEFAULT_VISCOSITY: f64 = 1e-3;
pub const GS_FEED: f64 = 0.029;
pub const GS_KILL: f64 = 0.057;
pub const GS_DU: f64 = 2.1e-5;
pub const GS_DV: f64 = 1.1e-5;

impl CanonicalSpec {
    pub fn new(benchmark: Benchmark) -> Self {
        let (pde, dim, length, dt, t_end, n_frames) = match benchmark {
            Benchmark::NavierStokes => (Pde::navier_stokes(NS_DEFAULT_VISCOSITY), 2, 2.0, 1e-3, 1.0, 10),
            Benchmark::KuramotoSivashinsky { dim } => {
                (Pde::kuramoto_sivashinsky(dim), dim, 50.0, 0.1, 10.0, 50)
            }
            Benchmark::GrayScott => (
                Pde::gray_scott(GS_FEED, GS_KILL, GS_DU, GS_DV),
                2,
                2.0,
                0.5,
                2000.0,
                200,
            ),
        };
        let grid = PeriodicGrid::new(dim, 256, length).expect("canonical grids are valid");
        Self {
            benchmark,
            pde,
            grid,
            config: SolverConfig {
                resolution: 256,
                dt,
                t_end,
                n_frames,
                store_resolution: 64,
                include_initial: false,
            },
        }
    }

    /// Same benchmark at a different base resolution; the storage resolution
    /// is clamped so it never exceeds the new resolution.
    pub fn with_resolution(mut self, n: usize) -> Result<Self> {
        self.grid = self.grid.with_resolution(n)?;
        self.config.resolution = n;
        self.config.store_resolution = self.config.store_resolution.min(n);
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_values() {
        let ns = CanonicalSpec::new(Benchmark::NavierStokes);
        assert_eq!((ns.config.resolution, ns.config.dt, ns.config.t_end), (256, 1e-3, 1.0));
        assert_eq!((ns.config.n_frames, ns.config.store_resolution, ns.grid.length()), (10, 64, 2.0));
        let ks = CanonicalSpec::new(Benchmark::KuramotoSivashinsky { dim: 2 });
        assert_eq!((ks.config.dt, ks.config.t_end, ks.config.n_frames, ks.grid.length()), (0.1, 10.0, 50, 50.0));
        let gs = CanonicalSpec::new(Benchmark::GrayScott);
        assert_eq!((gs.config.dt, gs.config.t_end, gs.config.n_frames), (0.5, 2000.0, 200));
        assert_eq!(gs.pde, Pde::gray_scott(0.029, 0.057, 2.1e-5, 1.1e-5));
        for spec in [ns, ks, gs] {
            spec.config.validate().unwrap();
        }
    }

    #[test]
    fn step_counts() {
        let gs = CanonicalSpec::new(Benchmark::GrayScott);
        assert_eq!(gs.config.steps_per_frame(), 20);
        assert_eq!(gs.config.total_steps(), 4000);
        let times = gs.config.frame_times();
        assert_eq!(times.len(), 200);
        assert_eq!(*times.last().unwrap(), 2000.0);
    }

    #[test]
    fn rejects_bad_configs() {
        let base = CanonicalSpec::new(Benchmark::NavierStokes).config;
        let mut c = base.clone();
        c.dt = 0.0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.n_frames = 0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.store_resolution = 512;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.dt = 3e-3;
        assert!(c.validate().is_err());
        c.round_dt_down();
        assert!(c.dt <= 3e-3);
        c.validate().unwrap();
        assert_eq!(c.total_steps(), 340);
    }

    #[test]
    fn benchmark_parsing() {
        assert_eq!("gs".parse::<Benchmark>().unwrap(), Benchmark::GrayScott);
        assert_eq!("Navier-Stokes".parse::<Benchmark>().unwrap(), Benchmark::NavierStokes);
        assert_eq!("KS3D".parse::<Benchmark>().unwrap(), Benchmark::KuramotoSivashinsky { dim: 3 });
        assert!("heat".parse::<Benchmark>().is_err());
        for b in [Benchmark::NavierStokes, Benchmark::GrayScott, Benchmark::KuramotoSivashinsky { dim: 1 }] {
            assert_eq!(b.id().parse::<Benchmark>().unwrap(), b);
        }
    }
}
