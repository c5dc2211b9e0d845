//! Fidelity ladders: families of coarsened solver configurations with
//! measured cost and error against a high-fidelity reference.

pub mod timing;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, PeriodicGrid, Trajectory};
use crate::metrics::{aggregate_errors, nrmse};
use crate::parallel;
use crate::solver::{sample_initial_condition, simulate, Pde, SolverConfig};
use crate::spectral::{spectral_downsample, spectral_resample};

pub use timing::{check_timing_environment, measure_cost, CostMeasurement, TimingLock};

/// Smallest resolution a ladder may reach.
pub const MIN_LADDER_RESOLUTION: usize = 8;

/// Default number of test seeds defining a ladder's errors.
pub const DEFAULT_TEST_SEEDS: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffusionCap {
    /// Diffusion coefficient `D`.
    pub coefficient: f64,
    /// Safety factor `c` in `dt <= c dx² / D`.
    pub safety: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum TimestepRule {
    /// Keep the base timestep and coarsen only the grid.
    FixedDt,
    /// Scale the timestep with the grid spacing so the Courant number stays
    /// fixed, never exceeding `target_cfl`.
    CflScaled {
        u_max: f64,
        target_cfl: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        diffusion_cap: Option<DiffusionCap>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderPolicy {
    pub factors: Vec<f64>,
    pub timestep_rule: TimestepRule,
}

impl LadderPolicy {
    pub fn fixed_dt(factors: Vec<f64>) -> Self {
        Self {
            factors,
            timestep_rule: TimestepRule::FixedDt,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.factors.first() != Some(&1.0) {
            return Err(Error::arg("coarsening factors must start at 1"));
        }
        if self.factors.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::arg("coarsening factors must be strictly increasing"));
        }
        if let TimestepRule::CflScaled {
            u_max,
            target_cfl,
            diffusion_cap,
        } = &self.timestep_rule
        {
            if !(target_cfl.is_finite() && *target_cfl > 0.0) {
                return Err(Error::arg(format!("target CFL {target_cfl} must be > 0")));
            }
            if !(u_max.is_finite() && *u_max > 0.0) {
                return Err(Error::arg(format!("u_max {u_max} must be > 0")));
            }
            if let Some(cap) = diffusion_cap {
                if !(cap.coefficient > 0.0 && cap.safety > 0.0) {
                    return Err(Error::arg("diffusion cap needs D > 0 and c > 0"));
                }
            }
        }
        Ok(())
    }
}

/// Coarsened configurations, finest first.
pub fn build_ladder(base_grid: &PeriodicGrid, base: &SolverConfig, policy: &LadderPolicy) -> Result<Vec<SolverConfig>> {
    policy.validate()?;
    base.validate()?;
    if base_grid.n() != base.resolution {
        return Err(Error::ShapeMismatch(format!(
            "grid resolution {} differs from configured {}",
            base_grid.n(),
            base.resolution
        )));
    }
    let n = base.resolution as f64;
    policy
        .factors
        .iter()
        .map(|&r| {
            let ni = n / r;
            if ni.fract() != 0.0 || (ni as usize) % 2 != 0 {
                return Err(Error::arg(format!(
                    "resolution {} is not divisible by factor {r} into an even grid",
                    base.resolution
                )));
            }
            let ni = ni as usize;
            if ni < MIN_LADDER_RESOLUTION {
                return Err(Error::arg(format!(
                    "factor {r} gives resolution {ni} below {MIN_LADDER_RESOLUTION}"
                )));
            }
            let dx = base_grid.length() / ni as f64;
            let dt = match &policy.timestep_rule {
                TimestepRule::FixedDt => base.dt,
                TimestepRule::CflScaled {
                    u_max,
                    target_cfl,
                    diffusion_cap,
                } => {
                    let mut dt = (base.dt * r).min(target_cfl * dx / u_max);
                    if let Some(cap) = diffusion_cap {
                        dt = dt.min(cap.safety * dx * dx / cap.coefficient);
                    }
                    dt
                }
            };
            let mut cfg = SolverConfig {
                resolution: ni,
                dt,
                store_resolution: base.store_resolution.min(ni),
                ..base.clone()
            };
            cfg.round_dt_down();
            cfg.validate()?;
            Ok(cfg)
        })
        .collect()
}

/// Reference trajectories for a set of seeds at the finest configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceSet {
    pub pde: Pde,
    pub grid: PeriodicGrid,
    pub config: SolverConfig,
    pub trajectories: Vec<Trajectory>,
}

impl ReferenceSet {
    pub fn get(&self, seed: u64) -> Result<&Trajectory> {
        self.trajectories
            .iter()
            .find(|t| t.seed == seed)
            .ok_or(Error::MissingReference(seed))
    }

    /// Largest absolute stored value, the default velocity scale for CFL
    /// ladders.
    pub fn characteristic_velocity(&self) -> f64 {
        self.trajectories
            .iter()
            .flat_map(|t| t.frames())
            .map(Field::max_abs)
            .fold(0.0, f64::max)
    }
}

/// Simulate one seed: the initial condition is drawn on `ic_grid` and
/// spectrally downsampled to the configuration's resolution.
pub fn simulate_seed(pde: &Pde, ic_grid: &PeriodicGrid, config: &SolverConfig, seed: u64) -> Result<Trajectory> {
    let fine = sample_initial_condition(pde, ic_grid, seed)?;
    let ic = spectral_downsample(&fine, config.resolution)?;
    let mut traj = simulate(pde, config, &ic)?;
    traj.seed = seed;
    Ok(traj)
}

pub fn generate_references(pde: &Pde, grid: &PeriodicGrid, config: &SolverConfig, seeds: &[u64]) -> Result<ReferenceSet> {
    if grid.n() != config.resolution {
        return Err(Error::ShapeMismatch("reference grid and configuration differ".into()));
    }
    let trajectories = parallel::map(seeds, |&s| simulate_seed(pde, grid, config, s))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(ReferenceSet {
        pde: pde.clone(),
        grid: *grid,
        config: config.clone(),
        trajectories,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderEntry {
    pub config: SolverConfig,
    /// Seconds per trajectory; `None` when the configuration is infeasible.
    pub cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cost_samples: Vec<f64>,
    pub eps_avg: Option<f64>,
    pub eps_worst: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_seed: Vec<f64>,
    pub feasible: bool,
}

impl LadderEntry {
    /// A feasible entry with known cost and errors.
    pub fn measured(config: SolverConfig, cost: f64, eps_avg: f64, eps_worst: f64) -> Self {
        Self {
            config,
            cost: Some(cost),
            cost_samples: Vec::new(),
            eps_avg: Some(eps_avg),
            eps_worst: Some(eps_worst),
            per_seed: Vec::new(),
            feasible: true,
        }
    }

    pub fn infeasible(config: SolverConfig) -> Self {
        Self {
            config,
            cost: None,
            cost_samples: Vec::new(),
            eps_avg: None,
            eps_worst: None,
            per_seed: Vec::new(),
            feasible: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationOptions {
    pub n_warmup: usize,
    pub n_timed: usize,
}

impl Default for EvaluationOptions {
    fn default() -> Self {
        Self { n_warmup: 1, n_timed: 3 }
    }
}

/// Bring a trajectory to `n` by spectral resampling of every frame.
pub fn resample_trajectory(traj: &Trajectory, n: usize) -> Result<Trajectory> {
    if traj.grid().n() == n {
        return Ok(traj.clone());
    }
    let frames = traj
        .frames()
        .iter()
        .map(|f| spectral_resample(f, n))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(traj.pde_id.clone(), traj.seed, frames, traj.times().to_vec())
}

/// Errors of one configuration against the references, or `None` on blow-up.
fn seed_errors(references: &ReferenceSet, config: &SolverConfig, seeds: &[u64]) -> Result<Option<Vec<f64>>> {
    let store = references.config.store_resolution;
    let results = parallel::map(seeds, |&seed| -> Result<f64> {
        let reference = references.get(seed)?;
        if config == &references.config {
            // Same configuration and initial condition: identical run.
            return Ok(0.0);
        }
        let traj = simulate_seed(&references.pde, &references.grid, config, seed)?;
        nrmse(&resample_trajectory(&traj, store)?, reference)
    });
    let mut errors = Vec::with_capacity(seeds.len());
    for r in results {
        match r {
            Ok(e) => errors.push(e),
            Err(Error::BlowUp { .. }) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
    Ok(Some(errors))
}

/// Measure every configuration: errors over `seeds` (in parallel), then costs
/// (serially, under the timing lock).
pub fn evaluate_ladder(
    references: &ReferenceSet,
    ladder: &[SolverConfig],
    seeds: &[u64],
    opts: &EvaluationOptions,
) -> Result<Vec<LadderEntry>> {
    if seeds.is_empty() {
        return Err(Error::arg("no test seeds"));
    }
    for &s in seeds {
        references.get(s)?;
    }
    let mut entries = Vec::with_capacity(ladder.len());
    for config in ladder {
        entries.push(match seed_errors(references, config, seeds)? {
            Some(errors) => {
                let stats = aggregate_errors(&errors)?;
                LadderEntry {
                    config: config.clone(),
                    cost: None,
                    cost_samples: Vec::new(),
                    eps_avg: Some(stats.avg),
                    eps_worst: Some(stats.worst),
                    per_seed: errors,
                    feasible: true,
                }
            }
            None => LadderEntry::infeasible(config.clone()),
        });
    }
    for entry in entries.iter_mut().filter(|e| e.feasible) {
        match measure_cost(&references.pde, &entry.config, &references.grid, opts.n_warmup, opts.n_timed) {
            Ok(m) => {
                entry.cost = Some(m.mean);
                entry.cost_samples = m.samples;
            }
            Err(Error::BlowUp { .. }) => *entry = LadderEntry::infeasible(entry.config.clone()),
            Err(e) => return Err(e),
        }
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(n: usize, dt: f64) -> SolverConfig {
        SolverConfig {
            resolution: n,
            dt,
            t_end: 1.0,
            n_frames: 10,
            store_resolution: 64.min(n),
            include_initial: false,
        }
    }

    #[test]
    fn fixed_dt_ladder() {
        let grid = PeriodicGrid::new(2, 256, 50.0).unwrap();
        let mut cfg = base(256, 0.1);
        cfg.t_end = 10.0;
        let ladder = build_ladder(&grid, &cfg, &LadderPolicy::fixed_dt(vec![1.0, 2.0, 4.0])).unwrap();
        let got: Vec<_> = ladder.iter().map(|c| (c.resolution, c.dt)).collect();
        assert_eq!(got, vec![(256, 0.1), (128, 0.1), (64, 0.1)]);
        assert_eq!(ladder[2].store_resolution, 64);
    }

    #[test]
    fn cfl_scaled_doubles_dt() {
        let grid = PeriodicGrid::new(2, 256, 2.0).unwrap();
        let policy = LadderPolicy {
            factors: vec![1.0, 2.0],
            timestep_rule: TimestepRule::CflScaled {
                u_max: 1.0,
                target_cfl: 10.0,
                diffusion_cap: None,
            },
        };
        let ladder = build_ladder(&grid, &base(256, 1e-3), &policy).unwrap();
        assert_eq!(ladder[1].resolution, 128);
        assert!((ladder[1].dt - 2e-3).abs() < 1e-15);
        // Courant number u dt / dx stays fixed.
        let cfl: Vec<f64> = ladder.iter().map(|c| c.dt * c.resolution as f64 / 2.0).collect();
        assert!((cfl[0] - cfl[1]).abs() < 1e-12);
    }

    #[test]
    fn diffusion_cap_bounds_dt() {
        let grid = PeriodicGrid::new(2, 64, 2.0).unwrap();
        let policy = LadderPolicy {
            factors: vec![1.0, 2.0, 4.0],
            timestep_rule: TimestepRule::CflScaled {
                u_max: 1.0,
                target_cfl: 100.0,
                diffusion_cap: Some(DiffusionCap {
                    coefficient: 1.0,
                    safety: 0.25,
                }),
            },
        };
        let ladder = build_ladder(&grid, &base(64, 0.01), &policy).unwrap();
        let last = &ladder[2];
        assert_eq!(last.resolution, 16);
        assert!(last.dt <= 3.90625e-3);
        last.validate().unwrap();
    }

    #[test]
    fn indivisible_or_tiny_rejected() {
        let grid = PeriodicGrid::new(1, 96, 2.0).unwrap();
        let cfg = base(96, 0.01);
        assert!(build_ladder(&grid, &cfg, &LadderPolicy::fixed_dt(vec![1.0, 5.0])).is_err());
        assert!(build_ladder(&grid, &cfg, &LadderPolicy::fixed_dt(vec![1.0, 16.0])).is_err());
        assert!(build_ladder(&grid, &cfg, &LadderPolicy::fixed_dt(vec![2.0])).is_err());
        assert!(build_ladder(&grid, &cfg, &LadderPolicy::fixed_dt(vec![1.0, 1.0])).is_err());
        // 96 / 1.5 = 64 is a valid rung.
        assert_eq!(
            build_ladder(&grid, &cfg, &LadderPolicy::fixed_dt(vec![1.0, 1.5])).unwrap()[1].resolution,
            64
        );
    }

    #[test]
    fn small_ks_ladder_evaluation() {
        let pde = Pde::kuramoto_sivashinsky(1);
        let grid = PeriodicGrid::new(1, 128, 50.0).unwrap();
        let cfg = SolverConfig {
            resolution: 128,
            dt: 0.05,
            t_end: 5.0,
            n_frames: 5,
            store_resolution: 64,
            include_initial: false,
        };
        let seeds = [0, 1, 2];
        let refs = generate_references(&pde, &grid, &cfg, &seeds).unwrap();
        let ladder = build_ladder(&grid, &cfg, &LadderPolicy::fixed_dt(vec![1.0, 4.0, 8.0])).unwrap();
        let opts = EvaluationOptions { n_warmup: 1, n_timed: 1 };
        let entries = evaluate_ladder(&refs, &ladder, &seeds, &opts).unwrap();
        assert_eq!(entries[0].eps_avg, Some(0.0));
        assert_eq!(entries[0].eps_worst, Some(0.0));
        assert!(entries.iter().all(|e| e.feasible && e.cost.unwrap() > 0.0));
        assert!(entries[1].eps_avg.unwrap() <= entries[2].eps_avg.unwrap());
        assert!(matches!(
            evaluate_ladder(&refs, &ladder, &[99], &opts),
            Err(Error::MissingReference(99))
        ));
    }

    #[test]
    fn coarse_ic_is_downsampled_fine_ic() {
        let pde = Pde::navier_stokes(1e-3);
        let grid = PeriodicGrid::new(2, 64, 2.0).unwrap();
        let fine = sample_initial_condition(&pde, &grid, 5).unwrap();
        let coarse = spectral_downsample(&fine, 16).unwrap();
        let back = spectral_downsample(&spectral_resample(&coarse, 64).unwrap(), 16).unwrap();
        for (a, b) in coarse.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
