//! Serial wallclock measurement of solver runs.
//!
//! Timing must not overlap with other work from this toolkit. Within a process
//! a global mutex serializes measurements; across processes a lock file in
//! the temp directory records the owning pid and a second toolkit process that
//! finds a live owner refuses to time.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::PathBuf;
use std::sync::{Mutex, MutexGuard};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::PeriodicGrid;
use crate::solver::{sample_initial_condition, simulate, Pde, SolverConfig};
use crate::spectral::spectral_downsample;

static IN_PROCESS: Mutex<()> = Mutex::new(());

/// Seeds used for timing runs start here so they never coincide with test seeds.
pub const TIMING_SEED_BASE: u64 = 1 << 40;

pub fn lock_path() -> PathBuf {
    std::env::temp_dir().join("bkev-timing.lock")
}

fn pid_alive(pid: u32) -> bool {
    if cfg!(target_os = "linux") {
        PathBuf::from(format!("/proc/{pid}")).exists()
    } else {
        // Without a portable liveness probe assume the owner is alive.
        true
    }
}

/// Fails with [`Error::TimingBusy`] if another live process holds the timing
/// lock. Does not take the lock.
pub fn check_timing_environment() -> Result<()> {
    let owner = fs::read_to_string(lock_path()).ok().and_then(|s| s.trim().parse::<u32>().ok());
    match owner {
        Some(pid) if pid != std::process::id() && pid_alive(pid) => Err(Error::TimingBusy(format!(
            "process {pid} holds {}",
            lock_path().display()
        ))),
        _ => Ok(()),
    }
}

/// Exclusive timing section. Dropping it releases both locks.
pub struct TimingLock {
    _guard: MutexGuard<'static, ()>,
    path: PathBuf,
    owned: bool,
}

impl TimingLock {
    pub fn acquire() -> Result<Self> {
        let guard = IN_PROCESS.lock().unwrap_or_else(|e| e.into_inner());
        let path = lock_path();
        let me = std::process::id();
        loop {
            match OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(mut f) => {
                    write!(f, "{me}")?;
                    return Ok(Self {
                        _guard: guard,
                        path,
                        owned: true,
                    });
                }
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                    let owner = fs::read_to_string(&path).ok().and_then(|s| s.trim().parse::<u32>().ok());
                    match owner {
                        Some(pid) if pid == me => {
                            return Ok(Self {
                                _guard: guard,
                                path,
                                owned: false,
                            })
                        }
                        Some(pid) if pid_alive(pid) => {
                            return Err(Error::TimingBusy(format!(
                                "process {pid} holds {}",
                                path.display()
                            )))
                        }
                        // Stale or unreadable lock: remove and retry.
                        _ => {
                            let _ = fs::remove_file(&path);
                        }
                    }
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
}

impl Drop for TimingLock {
    fn drop(&mut self) {
        if self.owned {
            let _ = fs::remove_file(&self.path);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostMeasurement {
    /// Mean wallclock seconds per trajectory.
    pub mean: f64,
    pub samples: Vec<f64>,
}

impl CostMeasurement {
    /// Sample standard deviation relative to the mean.
    pub fn relative_spread(&self) -> f64 {
        if self.samples.len() < 2 {
            return 0.0;
        }
        let m = self.mean;
        let var = self.samples.iter().map(|s| (s - m) * (s - m)).sum::<f64>() / (self.samples.len() - 1) as f64;
        var.sqrt() / m
    }
}

/// Wallclock seconds per trajectory of `config` on a grid of edge `length`.
///
/// Runs `n_warmup` untimed trajectories, then times `n_timed` trajectories with
/// fresh seeded initial conditions. Initial conditions are sampled on
/// `ic_grid` (typically the reference grid) and downsampled before the clock
/// starts.
pub fn measure_cost(
    pde: &Pde,
    config: &SolverConfig,
    ic_grid: &PeriodicGrid,
    n_warmup: usize,
    n_timed: usize,
) -> Result<CostMeasurement> {
    if n_warmup == 0 || n_timed == 0 {
        return Err(Error::arg("measure_cost needs at least one warmup and one timed run"));
    }
    config.validate()?;
    if ic_grid.n() < config.resolution {
        return Err(Error::arg("initial-condition grid is coarser than the configuration"));
    }
    let ics = (0..n_warmup + n_timed)
        .map(|i| {
            let fine = sample_initial_condition(pde, ic_grid, TIMING_SEED_BASE + i as u64)?;
            spectral_downsample(&fine, config.resolution)
        })
        .collect::<Result<Vec<_>>>()?;
    let _lock = TimingLock::acquire()?;
    for ic in &ics[..n_warmup] {
        simulate(pde, config, ic)?;
    }
    let mut samples = Vec::with_capacity(n_timed);
    for ic in &ics[n_warmup..] {
        let start = Instant::now();
        let traj = simulate(pde, config, ic)?;
        samples.push(start.elapsed().as_secs_f64());
        std::hint::black_box(traj);
    }
    let mean = samples.iter().sum::<f64>() / n_timed as f64;
    Ok(CostMeasurement { mean, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ks_config(n: usize) -> SolverConfig {
        SolverConfig {
            resolution: n,
            dt: 0.05,
            t_end: 2.0,
            n_frames: 4,
            store_resolution: n.min(32),
            include_initial: false,
        }
    }

    #[test]
    fn zero_runs_rejected() {
        let pde = Pde::kuramoto_sivashinsky(1);
        let grid = PeriodicGrid::new(1, 64, 50.0).unwrap();
        assert!(measure_cost(&pde, &ks_config(64), &grid, 1, 0).is_err());
        assert!(measure_cost(&pde, &ks_config(64), &grid, 0, 1).is_err());
    }

    #[test]
    fn finer_grid_costs_more() {
        let pde = Pde::kuramoto_sivashinsky(2);
        let grid = PeriodicGrid::new(2, 128, 50.0).unwrap();
        let fine = measure_cost(&pde, &ks_config(128), &grid, 1, 2).unwrap();
        let coarse = measure_cost(&pde, &ks_config(32), &grid, 1, 2).unwrap();
        assert!(fine.mean > 2.0 * coarse.mean, "{} vs {}", fine.mean, coarse.mean);
        assert_eq!(fine.samples.len(), 2);
    }

    #[test]
    fn lock_is_reentrant_across_sequential_sections() {
        drop(TimingLock::acquire().unwrap());
        drop(TimingLock::acquire().unwrap());
    }
}
