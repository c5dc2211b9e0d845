//! Normalized RMSE and error aggregates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Trajectory;

/// `‖pred − ref‖₂ / ‖ref‖₂` over all frames, channels and grid points jointly.
pub fn nrmse(pred: &Trajectory, reference: &Trajectory) -> Result<f64> {
    if pred.grid() != reference.grid()
        || pred.channels() != reference.channels()
        || pred.len() != reference.len()
    {
        return Err(Error::ShapeMismatch(format!(
            "prediction has {} frame(s) at n={} with {} channel(s), reference {} at n={} with {}",
            pred.len(),
            pred.grid().n(),
            pred.channels(),
            reference.len(),
            reference.grid().n(),
            reference.channels(),
        )));
    }
    let mut diff = 0.0;
    let mut norm = 0.0;
    for (p, r) in pred.frames().iter().zip(reference.frames()) {
        for (a, b) in p.values().iter().zip(r.values()) {
            diff += (a - b) * (a - b);
            norm += b * b;
        }
    }
    ratio(diff, norm)
}

/// Joint nRMSE of two flat value arrays.
pub fn nrmse_values(pred: &[f64], reference: &[f64]) -> Result<f64> {
    if pred.len() != reference.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} values vs {} reference values",
            pred.len(),
            reference.len()
        )));
    }
    let diff = pred.iter().zip(reference).map(|(a, b)| (a - b) * (a - b)).sum();
    let norm = reference.iter().map(|b| b * b).sum();
    ratio(diff, norm)
}

fn ratio(diff: f64, norm: f64) -> Result<f64> {
    if norm == 0.0 {
        return Err(Error::arg("reference has zero norm"));
    }
    Ok((diff / norm).sqrt())
}

/// nRMSE of every frame separately; a diagnostic only.
pub fn per_frame_nrmse(pred: &Trajectory, reference: &Trajectory) -> Result<Vec<f64>> {
    if pred.len() != reference.len() || pred.grid() != reference.grid() || pred.channels() != reference.channels() {
        return Err(Error::ShapeMismatch("trajectories differ in shape".into()));
    }
    pred.frames()
        .iter()
        .zip(reference.frames())
        .map(|(p, r)| nrmse_values(p.values(), r.values()))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub per_seed: Vec<f64>,
    pub avg: f64,
    pub worst: f64,
    pub quantiles: Quantiles,
}

/// Quantile of sorted data by linear interpolation between order statistics
/// at position `q (len − 1)`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

pub fn aggregate_errors(per_seed: &[f64]) -> Result<ErrorStats> {
    if per_seed.is_empty() {
        return Err(Error::arg("no errors to aggregate"));
    }
    if let Some(bad) = per_seed.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::arg(format!("error value {bad} is not a finite non-negative number")));
    }
    let mut sorted = per_seed.to_vec();
    sorted.sort_by(f64::total_cmp);
    let worst = sorted[sorted.len() - 1];
    // Summation rounding must not lift the mean above the max.
    let avg = (per_seed.iter().sum::<f64>() / per_seed.len() as f64).min(worst);
    Ok(ErrorStats {
        per_seed: per_seed.to_vec(),
        avg,
        worst,
        quantiles: Quantiles {
            p50: quantile_sorted(&sorted, 0.5),
            p90: quantile_sorted(&sorted, 0.9),
            p99: quantile_sorted(&sorted, 0.99),
        },
    })
}
