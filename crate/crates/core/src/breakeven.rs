//! Error-matched classical solvers and breakeven complexity
//! `N* = B / max(C_matched − C_inf, 0)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ladder::LadderEntry;

/// Breakeven complexity: a positive count or infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NStar {
    Finite(f64),
    Infinite,
}

impl NStar {
    pub fn is_finite(&self) -> bool {
        matches!(self, NStar::Finite(_))
    }

    pub fn value(&self) -> f64 {
        match self {
            NStar::Finite(v) => *v,
            NStar::Infinite => f64::INFINITY,
        }
    }

    /// Table rendering: rounded to the nearest integer, or `INF`.
    pub fn rounded(&self) -> String {
        match self {
            NStar::Finite(v) => format!("{}", v.round()),
            NStar::Infinite => "INF".into(),
        }
    }
}

impl fmt::Display for NStar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NStar::Finite(v) => write!(f, "{v}"),
            NStar::Infinite => f.write_str("INF"),
        }
    }
}

impl FromStr for NStar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") {
            return Ok(NStar::Infinite);
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => Ok(NStar::Finite(v)),
            _ => Err(Error::arg(format!("`{s}` is neither a positive number nor INF"))),
        }
    }
}

impl Serialize for NStar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NStar::Finite(v) => s.serialize_f64(*v),
            NStar::Infinite => s.serialize_str("INF"),
        }
    }
}

impl<'de> Deserialize<'de> for NStar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) if v.is_finite() && v > 0.0 => Ok(NStar::Finite(v)),
            Raw::Num(v) => Err(serde::de::Error::custom(format!("invalid breakeven value {v}"))),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::arg(format!("{name} = {v} must be finite and > 0")))
    }
}

pub fn breakeven_complexity(budget: f64, c_matched: f64, c_inf: f64) -> Result<NStar> {
    positive("budget", budget)?;
    positive("matched cost", c_matched)?;
    positive("inference cost", c_inf)?;
    if c_matched > c_inf {
        Ok(NStar::Finite(budget / (c_matched - c_inf)))
    } else {
        Ok(NStar::Infinite)
    }
}

/// Per-trajectory cost gap `C_matched − C_inf` implied by a reported `N*`.
pub fn implied_cost_gap(budget: f64, n_star: NStar) -> f64 {
    match n_star {
        NStar::Finite(n) => budget / n,
        NStar::Infinite => 0.0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossoverPoint {
    pub n: f64,
    /// `B + C_inf n`
    pub surrogate: f64,
    /// `C_matched n`
    pub classical: f64,
}

pub fn crossover_costs(budget: f64, c_inf: f64, c_matched: f64, n_grid: &[f64]) -> Vec<CrossoverPoint> {
    n_grid
        .iter()
        .map(|&n| CrossoverPoint {
            n,
            surrogate: budget + c_inf * n,
            classical: c_matched * n,
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorMode {
    Avg,
    Worst,
}

impl ErrorMode {
    fn ladder_error(&self, e: &LadderEntry) -> Option<f64> {
        match self {
            ErrorMode::Avg => e.eps_avg,
            ErrorMode::Worst => e.eps_worst,
        }
    }
}

impl fmt::Display for ErrorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorMode::Avg => "avg",
            ErrorMode::Worst => "worst",
        })
    }
}

/// Cheapest feasible entry whose error does not exceed `eps`.
///
/// Ties in cost go to the coarser resolution, then to the larger timestep.
/// Returns `Ok(None)` when no entry is accurate enough.
pub fn error_match(ladder: &[LadderEntry], eps: f64, mode: ErrorMode) -> Result<Option<&LadderEntry>> {
    let usable: Vec<(&LadderEntry, f64, f64)> = ladder
        .iter()
        .filter(|e| e.feasible)
        .filter_map(|e| Some((e, e.cost?, mode.ladder_error(e)?)))
        .collect();
    if usable.is_empty() {
        return Err(Error::EmptyLadder);
    }
    Ok(usable
        .into_iter()
        .filter(|(_, _, err)| *err <= eps)
        .min_by(|(a, ca, _), (b, cb, _)| {
            ca.total_cmp(cb)
                .then(a.config.resolution.cmp(&b.config.resolution))
                .then(b.config.dt.total_cmp(&a.config.dt))
        })
        .map(|(e, _, _)| e))
}

/// One learned-solver run as reported by its training pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurrogateRecord {
    pub model: String,
    pub benchmark: String,
    pub budget: f64,
    pub data_fraction: f64,
    pub eps_avg: f64,
    pub eps_worst: f64,
    pub c_inf: f64,
}

impl SurrogateRecord {
    pub fn validate(&self) -> Result<()> {
        if self.model.trim().is_empty() || self.benchmark.trim().is_empty() {
            return Err(Error::arg("model and benchmark must be non-empty"));
        }
        positive("budget", self.budget)?;
        positive("inference cost", self.c_inf)?;
        if !(0.0..=1.0).contains(&self.data_fraction) {
            return Err(Error::arg(format!("data fraction {} not in [0, 1]", self.data_fraction)));
        }
        for (name, v) in [("nrmse_avg", self.eps_avg), ("nrmse_worst", self.eps_worst)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::arg(format!("{name} = {v} must be finite and >= 0")));
            }
        }
        Ok(())
    }

    pub fn error(&self, mode: ErrorMode) -> f64 {
        match mode {
            ErrorMode::Avg => self.eps_avg,
            ErrorMode::Worst => self.eps_worst,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BreakevenResult {
    pub record: SurrogateRecord,
    /// `None` when no ladder entry is as accurate as the surrogate.
    pub matched_avg: Option<LadderEntry>,
    pub matched_worst: Option<LadderEntry>,
    pub n_star_avg: Option<NStar>,
    pub n_star_worst: Option<NStar>,
}

impl BreakevenResult {
    /// `N*_worst / N*_avg` when both are finite.
    pub fn robustness_ratio(&self) -> Option<f64> {
        match (self.n_star_worst?, self.n_star_avg?) {
            (NStar::Finite(w), NStar::Finite(a)) => Some(w / a),
            _ => None,
        }
    }
}

/// Average- and worst-case breakeven of one record against a measured ladder.
/// Each case compares like with like: surrogate average error against ladder
/// average errors, surrogate worst error against ladder worst errors.
pub fn compute_breakeven(record: &SurrogateRecord, ladder: &[LadderEntry]) -> Result<BreakevenResult> {
    record.validate()?;
    let solve = |mode| -> Result<(Option<LadderEntry>, Option<NStar>)> {
        match error_match(ladder, record.error(mode), mode)? {
            Some(e) => {
                let cost = e.cost.expect("matched entries carry a cost");
                Ok((Some(e.clone()), Some(breakeven_complexity(record.budget, cost, record.c_inf)?)))
            }
            None => Ok((None, None)),
        }
    };
    let (matched_avg, n_star_avg) = solve(ErrorMode::Avg)?;
    let (matched_worst, n_star_worst) = solve(ErrorMode::Worst)?;
    Ok(BreakevenResult {
        record: record.clone(),
        matched_avg,
        matched_worst,
        n_star_avg,
        n_star_worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::SolverConfig;

    fn cfg(n: usize, dt: f64) -> SolverConfig {
        SolverConfig {
            resolution: n,
            dt,
            t_end: 1.0,
            n_frames: 1,
            store_resolution: n,
            include_initial: false,
        }
    }

    fn ladder() -> Vec<LadderEntry> {
        vec![
            LadderEntry::measured(cfg(64, 0.1), 1.0, 0.01, 0.02),
            LadderEntry::measured(cfg(32, 0.1), 0.5, 0.05, 0.1),
            LadderEntry::measured(cfg(16, 0.1), 0.25, 0.2, 0.4),
        ]
    }

    #[test]
    fn match_examples() {
        let l = ladder();
        assert_eq!(error_match(&l, 0.05, ErrorMode::Avg).unwrap().unwrap().cost, Some(0.5));
        assert!(error_match(&l, 0.005, ErrorMode::Avg).unwrap().is_none());
        assert_eq!(error_match(&l, 1.0, ErrorMode::Avg).unwrap().unwrap().cost, Some(0.25));
        assert!(matches!(error_match(&[], 1.0, ErrorMode::Avg), Err(Error::EmptyLadder)));
        let dead = vec![LadderEntry::infeasible(cfg(8, 0.1))];
        assert!(matches!(error_match(&dead, 1.0, ErrorMode::Avg), Err(Error::EmptyLadder)));
    }

    #[test]
    fn ties_prefer_coarse_then_large_dt() {
        let l = vec![
            LadderEntry::measured(cfg(32, 0.1), 0.5, 0.01, 0.01),
            LadderEntry::measured(cfg(16, 0.05), 0.5, 0.01, 0.01),
            LadderEntry::measured(cfg(16, 0.1), 0.5, 0.01, 0.01),
        ];
        let m = error_match(&l, 0.1, ErrorMode::Avg).unwrap().unwrap();
        assert_eq!((m.config.resolution, m.config.dt), (16, 0.1));
    }

    #[test]
    fn breakeven_examples() {
        assert_eq!(breakeven_complexity(1000.0, 1.0, 0.5).unwrap(), NStar::Finite(2000.0));
        assert_eq!(breakeven_complexity(1000.0, 0.5, 0.5).unwrap(), NStar::Infinite);
        assert_eq!(breakeven_complexity(1000.0, 0.4, 0.5).unwrap(), NStar::Infinite);
        assert!(breakeven_complexity(0.0, 1.0, 0.5).is_err());
        assert!(breakeven_complexity(1.0, 1.0, -0.5).is_err());
    }

    #[test]
    fn crossover_examples() {
        let pts = crossover_costs(1000.0, 0.5, 1.0, &[0.0, 1000.0, 2000.0]);
        assert_eq!((pts[0].surrogate, pts[0].classical), (1000.0, 0.0));
        assert_eq!((pts[1].surrogate, pts[1].classical), (1500.0, 1000.0));
        assert_eq!(pts[2].surrogate, pts[2].classical);
    }

    #[test]
    fn nstar_text_and_json() {
        assert_eq!("INF".parse::<NStar>().unwrap(), NStar::Infinite);
        assert_eq!("32158".parse::<NStar>().unwrap(), NStar::Finite(32158.0));
        assert!("-3".parse::<NStar>().is_err());
        assert_eq!(serde_json::to_string(&NStar::Infinite).unwrap(), "\"INF\"");
        let back: NStar = serde_json::from_str("2000.5").unwrap();
        assert_eq!(back, NStar::Finite(2000.5));
        assert_eq!(NStar::Finite(32157.6).rounded(), "32158");
    }

    #[test]
    fn unmatched_and_robustness() {
        let rec = SurrogateRecord {
            model: "m".into(),
            benchmark: "GS".into(),
            budget: 1000.0,
            data_fraction: 0.1,
            eps_avg: 0.001,
            eps_worst: 0.5,
            c_inf: 0.1,
        };
        let r = compute_breakeven(&rec, &ladder()).unwrap();
        assert!(r.matched_avg.is_none() && r.n_star_avg.is_none());
        assert_eq!(r.n_star_worst, Some(NStar::Finite(1000.0 / 0.15)));
        assert_eq!(r.robustness_ratio(), None);
        let rec = SurrogateRecord { eps_avg: 0.05, ..rec };
        let r = compute_breakeven(&rec, &ladder()).unwrap();
        assert!((r.robustness_ratio().unwrap() - 0.4 / 0.15).abs() < 1e-12);
    }
}
