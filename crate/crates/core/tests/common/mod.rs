//! Brute-force oracles shared by the property and acceptance tests.
#![allow(dead_code)]

use breakeven::breakeven::ErrorMode;
use breakeven::breakflow::Obstacle;
use breakeven::ladder::LadderEntry;
use breakeven::scaling::{max_trajectories, ScalingFit};

/// Exhaustive error match: minimum cost among usable entries within `eps`,
/// ties to coarser resolution then larger dt.
pub fn brute_force_match(ladder: &[LadderEntry], eps: f64, mode: ErrorMode) -> Option<LadderEntry> {
    let mut best: Option<&LadderEntry> = None;
    for e in ladder {
        let err = match mode {
            ErrorMode::Avg => e.eps_avg,
            ErrorMode::Worst => e.eps_worst,
        };
        let (Some(err), Some(cost), true) = (err, e.cost, e.feasible) else {
            continue;
        };
        if err > eps {
            continue;
        }
        let better = match best {
            None => true,
            Some(b) => {
                let bc = b.cost.unwrap();
                cost < bc
                    || (cost == bc && e.config.resolution < b.config.resolution)
                    || (cost == bc && e.config.resolution == b.config.resolution && e.config.dt > b.config.dt)
            }
        };
        if better {
            best = Some(e);
        }
    }
    best.cloned()
}

pub fn entry_key(e: &LadderEntry) -> (u64, usize, u64) {
    (e.cost.unwrap().to_bits(), e.config.resolution, e.config.dt.to_bits())
}

/// Exhaustive minimum over every admissible trajectory count.
pub fn exhaustive_allocation(fit: &ScalingFit, budget: f64, c_gen: f64) -> (u64, f64) {
    (1..=max_trajectories(budget, c_gen))
        .map(|n| (n, fit.predict(n as f64, budget - c_gen * n as f64).unwrap()))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap()
}

/// Budget identity `c_gen n + c_train == budget`, required exactly unless no
/// `f64` within 16 ulps of `budget - c_gen n` achieves it.
pub fn budget_identity_ok(budget: f64, c_gen: f64, n: u64, c_train: f64) -> bool {
    let spent = c_gen * n as f64;
    if spent + c_train == budget {
        return true;
    }
    let mut lo = budget - spent;
    let mut hi = lo;
    for _ in 0..16 {
        if spent + lo == budget || spent + hi == budget {
            return false;
        }
        lo = lo.next_down();
        hi = hi.next_up();
    }
    (spent + c_train - budget).abs() <= f64::EPSILON * budget
}

/// Every obstacle corner as exact bit patterns, optionally reflected in y.
/// Adding zero folds -0 into +0.
pub fn corner_bits(obstacles: &[Obstacle], reflect: bool) -> Vec<(u64, u64)> {
    let mut pts: Vec<(u64, u64)> = obstacles
        .iter()
        .flat_map(|o| o.polygon())
        .map(|[x, y]| (x.to_bits(), (if reflect { -y } else { y } + 0.0).to_bits()))
        .collect();
    pts.sort_unstable();
    pts
}

type P = [f64; 2];

fn seg_dist(p: P, a: P, b: P) -> f64 {
    let (abx, aby) = (b[0] - a[0], b[1] - a[1]);
    let t = (((p[0] - a[0]) * abx + (p[1] - a[1]) * aby) / (abx * abx + aby * aby)).clamp(0.0, 1.0);
    ((p[0] - a[0] - t * abx).powi(2) + (p[1] - a[1] - t * aby).powi(2)).sqrt()
}

fn projections(poly: &[P], axis: P) -> (f64, f64) {
    poly.iter()
        .map(|p| p[0] * axis[0] + p[1] * axis[1])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Distance between convex polygons: zero if no edge normal separates them,
/// otherwise the smallest vertex-to-edge distance.
pub fn polygon_distance(p: &[P], q: &[P]) -> f64 {
    let separated = [p, q].iter().any(|poly| {
        (0..poly.len()).any(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
            let axis = [a[1] - b[1], b[0] - a[0]];
            let (p0, p1) = projections(p, axis);
            let (q0, q1) = projections(q, axis);
            p1 < q0 || q1 < p0
        })
    });
    if !separated {
        return 0.0;
    }
    let mut d = f64::INFINITY;
    for (u, v) in [(p, q), (q, p)] {
        for &pt in u {
            for i in 0..v.len() {
                d = d.min(seg_dist(pt, v[i], v[(i + 1) % v.len()]));
            }
        }
    }
    d
}
