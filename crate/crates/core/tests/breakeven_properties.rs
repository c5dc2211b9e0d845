mod common;

use breakeven::breakeven::{
    breakeven_complexity, compute_breakeven, crossover_costs, error_match, ErrorMode, NStar, SurrogateRecord,
};
use breakeven::ladder::LadderEntry;
use breakeven::solver::SolverConfig;
use common::{brute_force_match, entry_key};
use proptest::prelude::*;

fn cfg(n: usize, dt: f64) -> SolverConfig {
    SolverConfig {
        resolution: n,
        dt,
        t_end: 1.0,
        n_frames: 1,
        store_resolution: n.min(16),
        include_initial: false,
    }
}

/// Random ladder with coarse cost and error values so that ties occur.
fn ladder_strategy() -> impl Strategy<Value = Vec<LadderEntry>> {
    prop::collection::vec(
        (
            prop::sample::select(vec![8usize, 16, 32, 64, 128]),
            prop::sample::select(vec![0.001f64, 0.002, 0.004]),
            1u32..8,
            1u32..10,
            0u32..5,
            any::<bool>(),
        ),
        0..12,
    )
    .prop_map(|items| {
        items
            .into_iter()
            .map(|(n, dt, cost, avg, extra, feasible)| {
                if feasible {
                    let avg = avg as f64 / 10.0;
                    LadderEntry::measured(cfg(n, dt), cost as f64 * 0.5, avg, avg + extra as f64 / 10.0)
                } else {
                    LadderEntry::infeasible(cfg(n, dt))
                }
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn error_match_equals_brute_force(
        ladder in ladder_strategy(),
        eps in 0u32..16,
        worst in any::<bool>(),
    ) {
        let mode = if worst { ErrorMode::Worst } else { ErrorMode::Avg };
        let eps = eps as f64 / 10.0;
        let any_usable = ladder.iter().any(|e| e.feasible);
        match error_match(&ladder, eps, mode) {
            Ok(got) => {
                prop_assert!(any_usable);
                let want = brute_force_match(&ladder, eps, mode);
                prop_assert_eq!(got.map(entry_key), want.as_ref().map(entry_key));
            }
            Err(_) => prop_assert!(!any_usable, "rejected a ladder with feasible entries"),
        }
    }

    #[test]
    fn n_star_strictly_increasing_in_budget(
        b in 1.0f64..1e6,
        factor in 1.0001f64..10.0,
        c_inf in 1e-4f64..1.0,
        gap in 1e-4f64..10.0,
    ) {
        let c_m = c_inf + gap;
        let lo = breakeven_complexity(b, c_m, c_inf).unwrap().value();
        let hi = breakeven_complexity(b * factor, c_m, c_inf).unwrap().value();
        prop_assert!(hi > lo);
    }

    #[test]
    fn n_star_strictly_decreasing_in_gap(
        b in 1.0f64..1e6,
        c_inf in 1e-4f64..1.0,
        gap in 1e-4f64..10.0,
        factor in 1.0001f64..10.0,
    ) {
        let small = breakeven_complexity(b, c_inf + gap, c_inf).unwrap().value();
        let large = breakeven_complexity(b, c_inf + gap * factor, c_inf).unwrap().value();
        prop_assert!(large < small);
    }

    #[test]
    fn crossover_curves_meet_once_at_n_star(
        b in 1.0f64..1e5,
        c_inf in 1e-3f64..1.0,
        gap in 1e-3f64..10.0,
    ) {
        let c_m = c_inf + gap;
        let NStar::Finite(n_star) = breakeven_complexity(b, c_m, c_inf).unwrap() else {
            panic!("positive gap gives a finite breakeven");
        };
        let grid: Vec<f64> = (-20..=20).map(|i| n_star * 10f64.powf(i as f64 / 10.0)).collect();
        let pts = crossover_costs(b, c_inf, c_m, &grid);
        let at = &pts[20];
        prop_assert!((at.surrogate - at.classical).abs() <= 1e-9 * at.classical);
        // Surrogate dearer before N*, classical dearer after: one crossing.
        for p in &pts[..20] {
            prop_assert!(p.surrogate > p.classical);
        }
        for p in &pts[21..] {
            prop_assert!(p.surrogate < p.classical);
        }
    }

    #[test]
    fn non_positive_gap_is_infinite(b in 1.0f64..1e6, c_m in 1e-3f64..1.0, extra in 0.0f64..1.0) {
        prop_assert_eq!(breakeven_complexity(b, c_m, c_m + extra).unwrap(), NStar::Infinite);
    }
}

fn record(eps_avg: f64, eps_worst: f64) -> SurrogateRecord {
    SurrogateRecord {
        model: "M".into(),
        benchmark: "NS".into(),
        budget: 1000.0,
        data_fraction: 0.1,
        eps_avg,
        eps_worst,
        c_inf: 0.01,
    }
}

#[test]
fn worst_case_compares_worst_errors_on_both_sides() {
    // A surrogate with a tight error distribution facing a solver family
    // whose worst case is much worse than its average.
    let ladder = vec![
        LadderEntry::measured(cfg(128, 0.001), 2.0, 0.01, 0.02),
        LadderEntry::measured(cfg(64, 0.001), 0.5, 0.02, 0.2),
        LadderEntry::measured(cfg(32, 0.001), 0.1, 0.05, 0.5),
    ];
    let r = compute_breakeven(&record(0.03, 0.04), &ladder).unwrap();
    assert_eq!(r.matched_avg.as_ref().unwrap().config.resolution, 64);
    assert_eq!(r.matched_worst.as_ref().unwrap().config.resolution, 128);
    // Matching the surrogate's worst error against ladder averages would pick
    // the 64 rung instead.
    assert_eq!(error_match(&ladder, 0.04, ErrorMode::Avg).unwrap().unwrap().config.resolution, 64);
    let (avg, worst) = (r.n_star_avg.unwrap().value(), r.n_star_worst.unwrap().value());
    assert!((avg - 1000.0 / 0.49).abs() < 1e-9 && (worst - 1000.0 / 1.99).abs() < 1e-9);
    assert!(worst < avg);
    assert!(r.robustness_ratio().unwrap() < 1.0);
}

#[test]
fn unmatched_when_surrogate_beats_every_rung() {
    let ladder = vec![LadderEntry::measured(cfg(64, 0.001), 1.0, 0.01, 0.02)];
    let r = compute_breakeven(&record(0.001, 0.002), &ladder).unwrap();
    assert!(r.matched_avg.is_none() && r.n_star_avg.is_none());
    assert!(r.robustness_ratio().is_none());
}
