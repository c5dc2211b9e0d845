mod common;

use breakeven::breakflow::layout::{sample_cell, sort_obstacles, MAX_AREA, MAX_AREA_ON_AXIS, MIN_AREA, X_CELLS, Y_CELLS};
use breakeven::breakflow::{
    emit_geometry, emit_sim_config, generate_layout, obstacle_distance, validate_layout, Obstacle, SimConfigSpec,
};
use common::corner_bits;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn layouts_are_separated_and_valid(seed in any::<u64>()) {
        let layout = generate_layout(seed);
        prop_assert!(validate_layout(&layout).is_empty(), "{:?}", validate_layout(&layout));
        let obs = &layout.obstacles;
        for i in 0..obs.len() {
            for j in i + 1..obs.len() {
                prop_assert!(obstacle_distance(&obs[i], &obs[j]) >= 2.0 - 1e-9);
            }
        }
    }

    #[test]
    fn reflection_preserves_the_obstacle_multiset(seed in any::<u64>()) {
        let layout = generate_layout(seed);
        prop_assert_eq!(corner_bits(&layout.obstacles, true), corner_bits(&layout.obstacles, false));
        let mut images: Vec<Obstacle> = layout.obstacles.iter().map(Obstacle::mirror).collect();
        sort_obstacles(&mut images);
        for (a, b) in images.iter().zip(&layout.obstacles) {
            prop_assert_eq!((a.cx, a.cy, a.area()), (b.cx, b.cy, b.area()));
        }
    }

    #[test]
    fn sampled_shapes_factor_their_area(seed in any::<u64>(), x in X_CELLS, y in Y_CELLS) {
        if let Some(o) = sample_cell(seed, x, y) {
            let max = if y == 0 { MAX_AREA_ON_AXIS } else { MAX_AREA };
            prop_assert!(o.w >= 2 && o.h >= 2);
            prop_assert!((MIN_AREA..=max).contains(&(o.w * o.h)));
            if y == 0 {
                prop_assert!(o.rot == 0 || (o.rot == 45 && o.w == o.h));
            } else {
                prop_assert!(o.rot % 15 == 0 && o.rot < 180);
            }
        }
    }

    #[test]
    fn emitters_are_deterministic(seed in any::<u64>(), scale in 1.0f64..4.0, bin in 1u8..=3) {
        let layout = generate_layout(seed);
        prop_assert_eq!(emit_geometry(&layout, scale).unwrap(), emit_geometry(&generate_layout(seed), scale).unwrap());
        let spec = SimConfigSpec::new(bin, scale);
        prop_assert_eq!(emit_sim_config(&spec, seed).unwrap(), emit_sim_config(&spec, seed).unwrap());
    }
}

#[test]
fn layout_json_is_canonical() {
    let layout = generate_layout(21);
    let json = serde_json::to_string(&layout).unwrap();
    let back: breakeven::breakflow::DomainLayout = serde_json::from_str(&json).unwrap();
    assert_eq!(back, layout);
    let mut sorted = layout.obstacles.clone();
    sort_obstacles(&mut sorted);
    assert_eq!(sorted, layout.obstacles);
    for key in ["\"seed\"", "\"domain\"", "\"obstacles\"", "\"refinement_zone\"", "\"cx\"", "\"rot\""] {
        assert!(json.contains(key), "{key}");
    }
}

#[test]
fn mesh_sizes_scale_with_fidelity() {
    let layout = generate_layout(4);
    let one = emit_geometry(&layout, 1.0).unwrap();
    assert!(one.contains(&format!("size_near = {};", 1.0 / 3.0)));
    assert!(one.contains(&format!("size_zone = {};", 2.0 / 3.0)));
    assert!(one.contains("size_far = 1;"));
    let two = emit_geometry(&layout, 2.0).unwrap();
    assert!(two.contains(&format!("size_near = {};", 2.0 / 3.0)));
    assert!(two.contains(&format!("size_zone = {};", 4.0 / 3.0)));
    assert!(two.contains("size_far = 2;"));
}

#[test]
fn empty_layout_has_no_holes() {
    let mut layout = generate_layout(0);
    layout.obstacles.clear();
    let script = emit_geometry(&layout, 1.0).unwrap();
    assert!(script.contains("Plane Surface(1) = {1};"));
    assert!(!script.contains("obstacles"));
}

#[test]
fn sim_config_draws_re_from_the_bin() {
    for seed in 0..200 {
        let text = emit_sim_config(&SimConfigSpec::new(1, 1.0), seed).unwrap();
        let re: f64 = text
            .lines()
            .find_map(|l| l.strip_prefix("Re = "))
            .expect("Re line")
            .parse()
            .unwrap();
        assert!(re > 10.0 && re <= 40.0, "{re}");
        assert!(text.contains("dt-out = 10\n") && text.contains("tend = 400\n"));
        assert!(text.contains("dt = 0.005\n"));
    }
    let mut fixed = SimConfigSpec::new(2, 1.0);
    fixed.re = Some(5.0);
    assert!(emit_sim_config(&fixed, 0).is_err());
}
