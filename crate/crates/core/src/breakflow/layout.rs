use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::breakflow::geometry::{obstacle_distance, same_shape, Obstacle, Rect, ROTATION_STEP};

pub const DOMAIN: Rect = Rect {
    x_min: 0.0,
    x_max: 50.0,
    y_min: -25.0,
    y_max: 25.0,
};

pub const REFINEMENT_ZONE: Rect = Rect {
    x_min: 5.0,
    x_max: 45.0,
    y_min: -20.0,
    y_max: 20.0,
};

pub const MIN_SEPARATION: f64 = 2.0;
pub const X_CELLS: std::ops::RangeInclusive<u32> = 11..=25;
pub const Y_CELLS: std::ops::RangeInclusive<u32> = 0..=15;
pub const MIN_AREA: u32 = 4;
pub const MAX_AREA: u32 = 30;
pub const MAX_AREA_ON_AXIS: u32 = 60;
pub const PLACEMENT_PROBABILITY: f64 = 0.5;

/// Tolerance for geometric comparisons of generated layouts.
const GEOM_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainLayout {
    pub seed: u64,
    pub domain: Rect,
    pub obstacles: Vec<Obstacle>,
    pub refinement_zone: Rect,
}

/// Ordered factor pairs `(w, h)` with `w h = area` and both sides at least 2.
pub fn factor_pairs(area: u32) -> Vec<(u32, u32)> {
    (2..=area / 2)
        .filter(|w| area % w == 0 && area / w >= 2)
        .map(|w| (w, area / w))
        .collect()
}

/// Areas in `[MIN_AREA, max]` that admit at least one factor pair.
pub fn valid_areas(max: u32) -> Vec<u32> {
    (MIN_AREA..=max).filter(|&a| !factor_pairs(a).is_empty()).collect()
}

/// Random stream for one placement cell: the layout seed picks the key and
/// the cell `(x, y)` picks the stream `x << 32 | y`.
pub fn cell_rng(seed: u64, x: u32, y: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((x as u64) << 32) | y as u64);
    rng
}

/// Candidate obstacle for cell `(x, y)`, or `None` if the placement coin
/// says skip. Draw order: coin, area, factor pair, rotation.
pub fn sample_cell(seed: u64, x: u32, y: u32) -> Option<Obstacle> {
    let mut rng = cell_rng(seed, x, y);
    if !rng.random_bool(PLACEMENT_PROBABILITY) {
        return None;
    }
    let areas = valid_areas(if y == 0 { MAX_AREA_ON_AXIS } else { MAX_AREA });
    let area = areas[rng.random_range(0..areas.len())];
    let pairs = factor_pairs(area);
    let (w, h) = pairs[rng.random_range(0..pairs.len())];
    let rot = if y == 0 {
        if w == h {
            [0, 45][rng.random_range(0..2)]
        } else {
            0
        }
    } else {
        ROTATION_STEP * rng.random_range(0..180 / ROTATION_STEP)
    };
    Some(Obstacle {
        cx: x as f64,
        cy: y as f64,
        w,
        h,
        rot,
    })
}

fn inside(o: &Obstacle, domain: &Rect) -> bool {
    o.polygon().iter().all(|p| domain.contains(*p))
}

/// Deterministic layout for `seed`.
///
/// Cells are visited for x in 11..=25 (outer) and y in 0..=15 (inner). A
/// candidate is dropped if it leaves the domain, comes closer than
/// [`MIN_SEPARATION`] to an accepted obstacle or to that obstacle's mirror
/// image, or (off the axis) to its own mirror image. Accepted off-axis
/// obstacles are then mirrored about `y = 0`.
pub fn generate_layout(seed: u64) -> DomainLayout {
    let mut placed: Vec<Obstacle> = Vec::new();
    let mut images: Vec<Obstacle> = Vec::new();
    for x in X_CELLS {
        for y in Y_CELLS {
            let Some(cand) = sample_cell(seed, x, y) else {
                continue;
            };
            if !inside(&cand, &DOMAIN) {
                continue;
            }
            let mirror = cand.mirror();
            if y > 0 && obstacle_distance(&cand, &mirror) < MIN_SEPARATION {
                continue;
            }
            if images.iter().any(|o| obstacle_distance(&cand, o) < MIN_SEPARATION) {
                continue;
            }
            images.push(cand);
            if y > 0 {
                images.push(mirror);
            }
            placed.push(cand);
        }
    }
    let mut obstacles: Vec<Obstacle> = placed
        .iter()
        .flat_map(|o| {
            let mut v = vec![*o];
            if o.cy != 0.0 {
                v.push(o.mirror());
            }
            v
        })
        .collect();
    sort_obstacles(&mut obstacles);
    DomainLayout {
        seed,
        domain: DOMAIN,
        obstacles,
        refinement_zone: REFINEMENT_ZONE,
    }
}

/// Canonical order: by `cx`, then `cy`.
pub fn sort_obstacles(obstacles: &mut [Obstacle]) {
    obstacles.sort_by(|a, b| a.cx.total_cmp(&b.cx).then(a.cy.total_cmp(&b.cy)));
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Separation { i: usize, j: usize, distance: f64 },
    Asymmetric { i: usize },
    OutsideDomain { i: usize },
    Rotation { i: usize, rot: u32 },
    Area { i: usize, area: u32 },
    Side { i: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Separation { i, j, distance } => {
                write!(f, "separation < 2 between obstacles {i} and {j} ({distance})")
            }
            Violation::Asymmetric { i } => write!(f, "obstacle {i} has no mirror image about y = 0"),
            Violation::OutsideDomain { i } => write!(f, "obstacle {i} leaves the domain"),
            Violation::Rotation { i, rot } => write!(f, "obstacle {i} has invalid rotation {rot}"),
            Violation::Area { i, area } => write!(f, "obstacle {i} has area {area} outside its range"),
            Violation::Side { i } => write!(f, "obstacle {i} has a side shorter than 2"),
        }
    }
}

/// All invariant violations of a layout; empty when valid.
pub fn validate_layout(layout: &DomainLayout) -> Vec<Violation> {
    let obs = &layout.obstacles;
    let usable = |o: &Obstacle| o.rot % ROTATION_STEP == 0 && o.rot < 180;
    let mut out = Vec::new();
    for (i, o) in obs.iter().enumerate() {
        if o.w < 2 || o.h < 2 {
            out.push(Violation::Side { i });
        }
        let max = if o.cy == 0.0 { MAX_AREA_ON_AXIS } else { MAX_AREA };
        if !(MIN_AREA..=max).contains(&o.area()) {
            out.push(Violation::Area { i, area: o.area() });
        }
        let rot_ok = usable(o)
            && (o.cy != 0.0 || o.rot == 0 || (o.w == o.h && o.rot == 45));
        if !rot_ok {
            out.push(Violation::Rotation { i, rot: o.rot });
            // Later checks need a well-defined polygon.
            continue;
        }
        if !inside(o, &layout.domain) {
            out.push(Violation::OutsideDomain { i });
        }
        let m = o.mirror();
        if !obs.iter().any(|p| usable(p) && same_shape(&m, p, GEOM_TOL)) {
            out.push(Violation::Asymmetric { i });
        }
    }
    for i in 0..obs.len() {
        for j in i + 1..obs.len() {
            if !(usable(&obs[i]) && usable(&obs[j])) {
                continue;
            }
            let distance = obstacle_distance(&obs[i], &obs[j]);
            if distance < MIN_SEPARATION - GEOM_TOL {
                out.push(Violation::Separation { i, j, distance });
            }
        }
    }
    out
}
