use serde::{Deserialize, Serialize};

/// Rotation steps are multiples of this many degrees.
pub const ROTATION_STEP: u32 = 15;

// cos of 0, 15, ..., 90 degrees.
const COS_TABLE: [f64; 7] = [
    1.0,
    0.965_925_826_289_068_3,
    0.866_025_403_784_438_6,
    std::f64::consts::FRAC_1_SQRT_2,
    0.5,
    0.258_819_045_102_520_74,
    0.0,
];

/// `(cos, sin)` of a multiple of 15 degrees in `[0, 180)`.
///
/// Values come from a table so that `cos(180 − φ) = −cos φ` and
/// `sin(180 − φ) = sin φ` hold exactly, which makes mirrored obstacles exact
/// reflections of each other.
pub fn cos_sin_deg(rot: u32) -> (f64, f64) {
    assert!(rot % ROTATION_STEP == 0 && rot < 180, "rotation {rot} is not a multiple of 15 in [0, 180)");
    let k = (rot / ROTATION_STEP) as usize;
    if k <= 6 {
        (COS_TABLE[k], COS_TABLE[6 - k])
    } else {
        (-COS_TABLE[12 - k], COS_TABLE[k - 6])
    }
}

pub type Point = [f64; 2];

/// Axis-aligned rectangle `[x_min, x_max] × [y_min, y_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn contains(&self, p: Point) -> bool {
        (self.x_min..=self.x_max).contains(&p[0]) && (self.y_min..=self.y_max).contains(&p[1])
    }
}

/// Rotated rectangle with integer side lengths.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub cx: f64,
    pub cy: f64,
    pub w: u32,
    pub h: u32,
    /// Degrees counter-clockwise, a multiple of 15 in `[0, 180)`.
    pub rot: u32,
}

impl Obstacle {
    pub fn area(&self) -> u32 {
        self.w * self.h
    }

    /// Reflection about `y = 0`.
    pub fn mirror(&self) -> Self {
        Self {
            cy: -self.cy,
            rot: (180 - self.rot) % 180,
            ..*self
        }
    }

    /// Corners in counter-clockwise order.
    pub fn polygon(&self) -> [Point; 4] {
        let (c, s) = cos_sin_deg(self.rot);
        let (hw, hh) = (self.w as f64 / 2.0, self.h as f64 / 2.0);
        [(-hw, -hh), (hw, -hh), (hw, hh), (-hw, hh)].map(|(a, b)| {
            [self.cx + (a * c - b * s), self.cy + (a * s + b * c)]
        })
    }
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    let ap = sub(p, a);
    let len2 = dot(ab, ab);
    let t = if len2 == 0.0 { 0.0 } else { (dot(ap, ab) / len2).clamp(0.0, 1.0) };
    let q = [a[0] + t * ab[0], a[1] + t * ab[1]];
    let d = sub(p, q);
    dot(d, d).sqrt()
}

/// Separating-axis test for convex polygons; touching counts as overlap.
pub fn convex_overlap(p: &[Point], q: &[Point]) -> bool {
    for poly in [p, q] {
        for i in 0..poly.len() {
            let e = sub(poly[(i + 1) % poly.len()], poly[i]);
            let axis = [-e[1], e[0]];
            let project = |pts: &[Point]| {
                pts.iter()
                    .map(|v| dot(*v, axis))
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
            };
            let (a0, a1) = project(p);
            let (b0, b1) = project(q);
            if a1 < b0 || b1 < a0 {
                return false;
            }
        }
    }
    true
}

/// Euclidean distance between convex polygons; zero when they overlap.
pub fn convex_distance(p: &[Point], q: &[Point]) -> f64 {
    if convex_overlap(p, q) {
        return 0.0;
    }
    let one_way = |a: &[Point], b: &[Point]| {
        a.iter()
            .flat_map(|&v| (0..b.len()).map(move |i| point_segment_distance(v, b[i], b[(i + 1) % b.len()])))
            .fold(f64::INFINITY, f64::min)
    };
    one_way(p, q).min(one_way(q, p))
}

pub fn obstacle_distance(a: &Obstacle, b: &Obstacle) -> f64 {
    convex_distance(&a.polygon(), &b.polygon())
}

/// Same rectangle as a point set: equal corners up to ordering within `tol`.
pub fn same_shape(a: &Obstacle, b: &Obstacle, tol: f64) -> bool {
    let pa = a.polygon();
    let pb = b.polygon();
    pa.iter()
        .all(|u| pb.iter().any(|v| (u[0] - v[0]).abs() <= tol && (u[1] - v[1]).abs() <= tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trig_table_matches_libm() {
        for rot in (0..180).step_by(15) {
            let (c, s) = cos_sin_deg(rot);
            let r = (rot as f64).to_radians();
            assert!((c - r.cos()).abs() < 1e-15 && (s - r.sin()).abs() < 1e-15, "{rot}");
            let (cm, sm) = cos_sin_deg((180 - rot) % 180);
            if rot != 0 {
                assert_eq!((cm, sm), (-c, s));
            }
        }
    }

    #[test]
    fn mirror_is_exact_reflection() {
        for rot in (0..180).step_by(15) {
            let o = Obstacle {
                cx: 17.0,
                cy: 6.0,
                w: 3,
                h: 5,
                rot,
            };
            let m = o.mirror();
            let reflected: Vec<Point> = o.polygon().iter().map(|p| [p[0], -p[1]]).collect();
            for p in m.polygon() {
                assert!(reflected.contains(&p), "rot {rot}: {p:?} not in {reflected:?}");
            }
        }
    }

    #[test]
    fn distance_of_separated_squares() {
        let a = Obstacle {
            cx: 0.0,
            cy: 0.0,
            w: 2,
            h: 2,
            rot: 0,
        };
        let b = Obstacle { cx: 3.0, ..a };
        assert!((obstacle_distance(&a, &b) - 1.0).abs() < 1e-15);
        let c = Obstacle { cx: 1.5, ..a };
        assert_eq!(obstacle_distance(&a, &c), 0.0);
        // Corner to corner along the diagonal.
        let d = Obstacle { cx: 3.0, cy: 3.0, ..a };
        assert!((obstacle_distance(&a, &d) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rotated_square_is_a_diamond() {
        let o = Obstacle {
            cx: 0.0,
            cy: 0.0,
            w: 2,
            h: 2,
            rot: 45,
        };
        let r = 2f64.sqrt();
        let p = o.polygon();
        assert!(p.iter().any(|v| (v[0] - r).abs() < 1e-15 && v[1].abs() < 1e-15));
        assert!(same_shape(&o, &o.mirror(), 1e-12));
    }
}
