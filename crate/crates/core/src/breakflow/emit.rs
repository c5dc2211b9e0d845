//! Text emitters: Gmsh `.geo` mesh scripts and PyFR-style INI configurations.

use std::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::breakflow::layout::{validate_layout, DomainLayout};
use crate::error::{Error, Result};

/// Element sizes near obstacles, at the refinement-zone edge and at the
/// domain edge, before fidelity scaling.
pub const SIZE_NEAR: f64 = 1.0 / 3.0;
pub const SIZE_ZONE: f64 = 2.0 / 3.0;
pub const SIZE_FAR: f64 = 1.0;

/// Distances from obstacle walls over which the size grows from near to far.
pub const GRADING_DIST_MIN: f64 = 0.5;
pub const GRADING_DIST_MAX: f64 = 5.0;
/// Width of the transition band around the refinement zone.
pub const ZONE_THICKNESS: f64 = 5.0;

/// Element sizes `(near, zone, far)` for a fidelity scale.
pub fn mesh_sizes(fidelity_scale: f64) -> (f64, f64, f64) {
    (
        fidelity_scale / 3.0,
        2.0 * fidelity_scale / 3.0,
        fidelity_scale,
    )
}

fn check_scale(fidelity_scale: f64) -> Result<()> {
    if fidelity_scale.is_finite() && fidelity_scale >= 1.0 {
        Ok(())
    } else {
        Err(Error::arg(format!("fidelity scale {fidelity_scale} must be >= 1")))
    }
}

/// Gmsh script for the layout: outer boundary, obstacle holes, boundary
/// groups and a graded background size field.
pub fn emit_geometry(layout: &DomainLayout, fidelity_scale: f64) -> Result<String> {
    check_scale(fidelity_scale)?;
    let violations = validate_layout(layout);
    if let Some(v) = violations.first() {
        return Err(Error::InvalidLayout(format!("{v} ({} violation(s))", violations.len())));
    }
    let (near, zone, far) = mesh_sizes(fidelity_scale);
    let d = layout.domain;
    let z = layout.refinement_zone;
    let mut s = String::new();
    // Writing to a String never fails.
    let _ = writeln!(s, "// BreakFlow layout, seed {}", layout.seed);
    let _ = writeln!(s, "size_near = {near};");
    let _ = writeln!(s, "size_zone = {zone};");
    let _ = writeln!(s, "size_far = {far};");
    let _ = writeln!(s);
    let corners = [
        (d.x_min, d.y_min),
        (d.x_max, d.y_min),
        (d.x_max, d.y_max),
        (d.x_min, d.y_max),
    ];
    for (i, (x, y)) in corners.iter().enumerate() {
        let _ = writeln!(s, "Point({}) = {{{x}, {y}, 0, size_far}};", i + 1);
    }
    // 1: bottom, 2: right, 3: top, 4: left.
    for i in 0..4 {
        let _ = writeln!(s, "Line({}) = {{{}, {}}};", i + 1, i + 1, (i + 1) % 4 + 1);
    }
    let _ = writeln!(s, "Curve Loop(1) = {{1, 2, 3, 4}};");
    let mut next_point = 5;
    let mut next_line = 5;
    let mut obstacle_lines = Vec::new();
    for (k, o) in layout.obstacles.iter().enumerate() {
        let _ = writeln!(s);
        let _ = writeln!(s, "// obstacle {k}: center ({}, {}), {}x{}, rotation {}", o.cx, o.cy, o.w, o.h, o.rot);
        let first_point = next_point;
        for p in o.polygon() {
            let _ = writeln!(s, "Point({next_point}) = {{{}, {}, 0, size_near}};", p[0], p[1]);
            next_point += 1;
        }
        let first_line = next_line;
        for i in 0..4 {
            let a = first_point + i;
            let b = first_point + (i + 1) % 4;
            let _ = writeln!(s, "Line({next_line}) = {{{a}, {b}}};");
            obstacle_lines.push(next_line);
            next_line += 1;
        }
        let _ = writeln!(
            s,
            "Curve Loop({}) = {{{}, {}, {}, {}}};",
            k + 2,
            first_line,
            first_line + 1,
            first_line + 2,
            first_line + 3
        );
    }
    let loops: Vec<String> = (1..=layout.obstacles.len() + 1).map(|i| i.to_string()).collect();
    let _ = writeln!(s);
    let _ = writeln!(s, "Plane Surface(1) = {{{}}};", loops.join(", "));
    let _ = writeln!(s, "Physical Curve(\"outlet\") = {{2}};");
    let _ = writeln!(s, "Physical Curve(\"inlet\") = {{4, 3, 1}};");
    let lines: Vec<String> = obstacle_lines.iter().map(|l| l.to_string()).collect();
    if !lines.is_empty() {
        let _ = writeln!(s, "Physical Curve(\"obstacles\") = {{{}}};", lines.join(", "));
    }
    let _ = writeln!(s, "Physical Surface(\"fluid\") = {{1}};");
    let _ = writeln!(s);
    let _ = writeln!(s, "Field[1] = Box;");
    let _ = writeln!(s, "Field[1].VIn = size_zone;");
    let _ = writeln!(s, "Field[1].VOut = size_far;");
    let _ = writeln!(s, "Field[1].XMin = {};", z.x_min);
    let _ = writeln!(s, "Field[1].XMax = {};", z.x_max);
    let _ = writeln!(s, "Field[1].YMin = {};", z.y_min);
    let _ = writeln!(s, "Field[1].YMax = {};", z.y_max);
    let _ = writeln!(s, "Field[1].Thickness = {ZONE_THICKNESS};");
    let background = if lines.is_empty() {
        1
    } else {
        let _ = writeln!(s, "Field[2] = Distance;");
        let _ = writeln!(s, "Field[2].CurvesList = {{{}}};", lines.join(", "));
        let _ = writeln!(s, "Field[2].Sampling = 100;");
        let _ = writeln!(s, "Field[3] = Threshold;");
        let _ = writeln!(s, "Field[3].InField = 2;");
        let _ = writeln!(s, "Field[3].SizeMin = size_near;");
        let _ = writeln!(s, "Field[3].SizeMax = size_far;");
        let _ = writeln!(s, "Field[3].DistMin = {GRADING_DIST_MIN};");
        let _ = writeln!(s, "Field[3].DistMax = {GRADING_DIST_MAX};");
        let _ = writeln!(s, "Field[4] = Min;");
        let _ = writeln!(s, "Field[4].FieldsList = {{1, 3}};");
        4
    };
    let _ = writeln!(s, "Background Field = {background};");
    let _ = writeln!(s, "Mesh.MeshSizeExtendFromBoundary = 0;");
    let _ = writeln!(s, "Mesh.MeshSizeFromPoints = 0;");
    let _ = writeln!(s, "Mesh.MeshSizeFromCurvature = 0;");
    Ok(s)
}

/// Reynolds-number bins `(lo, hi]`.
pub const RE_BINS: [(f64, f64); 3] = [(10.0, 40.0), (40.0, 90.0), (90.0, 160.0)];

pub const SIM_TIME: f64 = 400.0;
pub const SIM_FRAMES: u32 = 40;
// Time-step values of the PyFR 2D incompressible cylinder example
// (examples/inc_cylinder_2d/inc_cylinder_2d.ini).
pub const BASE_DT: f64 = 0.005;
pub const BASE_PSEUDO_DT: f64 = 0.001;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfigSpec {
    pub re_bin: u8,
    /// Fixed Reynolds number; drawn from the bin when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub re: Option<f64>,
    pub sim_time: f64,
    pub n_frames: u32,
    pub fidelity_scale: f64,
}

impl SimConfigSpec {
    pub fn new(re_bin: u8, fidelity_scale: f64) -> Self {
        Self {
            re_bin,
            re: None,
            sim_time: SIM_TIME,
            n_frames: SIM_FRAMES,
            fidelity_scale,
        }
    }

    pub fn bin_range(&self) -> Result<(f64, f64)> {
        match self.re_bin {
            1..=3 => Ok(RE_BINS[self.re_bin as usize - 1]),
            b => Err(Error::arg(format!("Reynolds bin {b} not in 1..=3"))),
        }
    }

    /// The fixed Reynolds number, or one drawn uniformly from the bin.
    pub fn reynolds(&self, seed: u64) -> Result<f64> {
        let (lo, hi) = self.bin_range()?;
        match self.re {
            Some(re) if re > lo && re <= hi => Ok(re),
            Some(re) => Err(Error::arg(format!(
                "Re = {re} outside bin {} ({lo}, {hi}]",
                self.re_bin
            ))),
            None => {
                let u: f64 = ChaCha8Rng::seed_from_u64(seed).random();
                // u in [0, 1) maps onto (lo, hi].
                Ok(hi - (hi - lo) * u)
            }
        }
    }
}

/// INI configuration for the external flow solver.
pub fn emit_sim_config(spec: &SimConfigSpec, seed: u64) -> Result<String> {
    check_scale(spec.fidelity_scale)?;
    if !(spec.sim_time > 0.0 && spec.n_frames > 0) {
        return Err(Error::arg("simulation time and frame count must be positive"));
    }
    let re = spec.reynolds(seed)?;
    let scale = spec.fidelity_scale;
    let mut s = String::new();
    let _ = writeln!(s, "; BreakFlow simulation, seed {seed}, Reynolds bin {}", spec.re_bin);
    let _ = writeln!(
        s,
        "; dt and pseudo-dt base values follow the PyFR 2D incompressible cylinder example"
    );
    let _ = writeln!(s);
    let _ = writeln!(s, "[mesh]");
    let _ = writeln!(s, "geometry = breakflow-{seed}.geo");
    let _ = writeln!(s, "fidelity-scale = {scale}");
    let _ = writeln!(s);
    let _ = writeln!(s, "[backend]");
    let _ = writeln!(s, "precision = double");
    let _ = writeln!(s, "rank-allocator = linear");
    let _ = writeln!(s);
    let _ = writeln!(s, "[constants]");
    let _ = writeln!(s, "Re = {re}");
    let _ = writeln!(s, "nu = {}", 1.0 / re);
    let _ = writeln!(s, "Uin = 1.0");
    let _ = writeln!(s, "Vin = 0.0");
    let _ = writeln!(s, "Pc = 1.0");
    let _ = writeln!(s, "ac-zeta = 2.5");
    let _ = writeln!(s);
    let _ = writeln!(s, "[solver]");
    let _ = writeln!(s, "system = ac-navier-stokes");
    let _ = writeln!(s, "order = 3");
    let _ = writeln!(s);
    let _ = writeln!(s, "[solver-time-integrator]");
    let _ = writeln!(s, "formulation = dual");
    let _ = writeln!(s, "scheme = bdf2");
    let _ = writeln!(s, "pseudo-scheme = tvd-rk3");
    let _ = writeln!(s, "controller = none");
    let _ = writeln!(s, "pseudo-controller = local-pi");
    let _ = writeln!(s, "tstart = 0.0");
    let _ = writeln!(s, "tend = {}", spec.sim_time);
    let _ = writeln!(s, "dt = {}", BASE_DT * scale);
    let _ = writeln!(s, "pseudo-dt = {}", BASE_PSEUDO_DT * scale);
    let _ = writeln!(s, "pseudo-niters-min = 3");
    let _ = writeln!(s, "pseudo-niters-max = 3");
    let _ = writeln!(s, "pseudo-resid-norm = l2");
    let _ = writeln!(s, "pseudo-resid-tol = 1e-3");
    let _ = writeln!(s, "atol = 1e-6");
    let _ = writeln!(s, "pseudo-dt-max-mult = 2.5");
    let _ = writeln!(s);
    let _ = writeln!(s, "[soln-plugin-writer]");
    let _ = writeln!(s, "dt-out = {}", spec.sim_time / spec.n_frames as f64);
    let _ = writeln!(s, "basedir = .");
    let _ = writeln!(s, "basename = breakflow-{seed}-{{t:.2f}}");
    let _ = writeln!(s);
    let _ = writeln!(s, "[soln-bcs-outlet]");
    let _ = writeln!(s, "type = ac-out-fp");
    let _ = writeln!(s, "p = Pc");
    let _ = writeln!(s);
    let _ = writeln!(s, "[soln-bcs-inlet]");
    let _ = writeln!(s, "type = ac-in-fv");
    let _ = writeln!(s, "u = Uin");
    let _ = writeln!(s, "v = Vin");
    let _ = writeln!(s);
    let _ = writeln!(s, "[soln-bcs-obstacles]");
    let _ = writeln!(s, "type = no-slp");
    let _ = writeln!(s);
    let _ = writeln!(s, "[soln-ics]");
    let _ = writeln!(s, "u = Uin");
    let _ = writeln!(s, "v = Vin");
    let _ = writeln!(s, "p = Pc");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::breakflow::layout::{generate_layout, DOMAIN, REFINEMENT_ZONE};

    fn empty() -> DomainLayout {
        DomainLayout {
            seed: 0,
            domain: DOMAIN,
            obstacles: vec![],
            refinement_zone: REFINEMENT_ZONE,
        }
    }

    #[test]
    fn sizes_scale() {
        let one = emit_geometry(&generate_layout(1), 1.0).unwrap();
        for tok in ["size_near = 0.3333333333333333;", "size_zone = 0.6666666666666666;", "size_far = 1;"] {
            assert!(one.contains(tok), "missing {tok}");
        }
        let two = emit_geometry(&generate_layout(1), 2.0).unwrap();
        for tok in ["size_near = 0.6666666666666666;", "size_zone = 1.3333333333333333;", "size_far = 2;"] {
            assert!(two.contains(tok), "missing {tok}");
        }
    }

    #[test]
    fn empty_layout_has_no_holes() {
        let s = emit_geometry(&empty(), 1.0).unwrap();
        assert!(s.contains("Plane Surface(1) = {1};"));
        assert!(!s.contains("obstacles"));
        assert!(s.contains("Background Field = 1;"));
    }

    #[test]
    fn invalid_layout_rejected() {
        let mut l = generate_layout(2);
        l.obstacles[0].rot = 7;
        assert!(matches!(emit_geometry(&l, 1.0), Err(Error::InvalidLayout(_))));
        assert!(emit_geometry(&empty(), 0.5).is_err());
    }

    #[test]
    fn sim_config_contents() {
        let spec = SimConfigSpec::new(1, 1.0);
        let text = emit_sim_config(&spec, 9).unwrap();
        assert_eq!(text, emit_sim_config(&spec, 9).unwrap());
        assert!(text.contains("dt = 0.005\n") && text.contains("pseudo-dt = 0.001\n"));
        assert!(text.contains("tend = 400\n") && text.contains("dt-out = 10\n"));
        for seed in 0..200 {
            let re = spec.reynolds(seed).unwrap();
            assert!(re > 10.0 && re <= 40.0);
        }
        let fixed = SimConfigSpec {
            re: Some(95.0),
            ..SimConfigSpec::new(2, 1.0)
        };
        assert!(emit_sim_config(&fixed, 0).is_err());
        assert!(emit_sim_config(&SimConfigSpec::new(4, 1.0), 0).is_err());
    }
}
