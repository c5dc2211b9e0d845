//! Browser bindings: a live pattern simulator, break-even crossover curves
//! and random obstacle layouts.

use wasm_bindgen::prelude::*;

use breakeven::breakeven::{breakeven_complexity, crossover_costs, NStar};
use breakeven::breakflow::generate_layout;
use breakeven::io::report::crossover_grid;
use breakeven::solver::{sample_initial_condition, Benchmark, CanonicalSpec, Stepper};

fn js(e: breakeven::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// A 2D benchmark advanced in place on a coarse grid.
#[wasm_bindgen]
pub struct PatternSim {
    stepper: Stepper,
    channels: usize,
}

#[wasm_bindgen]
impl PatternSim {
    /// `benchmark` is `ns`, `ks` or `gs`; `dt_scale` multiplies the canonical step.
    #[wasm_bindgen(constructor)]
    pub fn new(benchmark: &str, n: usize, seed: u64, dt_scale: f64) -> Result<PatternSim, JsError> {
        let benchmark: Benchmark = benchmark.parse().map_err(js)?;
        if matches!(benchmark, Benchmark::KuramotoSivashinsky { dim } if dim != 2) {
            return Err(JsError::new("only 2D benchmarks can be drawn"));
        }
        let spec = CanonicalSpec::new(benchmark).with_resolution(n).map_err(js)?;
        let ic = sample_initial_condition(&spec.pde, &spec.grid, seed).map_err(js)?;
        let stepper = Stepper::new(&spec.pde, spec.config.dt * dt_scale, &ic).map_err(js)?;
        Ok(PatternSim {
            stepper,
            channels: spec.pde.channels(),
        })
    }

    pub fn advance(&mut self, steps: usize) -> Result<(), JsError> {
        for _ in 0..steps {
            self.stepper.step().map_err(js)?;
        }
        Ok(())
    }

    pub fn time(&self) -> f64 {
        self.stepper.time()
    }

    pub fn n(&self) -> usize {
        self.stepper.grid().n()
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// One channel rescaled to `[0, 1]`, row-major.
    pub fn image(&self, channel: usize) -> Result<Vec<f32>, JsError> {
        let field = self.stepper.state().map_err(js)?;
        if channel >= self.channels {
            return Err(JsError::new("no such channel"));
        }
        Ok(normalize(field.channel(channel)))
    }
}

fn normalize(v: &[f64]) -> Vec<f32> {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    v.iter().map(|x| ((x - lo) / span) as f32).collect()
}

/// Break-even solve count, `Infinity` when the surrogate never pays off.
#[wasm_bindgen]
pub fn n_star(budget: f64, c_matched: f64, c_inf: f64) -> Result<f64, JsError> {
    Ok(match breakeven_complexity(budget, c_matched, c_inf).map_err(js)? {
        NStar::Finite(n) => n,
        NStar::Infinite => f64::INFINITY,
    })
}

/// Total-cost curves around the break-even point as flat
/// `[n, surrogate, classical, ...]` triples.
#[wasm_bindgen]
pub fn crossover(budget: f64, c_matched: f64, c_inf: f64) -> Result<Vec<f64>, JsError> {
    let n = breakeven_complexity(budget, c_matched, c_inf).map_err(js)?;
    Ok(crossover_costs(budget, c_inf, c_matched, &crossover_grid(n))
        .into_iter()
        .flat_map(|p| [p.n, p.surrogate, p.classical])
        .collect())
}

/// Obstacle corners of one layout, eight numbers per obstacle.
#[wasm_bindgen]
pub fn layout_polygons(seed: u64) -> Vec<f64> {
    generate_layout(seed)
        .obstacles
        .iter()
        .flat_map(|o| o.polygon())
        .flatten()
        .collect()
}

/// `[x_min, x_max, y_min, y_max]` of the flow domain followed by the refinement zone.
#[wasm_bindgen]
pub fn layout_frame(seed: u64) -> Vec<f64> {
    let l = generate_layout(seed);
    [l.domain, l.refinement_zone]
        .iter()
        .flat_map(|r| [r.x_min, r.x_max, r.y_min, r.y_max])
        .collect()
}
