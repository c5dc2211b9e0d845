//! Loss surface `L(n, c) = L∞ + a n^-α + d c^-β` over training-set size and
//! optimization compute, its fit, and budget-optimal allocations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const COEFF_MIN: f64 = 1e-6;
pub const COEFF_MAX: f64 = 1e6;
pub const EXPONENT_MAX: f64 = 3.0;
pub const MIN_FIT_POINTS: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub l_inf: f64,
    pub a: f64,
    pub alpha: f64,
    pub d: f64,
    pub beta: f64,
    /// RMS of the log-space residuals.
    pub fit_residual: f64,
    pub n_points: usize,
}

impl ScalingFit {
    pub fn new(l_inf: f64, a: f64, alpha: f64, d: f64, beta: f64) -> Self {
        Self {
            l_inf,
            a,
            alpha,
            d,
            beta,
            fit_residual: 0.0,
            n_points: 0,
        }
    }

    fn eval(&self, n: f64, c: f64) -> f64 {
        self.l_inf + self.a * n.powf(-self.alpha) + self.d * c.powf(-self.beta)
    }

    pub fn predict(&self, n_data: f64, c_train: f64) -> Result<f64> {
        predict_loss(self, n_data, c_train)
    }
}

pub fn predict_loss(fit: &ScalingFit, n_data: f64, c_train: f64) -> Result<f64> {
    if !(n_data > 0.0 && c_train > 0.0) {
        return Err(Error::arg(format!(
            "loss is defined for positive data and compute, got ({n_data}, {c_train})"
        )));
    }
    Ok(fit.eval(n_data, c_train))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub n_data: f64,
    pub c_train: f64,
    pub loss: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FitObjective {
    /// Squared log residuals.
    #[default]
    SquaredLog,
    /// Huber loss on log residuals, quadratic up to
    /// [`FitOptions::huber_delta`].
    Huber,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub starts: usize,
    pub seed: u64,
    pub objective: FitObjective,
    pub huber_delta: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            starts: 32,
            seed: 0,
            objective: FitObjective::SquaredLog,
            huber_delta: 0.1,
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn logit(p: f64) -> f64 {
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    (p / (1.0 - p)).ln()
}

/// Maps unconstrained coordinates onto the bounded parameter box.
#[derive(Clone, Copy, Debug)]
struct Box5 {
    l_max: f64,
}

impl Box5 {
    fn decode(&self, t: &[f64; 5]) -> ScalingFit {
        let (lo, hi) = (COEFF_MIN.ln(), COEFF_MAX.ln());
        ScalingFit::new(
            self.l_max * sigmoid(t[0]),
            (lo + (hi - lo) * sigmoid(t[1])).exp(),
            EXPONENT_MAX * sigmoid(t[2]),
            (lo + (hi - lo) * sigmoid(t[3])).exp(),
            EXPONENT_MAX * sigmoid(t[4]),
        )
    }

    fn encode(&self, f: &ScalingFit) -> [f64; 5] {
        let (lo, hi) = (COEFF_MIN.ln(), COEFF_MAX.ln());
        [
            logit(f.l_inf / self.l_max),
            logit((f.a.ln() - lo) / (hi - lo)),
            logit(f.alpha / EXPONENT_MAX),
            logit((f.d.ln() - lo) / (hi - lo)),
            logit(f.beta / EXPONENT_MAX),
        ]
    }
}

fn residuals(fit: &ScalingFit, points: &[ScalingPoint], out: &mut [f64]) {
    for (r, p) in out.iter_mut().zip(points) {
        *r = fit.eval(p.n_data, p.c_train).ln() - p.loss.ln();
    }
}

fn objective(fit: &ScalingFit, points: &[ScalingPoint], opts: &FitOptions) -> f64 {
    points
        .iter()
        .map(|p| {
            let r = fit.eval(p.n_data, p.c_train).ln() - p.loss.ln();
            match opts.objective {
                FitObjective::SquaredLog => r * r,
                FitObjective::Huber => {
                    let d = opts.huber_delta;
                    if r.abs() <= d {
                        r * r
                    } else {
                        d * (2.0 * r.abs() - d)
                    }
                }
            }
        })
        .sum()
}

/// Downhill simplex minimization in five dimensions.
fn nelder_mead(f: &dyn Fn(&[f64; 5]) -> f64, start: [f64; 5], step: f64, max_evals: usize) -> ([f64; 5], f64) {
    let mut simplex: Vec<([f64; 5], f64)> = Vec::with_capacity(6);
    simplex.push((start, f(&start)));
    for i in 0..5 {
        let mut x = start;
        x[i] += step;
        simplex.push((x, f(&x)));
    }
    let mut evals = 6;
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[5].1);
        if (worst - best).abs() <= 1e-15 * (best.abs() + 1e-300) + 1e-30 {
            break;
        }
        let mut centroid = [0.0; 5];
        for (x, _) in &simplex[..5] {
            for j in 0..5 {
                centroid[j] += x[j] / 5.0;
            }
        }
        let along = |t: f64| {
            let mut y = [0.0; 5];
            for j in 0..5 {
                y[j] = centroid[j] + t * (simplex[5].0[j] - centroid[j]);
            }
            y
        };
        let xr = along(-1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = f(&xe);
            evals += 1;
            simplex[5] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[4].1 {
            simplex[5] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[5].1 {
                let x = along(-0.5);
                (x, f(&x))
            } else {
                let x = along(0.5);
                (x, f(&x))
            };
            evals += 1;
            if fc < simplex[5].1.min(fr) {
                simplex[5] = (xc, fc);
            } else {
                let x0 = simplex[0].0;
                for (x, fx) in simplex.iter_mut().skip(1) {
                    for j in 0..5 {
                        x[j] = x0[j] + 0.5 * (x[j] - x0[j]);
                    }
                    *fx = f(x);
                }
                evals += 5;
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex[0]
}

/// Solve a small dense system by Gaussian elimination with partial pivoting.
fn solve5(mut m: [[f64; 5]; 5], mut rhs: [f64; 5]) -> Option<[f64; 5]> {
    for col in 0..5 {
        let piv = (col..5).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..5 {
            let factor = m[row][col] / m[col][col];
            for k in col..5 {
                m[row][k] -= factor * m[col][k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = [0.0; 5];
    for row in (0..5).rev() {
        let s: f64 = (row + 1..5).map(|k| m[row][k] * x[k]).sum();
        x[row] = (rhs[row] - s) / m[row][row];
    }
    Some(x)
}

/// Levenberg-Marquardt refinement of the squared-log objective.
fn levenberg_marquardt(bx: &Box5, points: &[ScalingPoint], mut t: [f64; 5]) -> [f64; 5] {
    let m = points.len();
    let mut r = vec![0.0; m];
    let mut rp = vec![0.0; m];
    let mut rm = vec![0.0; m];
    let cost = |t: &[f64; 5], buf: &mut Vec<f64>| {
        residuals(&bx.decode(t), points, buf);
        buf.iter().map(|v| v * v).sum::<f64>()
    };
    let mut c = cost(&t, &mut r);
    let mut lambda = 1e-3;
    let mut jac = vec![[0.0; 5]; m];
    for _ in 0..200 {
        for j in 0..5 {
            let h = 1e-6 * (1.0 + t[j].abs());
            let mut tp = t;
            let mut tm = t;
            tp[j] += h;
            tm[j] -= h;
            cost(&tp, &mut rp);
            cost(&tm, &mut rm);
            for i in 0..m {
                jac[i][j] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let mut jtj = [[0.0; 5]; 5];
        let mut jtr = [0.0; 5];
        for i in 0..m {
            for a in 0..5 {
                jtr[a] -= jac[i][a] * r[i];
                for b in 0..5 {
                    jtj[a][b] += jac[i][a] * jac[i][b];
                }
            }
        }
        let mut improved = false;
        while lambda < 1e12 {
            let mut damped = jtj;
            for a in 0..5 {
                damped[a][a] += lambda * (jtj[a][a] + 1e-12);
            }
            let Some(step) = solve5(damped, jtr) else {
                lambda *= 10.0;
                continue;
            };
            let mut tn = t;
            for a in 0..5 {
                tn[a] += step[a];
            }
            let mut rn = vec![0.0; m];
            let cn = cost(&tn, &mut rn);
            if cn.is_finite() && cn < c {
                let converged = c - cn <= 1e-16 * c + 1e-32;
                t = tn;
                c = cn;
                r = rn;
                lambda = (lambda / 10.0).max(1e-12);
                improved = !converged;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    t
}

fn check_points(points: &[ScalingPoint]) -> Result<()> {
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::DegenerateFit(format!(
            "{} point(s), need at least {MIN_FIT_POINTS}",
            points.len()
        )));
    }
    for (i, p) in points.iter().enumerate() {
        let ok = [p.n_data, p.c_train, p.loss].iter().all(|v| v.is_finite() && *v > 0.0);
        if !ok {
            return Err(Error::DegenerateFit(format!(
                "point {i} ({}, {}, {}) must be positive and finite",
                p.n_data, p.c_train, p.loss
            )));
        }
    }
    let distinct = |f: fn(&ScalingPoint) -> f64| {
        let mut v: Vec<f64> = points.iter().map(f).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v.len()
    };
    if distinct(|p| p.n_data) < 2 || distinct(|p| p.c_train) < 2 {
        return Err(Error::DegenerateFit(
            "need at least two distinct data sizes and two distinct compute values".into(),
        ));
    }
    Ok(())
}

/// Multi-start fit of the loss surface.
pub fn fit_scaling(points: &[ScalingPoint]) -> Result<ScalingFit> {
    fit_scaling_with(points, &FitOptions::default())
}

pub fn fit_scaling_with(points: &[ScalingPoint], opts: &FitOptions) -> Result<ScalingFit> {
    check_points(points)?;
    if opts.starts == 0 {
        return Err(Error::arg("at least one start is required"));
    }
    let l_min = points.iter().map(|p| p.loss).fold(f64::INFINITY, f64::min);
    let bx = Box5 { l_max: l_min };
    let f = |t: &[f64; 5]| {
        let v = objective(&bx.decode(t), points, opts);
        if v.is_finite() {
            v
        } else {
            f64::MAX
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let (lo, hi) = (COEFF_MIN.ln(), COEFF_MAX.ln());
    let mut best: Option<([f64; 5], f64)> = None;
    for _ in 0..opts.starts {
        let start = ScalingFit::new(
            l_min * rng.random_range(0.0..1.0),
            rng.random_range(lo..hi).exp(),
            rng.random_range(0.05..EXPONENT_MAX),
            rng.random_range(lo..hi).exp(),
            rng.random_range(0.05..EXPONENT_MAX),
        );
        let mut cand = nelder_mead(&f, bx.encode(&start), 0.5, 3000);
        if opts.objective == FitObjective::SquaredLog {
            let t = levenberg_marquardt(&bx, points, cand.0);
            let v = f(&t);
            if v <= cand.1 {
                cand = (t, v);
            }
        }
        if best.as_ref().is_none_or(|b| cand.1 < b.1) {
            best = Some(cand);
        }
    }
    let (mut t, mut v) = best.expect("at least one start");
    // Restart the simplex from the incumbent until it stops improving.
    for _ in 0..20 {
        let (tn, vn) = nelder_mead(&f, t, 0.05, 3000);
        let (tn, vn) = if opts.objective == FitObjective::SquaredLog {
            let tl = levenberg_marquardt(&bx, points, tn);
            let vl = f(&tl);
            if vl <= vn {
                (tl, vl)
            } else {
                (tn, vn)
            }
        } else {
            (tn, vn)
        };
        if vn >= v {
            break;
        }
        let done = v - vn <= 1e-14 * v;
        t = tn;
        v = vn;
        if done {
            break;
        }
    }
    let mut fit = bx.decode(&t);
    let mut r = vec![0.0; points.len()];
    residuals(&fit, points, &mut r);
    fit.fit_residual = (r.iter().map(|x| x * x).sum::<f64>() / points.len() as f64).sqrt();
    fit.n_points = points.len();
    Ok(fit)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetAllocation {
    pub budget: f64,
    pub c_gen: f64,
    pub n_data: u64,
    pub c_train: f64,
    pub predicted_error: f64,
}

/// Largest trajectory count that leaves strictly positive training compute.
pub fn max_trajectories(budget: f64, c_gen: f64) -> u64 {
    let mut n = (budget / c_gen).ceil() as u64;
    while n > 1 && c_gen * (n as f64) >= budget {
        n -= 1;
    }
    while c_gen * ((n + 1) as f64) < budget {
        n += 1;
    }
    n
}

/// Training compute left after `n` trajectories.
///
/// Nudged by ulps so that `c_gen * n + c_train == budget` holds in floating
/// point. When no `f64` achieves that (the exact sum lands on a rounding tie
/// away from `budget`), returns `budget - c_gen * n`, which is within one ulp.
pub fn training_compute(budget: f64, c_gen: f64, n: u64) -> f64 {
    let spent = c_gen * n as f64;
    let base = budget - spent;
    let mut down = base;
    let mut up = base;
    for _ in 0..4 {
        if spent + up == budget {
            return up;
        }
        if spent + down == budget {
            return down;
        }
        up = up.next_up();
        down = down.next_down();
    }
    base
}

/// Error-optimal split of `budget` between data generation and training.
pub fn budget_optimal_allocation(fit: &ScalingFit, budget: f64, c_gen: f64) -> Result<BudgetAllocation> {
    if !(c_gen.is_finite() && c_gen > 0.0 && budget.is_finite()) {
        return Err(Error::arg("budget and generation cost must be finite and positive"));
    }
    if budget <= c_gen {
        return Err(Error::arg(format!(
            "budget {budget} leaves no room for one trajectory at {c_gen} s each"
        )));
    }
    let n_max = max_trajectories(budget, c_gen);
    let loss = |n: u64| fit.eval(n as f64, budget - c_gen * n as f64);
    let cont = |x: f64| fit.eval(x.exp(), budget - c_gen * x.exp());
    // The loss is convex in n, hence unimodal in log n.
    let (mut lo, mut hi) = (0.0f64, (n_max as f64).ln());
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (cont(x1), cont(x2));
    for _ in 0..200 {
        if hi - lo < 1e-12 {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = cont(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = cont(x2);
        }
    }
    let guess = (0.5 * (lo + hi)).exp().round().clamp(1.0, n_max as f64) as u64;
    let mut n = guess;
    // Walk downhill over integers; convexity makes the local minimum global.
    loop {
        let here = loss(n);
        if n > 1 && loss(n - 1) <= here {
            n -= 1;
        } else if n < n_max && loss(n + 1) < here {
            n += 1;
        } else {
            break;
        }
    }
    for edge in [1, n_max] {
        if loss(edge) < loss(n) {
            n = edge;
        }
    }
    Ok(BudgetAllocation {
        budget,
        c_gen,
        n_data: n,
        c_train: training_compute(budget, c_gen, n),
        predicted_error: loss(n),
    })
}

/// Optimal allocation for each budget.
pub fn frontier(fit: &ScalingFit, c_gen: f64, budgets: &[f64]) -> Result<Vec<BudgetAllocation>> {
    budgets
        .iter()
        .map(|&b| budget_optimal_allocation(fit, b, c_gen))
        .collect()
}
