//! Monte Carlo valuation of feedback policies on the primal state.
//!
//! The simulated state is total net wealth T = X + Y/κ − h/r·1{insured}, which
//! follows dT = [rT + θΠ − c]dt + Π dW with Π = σπ + σ_y Y/κ. T is stepped in
//! log form with the policy frozen over the step, which is exact whenever c/T
//! and Π/T are constant. Y and the state-price density ξ use exact lognormal
//! steps on the same increment. Running rewards over a step are integrated in
//! conditional expectation under the same frozen dynamics, so the grid only
//! matters where the policy proportions move.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Model, PathNoise, SimConfig};

/// What a rule does at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    pub consumption: f64,
    pub investment: f64,
    /// Buy insurance now with this bequest.
    pub purchase: Option<f64>,
}

/// A feedback rule. `insured` carries the bequest once bought. `warm` is a
/// per-path scratch value, typically a shadow-price guess.
pub trait FeedbackRule: Sync {
    fn act(&self, t: f64, x: f64, y: f64, insured: Option<f64>, warm: &mut f64) -> Result<Action>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_paths: usize,
    pub horizon_t: f64,
    pub seed: u64,
    /// Size of the neglected tail beyond the horizon, at the post-purchase decay rate.
    pub tail_bound: f64,
}

impl McEstimate {
    /// Distance from `target` in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target) / self.stderr
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McReport {
    pub value: McEstimate,
    /// E[ξ_T X_T + ∫ ξ (c + h·1{insured} − Y) dt], which should equal x.
    pub budget: McEstimate,
    /// Fraction of paths that bought insurance before the horizon.
    pub purchased: f64,
    /// Paths on which net wealth left the admissible region.
    pub admissibility_violations: usize,
    /// Per-path values, kept for paired comparisons.
    pub samples: Vec<f64>,
}

struct PathOutcome {
    value: f64,
    budget: f64,
    purchased: bool,
    violated: bool,
}

/// Per-step quantities shared by all paths.
struct Step {
    t: f64,
    dt: f64,
    sqrt_dt: f64,
    discount: f64,
    /// ∫ e^{−βs}, ∫ e^{−rs} and ∫ e^{−κs} over the step.
    bequest_weight: f64,
    premium_weight: f64,
    income_weight: f64,
}

fn step_table(model: &Model, times: &[f64]) -> Vec<Step> {
    times
        .windows(2)
        .map(|w| {
            let dt = w[1] - w[0];
            Step {
                t: w[0],
                dt,
                sqrt_dt: dt.sqrt(),
                discount: (-model.dc.beta * w[0]).exp(),
                bequest_weight: growth_integral(-model.dc.beta, dt),
                premium_weight: growth_integral(-model.p.r, dt),
                income_weight: growth_integral(-model.dc.kappa, dt),
            }
        })
        .collect()
}

/// ∫₀^τ e^{k s} ds.
fn growth_integral(k: f64, tau: f64) -> f64 {
    if (k * tau).abs() < 1e-12 {
        tau
    } else {
        (k * tau).exp_m1() / k
    }
}

fn run_path<R: FeedbackRule>(
    rule: &R,
    model: &Model,
    steps: &[Step],
    x0: f64,
    y0: f64,
    sim: &SimConfig,
    path: usize,
) -> Result<PathOutcome> {
    let p = &model.p;
    let (theta, kappa, beta, g) = (model.dc.theta, model.dc.kappa, model.dc.beta, p.gamma);
    let (y_drift, xi_drift) = (p.mu_y - 0.5 * p.sigma_y * p.sigma_y, -(p.r + 0.5 * theta * theta));
    let mut noise = PathNoise::new(sim.seed, path, sim.antithetic);
    let mut y = y0;
    let mut xi = 1.0;
    let mut insured: Option<f64> = None;
    let mut total = x0 + y / kappa;
    let mut warm = f64::NAN;
    let mut value = 0.0;
    let mut budget = 0.0;
    let mut violated = false;
    let premium_pv = |b: Option<f64>| b.map_or(0.0, |b| p.m * b / p.r);
    let mut bequest_rate = if p.earmark_q > 0.0 { p.m * model.u(p.earmark_q) } else { 0.0 };
    let mut premium = 0.0;

    for s in steps {
        let x = total - y / kappa + premium_pv(insured);
        let mut a = rule.act(s.t, x, y, insured, &mut warm)?;
        if insured.is_none() {
            if let Some(b) = a.purchase {
                insured = Some(b);
                total -= premium_pv(insured);
                bequest_rate = p.m * model.u(p.l * b);
                premium = p.m * b;
                a = rule.act(s.t, x, y, insured, &mut warm)?;
            }
        }
        if !(total > 0.0) {
            violated = true;
            break;
        }
        if !(a.consumption > 0.0) || !a.consumption.is_finite() {
            return Err(Error::NonFiniteUtility(format!("consumption {} at t = {}", a.consumption, s.t)));
        }
        let dt = s.dt;
        let pi_total = p.sigma * a.investment + p.sigma_y * y / kappa;
        let mu_t = (p.r * total + theta * pi_total - a.consumption) / total;
        let vol = pi_total / total;

        // Rewards over the step in expectation given the state, with the
        // policy proportions c/T and Π/T frozen.
        let lambda = (1.0 - g) * mu_t - 0.5 * g * (1.0 - g) * vol * vol;
        let reward = model.u(a.consumption) * growth_integral(lambda - beta, dt) + bequest_rate * s.bequest_weight;
        if !reward.is_finite() {
            return Err(Error::NonFiniteUtility(format!("reward {reward} at t = {}", s.t)));
        }
        value += s.discount * reward;
        budget += xi
            * (a.consumption * growth_integral(mu_t - p.r - theta * vol, dt) + premium * s.premium_weight
                - y * s.income_weight);

        let dw = s.sqrt_dt * noise.normal();
        total *= ((mu_t - 0.5 * vol * vol) * dt + vol * dw).exp();
        y *= (y_drift * dt + p.sigma_y * dw).exp();
        xi *= (xi_drift * dt - theta * dw).exp();
    }
    if !violated {
        budget += xi * (total - y / kappa + premium_pv(insured));
    }
    Ok(PathOutcome { value, budget, purchased: insured.is_some(), violated })
}

fn estimate(samples: &[f64], antithetic: bool, sim: &SimConfig, tail_rate: f64) -> McEstimate {
    let units: Vec<f64> = if antithetic {
        samples.chunks(2).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect()
    } else {
        samples.to_vec()
    };
    let n = units.len() as f64;
    let mean = units.iter().sum::<f64>() / n;
    let var = units.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    McEstimate {
        mean,
        stderr: (var / n).sqrt(),
        n_paths: samples.len(),
        horizon_t: sim.horizon_t,
        seed: sim.seed,
        tail_bound: mean.abs() * (-tail_rate * sim.horizon_t).exp(),
    }
}

/// Expected discounted lifetime utility of `rule` from (x, y).
pub fn mc_value<R: FeedbackRule>(rule: &R, model: &Model, x: f64, y: f64, sim: &SimConfig) -> Result<McReport> {
    sim.validate()?;
    if !(x + model.human_capital(y) > 0.0) || !(y > 0.0) {
        return Err(Error::Domain(format!("need x > -y/kappa and y > 0, got x = {x}, y = {y}")));
    }
    let times = sim.time_grid();
    let steps = step_table(model, &times);
    let outcomes: Vec<PathOutcome> = (0..sim.n_paths)
        .into_par_iter()
        .map(|path| run_path(rule, model, &steps, x, y, sim, path))
        .collect::<Result<_>>()?;
    let values: Vec<f64> = outcomes.iter().map(|o| o.value).collect();
    let budgets: Vec<f64> = outcomes.iter().map(|o| o.budget).collect();
    let tail_rate = model.p.gamma * model.dc.k;
    Ok(McReport {
        value: estimate(&values, sim.antithetic, sim, tail_rate),
        budget: estimate(&budgets, sim.antithetic, sim, 0.0),
        purchased: outcomes.iter().filter(|o| o.purchased).count() as f64 / sim.n_paths as f64,
        admissibility_violations: outcomes.iter().filter(|o| o.violated).count(),
        samples: values,
    })
}

/// Mean and standard error of `a − b` over common paths.
pub fn paired_difference(a: &McReport, b: &McReport, antithetic: bool) -> (f64, f64) {
    let diff: Vec<f64> = a.samples.iter().zip(&b.samples).map(|(u, v)| u - v).collect();
    let n = diff.len();
    let units: Vec<f64> = if antithetic {
        diff.chunks(2).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect()
    } else {
        diff
    };
    let m = units.len() as f64;
    let mean = units.iter().sum::<f64>() / m;
    let var = units.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
    debug_assert!(n == b.samples.len());
    (mean, (var / m).sqrt())
}
