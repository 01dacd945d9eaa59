//! Age-dependent mortality M_t = m·e^{a t} with premium M_t·B. The purchase
//! boundary becomes a function b^M(m) of the current force of mortality and
//! solves
//!
//! 0 = E_{b(m), m}[∫ e^{−∫(ρ+M)} (M u(q) − M u(l(q+B)) + Z M B) 1{Z_t ≥ b(M_t)} dt].
//!
//! The expectation is estimated by Monte Carlo on common Brownian paths. The
//! Z-linear term is evaluated under the measure with density ξ_t e^{rt}, where
//! its weight becomes the bounded deterministic factor z B M_t e^{−rt}; the
//! mortality term stays under P with weight e^{−∫(ρ+M)} M_t.
//!
//! Because M is deterministic and increasing, the equation at level m only
//! involves the boundary at levels ≥ m. Nodes are therefore solved one at a
//! time from the top of the grid down, each as a scalar root with the node's
//! own value entering both the start point and the indicator.
//!
//! When a ≥ r the discounted premium term z B m e^{(a−r)t} is not integrable
//! and the untruncated equation has no finite solution; the solver then works
//! with the horizon-truncated equation and flags the result.

use crate::error::{Error, Result};
use crate::model::{integrated_gompertz, Model, PathNoise};
use crate::numerics::brent;

/// Weight below which the integrand is truncated.
pub const TRUNCATION_WEIGHT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GompertzConfig {
    pub n_paths: usize,
    /// Steps of the quadratically graded time grid t_k = T (k/n)².
    pub n_steps: usize,
    pub seed: u64,
    pub antithetic: bool,
}

impl Default for GompertzConfig {
    fn default() -> Self {
        GompertzConfig { n_paths: 4096, n_steps: 1000, seed: 20240917, antithetic: true }
    }
}

/// Log-spaced grid of mortality levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MGrid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl MGrid {
    pub fn nodes(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        crate::numerics::log_grid(self.lo, self.hi, self.n)
    }
}

/// Gompertz problem: market, preferences, earmark q and bequest B from the model;
/// `model.p.gompertz_a` is the growth rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GompertzProblem {
    pub model: Model,
    /// u(q) − u(l(q+B)) < 0.
    du: f64,
}

impl GompertzProblem {
    pub fn new(model: &Model) -> Result<Self> {
        let p = &model.p;
        if !(p.bequest_b > 0.0) {
            return Err(Error::Domain("the bequest B must be positive".into()));
        }
        if p.gamma > 1.0 && !(p.earmark_q > 0.0) {
            return Err(Error::Domain("gamma > 1 needs a positive earmark q".into()));
        }
        let du = model.u(p.earmark_q) - model.u(p.l * (p.earmark_q + p.bequest_b));
        if !(du < 0.0) {
            return Err(Error::DegenerateBoundary(format!(
                "u(q) - u(l(q+B)) = {du} is not negative: insurance never pays"
            )));
        }
        Ok(GompertzProblem { model: *model, du })
    }

    fn a(&self) -> f64 {
        self.model.p.gompertz_a
    }

    /// a ≥ r: the premium term is not integrable and the truncation horizon
    /// determines the answer.
    pub fn truncation_dominated(&self) -> bool {
        self.a() >= self.model.p.r
    }

    /// Horizon after which both weights fall below [`TRUNCATION_WEIGHT`].
    pub fn horizon(&self, m: f64) -> f64 {
        let p = &self.model.p;
        let target = -TRUNCATION_WEIGHT.ln();
        let survival = |t: f64| p.rho * t + integrated_gompertz(m, self.a(), 0.0, t) - target;
        let mut hi = 1.0;
        while survival(hi) < 0.0 {
            hi *= 2.0;
        }
        let t_surv = brent(survival, 0.0, hi, 1e-10, 200).unwrap_or(hi);
        if self.truncation_dominated() {
            t_surv
        } else {
            t_surv.max(target / (p.r - self.a()))
        }
    }

    /// Level reached by M over the survival horizon started at `m`.
    fn m_reach(&self, m: f64) -> f64 {
        let p = &self.model.p;
        let target = -TRUNCATION_WEIGHT.ln();
        let survival = |t: f64| p.rho * t + integrated_gompertz(m, self.a(), 0.0, t) - target;
        let mut hi = 1.0;
        while survival(hi) < 0.0 {
            hi *= 2.0;
        }
        let t = brent(survival, 0.0, hi, 1e-10, 200).unwrap_or(hi);
        m * (self.a() * t).exp()
    }

    /// Zero of the running gain: above it waiting accrues value.
    pub fn gain_zero(&self) -> f64 {
        -self.du / self.model.p.bequest_b
    }
}

/// Common Brownian paths on a graded time grid.
pub struct ResidualSampler {
    times: Vec<f64>,
    n_paths: usize,
    /// θ·W, path-major.
    tw: Vec<f64>,
    /// θ·W sorted across paths, time-major.
    sorted: Vec<f64>,
}

impl ResidualSampler {
    pub fn new(theta: f64, horizon: f64, cfg: &GompertzConfig) -> Result<Self> {
        if cfg.n_paths == 0 || cfg.n_steps == 0 || !(horizon > 0.0) {
            return Err(Error::Domain("sampler needs paths, steps and a positive horizon".into()));
        }
        if cfg.antithetic && cfg.n_paths % 2 == 1 {
            return Err(Error::Domain("antithetic sampling needs an even n_paths".into()));
        }
        let n = cfg.n_steps;
        let times: Vec<f64> = (0..=n).map(|k| horizon * (k as f64 / n as f64).powi(2)).collect();
        let nt = n + 1;
        let mut tw = Vec::with_capacity(cfg.n_paths * nt);
        for path in 0..cfg.n_paths {
            let mut noise = PathNoise::new(cfg.seed, path, cfg.antithetic);
            let mut w = 0.0;
            tw.push(0.0);
            for k in 1..nt {
                w += (times[k] - times[k - 1]).sqrt() * noise.normal();
                tw.push(theta * w);
            }
        }
        let mut sorted = vec![0.0; cfg.n_paths * nt];
        for k in 0..nt {
            let col = &mut sorted[k * cfg.n_paths..(k + 1) * cfg.n_paths];
            for (p, slot) in col.iter_mut().enumerate() {
                *slot = tw[p * nt + k];
            }
            col.sort_by(|a, b| a.total_cmp(b));
        }
        Ok(ResidualSampler { times, n_paths: cfg.n_paths, tw, sorted })
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    fn fraction_below(&self, k: usize, x: f64) -> f64 {
        let col = &self.sorted[k * self.n_paths..(k + 1) * self.n_paths];
        col.partition_point(|&v| v <= x) as f64 / self.n_paths as f64
    }
}

/// Residual estimate with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualEstimate {
    pub mean: f64,
    pub stderr: f64,
}

/// Per-time ingredients of the residual at one level m.
struct NodeTerms {
    /// Trapezoid weight × e^{−∫(ρ+M)} M_t (u(q) − u(l(q+B))).
    alpha: Vec<f64>,
    /// Trapezoid weight × B M_t e^{−rt}.
    beta: Vec<f64>,
    /// Deterministic part of ln Z_t − ln z under P.
    drift: Vec<f64>,
    m_path: Vec<f64>,
    half_theta2_t: Vec<f64>,
    last: usize,
}

fn node_terms(prob: &GompertzProblem, sampler: &ResidualSampler, m: f64) -> NodeTerms {
    let p = &prob.model.p;
    let a = prob.a();
    let theta = prob.model.dc.theta;
    let t_end = prob.horizon(m).min(sampler.horizon());
    let times = &sampler.times;
    let last = times.partition_point(|&t| t < t_end).min(times.len() - 1);
    let mut alpha = vec![0.0; last + 1];
    let mut beta = vec![0.0; last + 1];
    let mut drift = vec![0.0; last + 1];
    let mut m_path = vec![0.0; last + 1];
    let mut half_theta2_t = vec![0.0; last + 1];
    for k in 0..=last {
        let t = times[k];
        let w = match k {
            0 => 0.5 * (times[1] - times[0]),
            _ if k == last => 0.5 * (times[k] - times[k - 1]),
            _ => 0.5 * (times[k + 1] - times[k - 1]),
        };
        let im = integrated_gompertz(m, a, 0.0, t);
        let mt = m * (a * t).exp();
        alpha[k] = w * (-p.rho * t - im).exp() * mt * prob.du;
        beta[k] = w * p.bequest_b * mt * (-p.r * t).exp();
        drift[k] = (p.rho - p.r) * t + im;
        m_path[k] = mt;
        half_theta2_t[k] = 0.5 * theta * theta * t;
    }
    NodeTerms { alpha, beta, drift, m_path, half_theta2_t, last }
}

impl NodeTerms {
    /// Sample mean of the residual for start z and boundary `bf`. At t = 0 the
    /// start sits on the boundary and the indicator takes its limit ½.
    fn mean<F: Fn(f64) -> f64>(&self, sampler: &ResidualSampler, z: f64, bf: &F) -> f64 {
        let lz = z.ln();
        let mut acc = 0.5 * (self.alpha[0] + z * self.beta[0]);
        for k in 1..=self.last {
            let lb = bf(self.m_path[k]).ln();
            let base = lz + self.drift[k] - lb;
            let fp = sampler.fraction_below(k, base - self.half_theta2_t[k]);
            let fq = sampler.fraction_below(k, base + self.half_theta2_t[k]);
            acc += self.alpha[k] * fp + z * self.beta[k] * fq;
        }
        acc
    }

    fn estimate<F: Fn(f64) -> f64>(&self, sampler: &ResidualSampler, z: f64, bf: &F) -> ResidualEstimate {
        let nt = sampler.times.len();
        let lz = z.ln();
        let mut xp = vec![0.0; self.last + 1];
        let mut xq = vec![0.0; self.last + 1];
        for k in 1..=self.last {
            let base = lz + self.drift[k] - bf(self.m_path[k]).ln();
            xp[k] = base - self.half_theta2_t[k];
            xq[k] = base + self.half_theta2_t[k];
        }
        let head = 0.5 * (self.alpha[0] + z * self.beta[0]);
        let n = sampler.n_paths;
        let (mut s, mut s2) = (0.0, 0.0);
        for p in 0..n {
            let row = &sampler.tw[p * nt..p * nt + self.last + 1];
            let mut v = head;
            for k in 1..=self.last {
                if row[k] <= xp[k] {
                    v += self.alpha[k];
                }
                if row[k] <= xq[k] {
                    v += z * self.beta[k];
                }
            }
            s += v;
            s2 += v * v;
        }
        let mean = s / n as f64;
        let var = (s2 / n as f64 - mean * mean).max(0.0) * n as f64 / (n as f64 - 1.0).max(1.0);
        ResidualEstimate { mean, stderr: (var / n as f64).sqrt() }
    }
}

/// Boundary on a grid of mortality levels, piecewise linear in log m and
/// constant beyond the ends.
#[derive(Debug, Clone, PartialEq)]
pub struct MortalityBoundary {
    pub m_grid: Vec<f64>,
    pub b_values: Vec<f64>,
    /// Residual at the solution, per node.
    pub residuals: Vec<ResidualEstimate>,
    /// Residual standard error mapped to the boundary through the slope of
    /// the node equation.
    pub b_stderr: Vec<f64>,
    pub horizons: Vec<f64>,
    /// Full grid including levels above `m_grid` reached by M.
    pub ext_m: Vec<f64>,
    pub ext_b: Vec<f64>,
    pub truncation_dominated: bool,
}

/// Linear interpolation in log m, flat outside the grid.
pub fn interpolate(ms: &[f64], bs: &[f64], m: f64) -> f64 {
    let n = ms.len();
    if m <= ms[0] {
        return bs[0];
    }
    if m >= ms[n - 1] {
        return bs[n - 1];
    }
    let i = ms.partition_point(|&v| v <= m) - 1;
    let w = (m.ln() - ms[i].ln()) / (ms[i + 1].ln() - ms[i].ln());
    bs[i] + w * (bs[i + 1] - bs[i])
}

impl MortalityBoundary {
    pub fn b_at(&self, m: f64) -> f64 {
        interpolate(&self.ext_m, &self.ext_b, m)
    }

    /// Largest |Δb/Δ ln m| between adjacent nodes.
    pub fn lipschitz_estimate(&self) -> f64 {
        self.m_grid
            .windows(2)
            .zip(self.b_values.windows(2))
            .map(|(m, b)| ((b[1] - b[0]) / (m[1].ln() - m[0].ln())).abs())
            .fold(0.0, f64::max)
    }
}

/// Grid used by the solver: the requested nodes extended upward with the
/// same log spacing until the level M reaches over the survival horizon.
fn extended_grid(prob: &GompertzProblem, grid: &MGrid) -> Vec<f64> {
    let mut ms = grid.nodes();
    if prob.a() > 0.0 && ms.len() > 1 {
        let step = (ms[1] / ms[0]).ln();
        let top = prob.m_reach(grid.lo);
        while *ms.last().unwrap() < top {
            let next = ms.last().unwrap() * step.exp();
            ms.push(next);
        }
    }
    ms
}

/// Residual for an arbitrary candidate at level `m`, with Z started at `z`.
/// Candidates may be zero, in which case the indicator is always on.
pub fn boundary_residual(
    prob: &GompertzProblem,
    sampler: &ResidualSampler,
    cand_m: &[f64],
    cand_b: &[f64],
    m: f64,
    z: f64,
) -> ResidualEstimate {
    let terms = node_terms(prob, sampler, m);
    let bf = |mm: f64| interpolate(cand_m, cand_b, mm);
    terms.estimate(sampler, z, &bf)
}

/// Builds the common-path sampler long enough for every node of `grid`.
pub fn sampler_for(prob: &GompertzProblem, grid: &MGrid, cfg: &GompertzConfig) -> Result<ResidualSampler> {
    let horizon = extended_grid(prob, grid)
        .iter()
        .map(|&m| prob.horizon(m))
        .fold(0.0, f64::max);
    ResidualSampler::new(prob.model.dc.theta, horizon, cfg)
}

/// Solves for b^M on `grid` from the top node down.
pub fn solve_boundary(prob: &GompertzProblem, grid: &MGrid, cfg: &GompertzConfig) -> Result<MortalityBoundary> {
    if !(grid.lo > 0.0 && grid.hi >= grid.lo && grid.n >= 1) {
        return Err(Error::Domain("mortality grid needs 0 < lo <= hi and n >= 1".into()));
    }
    let sampler = sampler_for(prob, grid, cfg)?;
    solve_with_sampler(prob, grid, &sampler)
}

pub fn solve_with_sampler(
    prob: &GompertzProblem,
    grid: &MGrid,
    sampler: &ResidualSampler,
) -> Result<MortalityBoundary> {
    let ms = extended_grid(prob, grid);
    let n = ms.len();
    let mut bs = vec![f64::NAN; n];
    let mut residuals = vec![ResidualEstimate { mean: 0.0, stderr: 0.0 }; n];
    let mut b_stderr = vec![0.0; n];
    let mut guess = prob.gain_zero() * 0.5;
    for i in (0..n).rev() {
        let terms = node_terms(prob, sampler, ms[i]);
        let upper_m = &ms[i..];
        let above = bs[i..].to_vec();
        let g = |c: f64| {
            let mut local = above.clone();
            local[0] = c;
            let bf = |mm: f64| interpolate(upper_m, &local, mm);
            terms.mean(sampler, c, &bf)
        };
        let (lo, hi) = bracket(&g, guess)?;
        let root = brent(&g, lo, hi, lo * 1e-13, 300)?;
        let mut local = above.clone();
        local[0] = root;
        let bf = |mm: f64| interpolate(upper_m, &local, mm);
        residuals[i] = terms.estimate(sampler, root, &bf);
        let h = 1e-2 * root;
        let slope = (g(root + h) - g(root - h)) / (2.0 * h);
        b_stderr[i] = residuals[i].stderr / slope.abs();
        bs[i] = root;
        guess = root;
    }
    let k = grid.n.min(n);
    Ok(MortalityBoundary {
        m_grid: ms[..k].to_vec(),
        b_values: bs[..k].to_vec(),
        residuals: residuals[..k].to_vec(),
        b_stderr: b_stderr[..k].to_vec(),
        horizons: ms[..k].iter().map(|&m| prob.horizon(m)).collect(),
        ext_m: ms,
        ext_b: bs,
        truncation_dominated: prob.truncation_dominated(),
    })
}

/// Expands geometrically around `guess` until the node equation changes sign.
fn bracket<G: Fn(f64) -> f64>(g: &G, guess: f64) -> Result<(f64, f64)> {
    let mut lo = guess;
    let mut hi = guess;
    let g0 = g(guess);
    if g0 == 0.0 {
        return Ok((guess * (1.0 - 1e-12), guess * (1.0 + 1e-12)));
    }
    for _ in 0..200 {
        if g0 > 0.0 {
            lo *= 0.5;
            if g(lo) < 0.0 {
                return Ok((lo, lo * 2.0));
            }
        } else {
            hi *= 2.0;
            if g(hi) > 0.0 {
                return Ok((hi * 0.5, hi));
            }
        }
    }
    Err(Error::NoRoot("could not bracket the mortality-dependent boundary".into()))
}

/// Simulated (Z, M) paths: the model path simulator with the Gompertz rate in force.
pub fn simulate_zm(model: &Model, z0: f64, sim: &crate::model::SimConfig) -> Result<crate::model::PathBundle> {
    crate::model::simulate_paths(model, sim, z0)
}
