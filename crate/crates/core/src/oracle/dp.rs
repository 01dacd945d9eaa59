//! Discrete dynamic-programming oracle for the one-dimensional dual stopping
//! problems sup_η E[∫₀^η e^{−(ρ+m)s} g(Z_s) ds].
//!
//! log Z moves on a uniform lattice by a trinomial step matching the mean and
//! variance of the exact increment over dt. The stationary Bellman equation
//! V = max(0, g·dt + e^{−(ρ+m)dt} P V) is a linear complementarity problem with
//! a tridiagonal M-matrix. Its solution is the fixed point that value iteration
//! converges to; it is computed directly by the Brennan–Schwartz sweep, which
//! is exact when the stopping region lies below the continuation region.

use crate::error::{Error, Result};
use crate::model::Model;

/// Lattice specification: `n_nodes` log-spaced points on
/// [center·e^{−below}, center·e^{above}].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpSpec {
    pub center: f64,
    pub below: f64,
    pub above: f64,
    pub n_nodes: usize,
    pub dt: f64,
}

impl DpSpec {
    pub fn around(center: f64, n_nodes: usize, dt: f64) -> Self {
        DpSpec { center, below: 5.0, above: 3.0, n_nodes, dt }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DpGrid {
    pub z_grid: Vec<f64>,
    pub dt: f64,
    pub value: Vec<f64>,
    /// Largest grid z with value 0 that lies below every positive value.
    pub boundary: Option<f64>,
    /// Boundary from extrapolating √V linearly to zero across the first two
    /// positive nodes, which uses the quadratic contact of smooth fit.
    pub boundary_refined: Option<f64>,
}

impl DpGrid {
    pub fn max_abs_value(&self) -> f64 {
        self.value.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

pub fn dp_dual_oracle<G: Fn(f64) -> f64>(model: &Model, spec: &DpSpec, gain: G) -> Result<DpGrid> {
    let p = &model.p;
    if spec.n_nodes < 4 || !(spec.dt > 0.0) || !(spec.center > 0.0) || !(spec.below + spec.above > 0.0) {
        return Err(Error::Domain("DP lattice needs >= 4 nodes, dt > 0 and a positive centre".into()));
    }
    let beta = model.dc.beta;
    if !(beta > 0.0) {
        return Err(Error::Domain("discount rate rho + m must be positive".into()));
    }
    let theta = model.dc.theta;
    let n = spec.n_nodes;
    let lo = spec.center.ln() - spec.below;
    let dx = (spec.below + spec.above) / (n - 1) as f64;
    let z: Vec<f64> = (0..n).map(|i| (lo + i as f64 * dx).exp()).collect();

    let dt = spec.dt;
    let nu = p.rho + p.m - p.r - 0.5 * theta * theta;
    let second = (theta * theta * dt + nu * nu * dt * dt) / (dx * dx);
    let first = nu * dt / dx;
    let (pu, pd) = (0.5 * (second + first), 0.5 * (second - first));
    let pm = 1.0 - pu - pd;
    let disc = (-beta * dt).exp();
    // Row i: lower·V_{i−1} + diag·V_i + upper·V_{i+1} = g_i dt.
    let (lower, diag, upper) = (-disc * pd, 1.0 - disc * pm, -disc * pu);
    let rhs: Vec<f64> = z.iter().map(|&zi| gain(zi) * dt).collect();
    if rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("gain is not finite on the lattice".into()));
    }

    // Top node: linear extrapolation in z when the gain there is positive
    // (continuation region, asymptotically affine value), else V ∝ z. The
    // affine row is not diagonally dominant, so it is only used where the
    // projection never binds.
    let ratio = dx.exp();
    let top = n - 2;
    let affine = rhs[n - 1] > 0.0;
    let mut d = vec![0.0; n];
    let mut r = vec![0.0; n];
    let mut low = vec![lower; n];
    if affine {
        d[top] = diag + upper * (1.0 + ratio);
        low[top] = lower - upper * ratio;
    } else {
        d[top] = diag + upper * ratio;
    }
    r[top] = rhs[top];
    for i in (1..top).rev() {
        let f = upper / d[i + 1];
        d[i] = diag - f * low[i + 1];
        r[i] = rhs[i] - f * r[i + 1];
    }
    if d[1..=top].iter().any(|v| !(v.abs() > 0.0) || !v.is_finite()) {
        return Err(Error::NoConvergence { iters: 0, movement: f64::NAN });
    }
    let mut v = vec![0.0; n];
    for i in 1..=top {
        v[i] = ((r[i] - low[i] * v[i - 1]) / d[i]).max(0.0);
    }
    v[n - 1] = if affine { v[n - 2] + (v[n - 2] - v[n - 3]) * ratio } else { v[n - 2] * ratio };

    let first_pos = v.iter().position(|&x| x > 0.0);
    let (boundary, boundary_refined) = match first_pos {
        Some(k) if k >= 1 && k + 1 < n => {
            let (s1, s2) = (v[k].sqrt(), v[k + 1].sqrt());
            let refined = z[k] - s1 * (z[k + 1] - z[k]) / (s2 - s1);
            (Some(z[k - 1]), Some(refined.max(z[k - 1]).min(z[k])))
        }
        _ => (None, None),
    };
    Ok(DpGrid { z_grid: z, dt, value: v, boundary, boundary_refined })
}
