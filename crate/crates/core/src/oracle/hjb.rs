//! Residuals of the dual variational inequalities evaluated with the analytic
//! derivatives of the closed forms:
//!
//! max{ ½θ²z²w'' + (ρ+m−r)z w' − (ρ+m)w + g(z), −w } = 0.

use crate::earmarked::{EarmarkedControlledSolution, EarmarkedPredeterminedSolution};
use crate::error::Result;
use crate::model::Model;
use crate::numerics::log_grid;
use crate::predetermined::PredeterminedSolution;

/// Grid points kept at least a relative 1e−6 away from every boundary.
const EXCLUSION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HjbReport {
    /// Largest |generator residual| where continuation holds.
    pub pde_residual: f64,
    /// Largest positive gain in the stopping region (must be ≤ 0).
    pub obstacle_violation: f64,
    /// Most negative value in the continuation region (must be ≥ 0).
    pub negativity: f64,
    pub points: usize,
}

impl HjbReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.pde_residual < tol && self.obstacle_violation <= 0.0 && self.negativity >= -tol
    }
}

fn generator(model: &Model, z: f64, w: f64, wz: f64, wzz: f64) -> f64 {
    let th = model.dc.theta;
    0.5 * th * th * z * z * wzz + (model.dc.beta - model.p.r) * z * wz - model.dc.beta * w
}

fn near(z: f64, edges: &[f64]) -> bool {
    edges.iter().any(|&e| (z / e - 1.0).abs() < EXCLUSION)
}

/// Sweeps `zs`; `cont(z)` says whether z is in the continuation region and
/// `eval(z)` returns (w, w', w'', g).
fn sweep<C, E>(model: &Model, zs: &[f64], edges: &[f64], cont: C, eval: E) -> HjbReport
where
    C: Fn(f64) -> bool,
    E: Fn(f64) -> (f64, f64, f64, f64),
{
    let mut rep = HjbReport { pde_residual: 0.0, obstacle_violation: f64::NEG_INFINITY, negativity: 0.0, points: 0 };
    for &z in zs {
        if near(z, edges) {
            continue;
        }
        rep.points += 1;
        let (w, wz, wzz, g) = eval(z);
        if cont(z) {
            let res = generator(model, z, w, wz, wzz) + g;
            rep.pde_residual = rep.pde_residual.max(res.abs());
            rep.negativity = rep.negativity.min(w);
        } else {
            rep.obstacle_violation = rep.obstacle_violation.max(g);
        }
    }
    rep
}

/// Predetermined bequest on `n` log points over [b/100, 100b].
pub fn hjb_predetermined(sol: &PredeterminedSolution, n: usize) -> Option<HjbReport> {
    let b = sol.b()?;
    let model = &sol.model;
    let p = &model.p;
    let h = model.dc.h;
    let ubeq = model.u(p.l * p.bequest_b);
    let zs = log_grid(b * 1e-2, b * 1e2, n);
    Some(sweep(model, &zs, &[b], |z| z > b, |z| {
        (sol.w_hat(z), sol.w_hat_z(z), sol.w_hat_zz(z), h * z - p.m * ubeq)
    }))
}

/// Earmarked inheritance with a fixed bequest.
pub fn hjb_earmarked_predetermined(sol: &EarmarkedPredeterminedSolution, n: usize) -> HjbReport {
    let b = sol.b_bar;
    let zs = log_grid(b * 1e-2, b * 1e2, n);
    sweep(&sol.model, &zs, &[b], |z| z > b, |z| (sol.w(z), sol.w_z(z), sol.w_zz(z), sol.gain_rate(z)))
}

/// Earmarked inheritance with a chosen bequest: the running gain is
/// m u(q) − K C z^{(γ−1)/γ} below L̄ and m u(q) − m u(lq) above.
pub fn hjb_earmarked_controlled(sol: &EarmarkedControlledSolution, n: usize) -> Result<HjbReport> {
    let model = &sol.model;
    let p = &model.p;
    let pw = (p.gamma - 1.0) / p.gamma;
    let (b, l) = (sol.b_tilde, sol.l_bar);
    let gain = |z: f64| {
        if z < l {
            p.m * model.u(sol.q) - model.dc.k * sol.c * z.powf(pw)
        } else {
            p.m * model.u(sol.q) - p.m * model.u(p.l * sol.q)
        }
    };
    sol.tilde_w(b)?;
    let zs = log_grid(b * 1e-2, l * 1e2, n);
    Ok(sweep(model, &zs, &[b, l], |z| z > b, |z| {
        (
            sol.tilde_w(z).unwrap_or(f64::NAN),
            sol.tilde_w_z(z).unwrap_or(f64::NAN),
            sol.tilde_w_zz(z).unwrap_or(f64::NAN),
            gain(z),
        )
    }))
}
