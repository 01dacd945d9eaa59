//! Fixed bequest B bought at an optimal time: dual free boundary b, the dual
//! gain function ŵ, the dual value v, its primal inversion and the feedback
//! rules for consumption, investment and purchase.
//!
//! Write p = (γ−1)/γ and N = x + y/κ − h/r. The dual value splits as
//! v(z, y) = ŵ(z) + γ z^p/((1−γ)K) + z y/κ − h z/r + m u(lB)/(ρ+m), with ŵ = 0
//! on the stopping region z ≤ b.

use crate::error::{Error, Result};
use crate::model::Model;
use crate::numerics::newton_bracketed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Continue,
    Stop,
}

impl Region {
    pub fn label(&self) -> &'static str {
        match self {
            Region::Continue => "continue",
            Region::Stop => "stop",
        }
    }
}

/// Feedback decision at a primal state (x, y).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyDecision {
    pub region: Region,
    pub consumption: f64,
    /// Amount held in the risky asset.
    pub investment: f64,
    pub z_star: f64,
    pub bequest: f64,
}

/// Dual boundary and the coefficient of z^{α₁} on the continuation region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeBoundary {
    pub b: f64,
    pub c1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredeterminedSolution {
    pub model: Model,
    /// `None` when γ > 1: purchase is immediate.
    pub boundary: Option<FreeBoundary>,
}

/// Closed-form boundary for the fixed bequest `model.p.bequest_b`.
pub fn solve(model: &Model) -> Result<PredeterminedSolution> {
    model.require_integrable()?;
    let p = &model.p;
    if !(p.bequest_b > 0.0) {
        return Err(Error::Domain("the predetermined bequest must be positive".into()));
    }
    if p.gamma > 1.0 {
        return Ok(PredeterminedSolution { model: *model, boundary: None });
    }
    let dc = &model.dc;
    if dc.beta <= p.r {
        return Err(Error::NeedsRhoPlusMGreaterR);
    }
    let (a1, h, r) = (dc.alpha1, dc.h, p.r);
    let b = p.m * model.u(p.l * p.bequest_b) * r * a1 / (dc.beta * h * (a1 - 1.0));
    let c1 = -(h / (r * a1)) * b.powf(1.0 - a1);
    Ok(PredeterminedSolution { model: *model, boundary: Some(FreeBoundary { b, c1 }) })
}

impl PredeterminedSolution {
    pub fn immediate_purchase(&self) -> bool {
        self.boundary.is_none()
    }

    pub fn b(&self) -> Option<f64> {
        self.boundary.map(|f| f.b)
    }

    /// m·u(lB)/(ρ+m): capitalised bequest utility once insured.
    pub fn bequest_flow(&self) -> f64 {
        let p = &self.model.p;
        p.m * self.model.u(p.l * p.bequest_b) / self.model.dc.beta
    }

    fn h_over_r(&self) -> f64 {
        self.model.dc.h / self.model.p.r
    }

    /// Same boundary rescaled by `factor` with C₁ re-fitted to the derivative
    /// condition only. Breaks value matching; used as a negative control.
    #[doc(hidden)]
    pub fn with_scaled_boundary(&self, factor: f64) -> Self {
        let mut out = *self;
        if let Some(fb) = out.boundary.as_mut() {
            let a1 = self.model.dc.alpha1;
            fb.b *= factor;
            fb.c1 = -(self.h_over_r() / a1) * fb.b.powf(1.0 - a1);
        }
        out
    }

    /// Value and slope of the continuation branch of ŵ at b, both zero under
    /// smooth fit.
    pub fn pasting_residuals(&self) -> Option<[f64; 2]> {
        let fb = self.boundary?;
        let a1 = self.model.dc.alpha1;
        Some([
            fb.c1 * fb.b.powf(a1) + self.h_over_r() * fb.b - self.bequest_flow(),
            fb.c1 * a1 * fb.b.powf(a1 - 1.0) + self.h_over_r(),
        ])
    }

    /// Dual gain ŵ(z) of waiting.
    pub fn w_hat(&self, z: f64) -> f64 {
        match self.boundary {
            Some(fb) if z > fb.b => {
                fb.c1 * z.powf(self.model.dc.alpha1) + self.h_over_r() * z - self.bequest_flow()
            }
            _ => 0.0,
        }
    }

    pub fn w_hat_z(&self, z: f64) -> f64 {
        match self.boundary {
            Some(fb) if z > fb.b => {
                let a1 = self.model.dc.alpha1;
                fb.c1 * a1 * z.powf(a1 - 1.0) + self.h_over_r()
            }
            _ => 0.0,
        }
    }

    pub fn w_hat_zz(&self, z: f64) -> f64 {
        match self.boundary {
            Some(fb) if z > fb.b => {
                let a1 = self.model.dc.alpha1;
                fb.c1 * a1 * (a1 - 1.0) * z.powf(a1 - 2.0)
            }
            _ => 0.0,
        }
    }

    /// Dual value v(z, y).
    pub fn dual_v(&self, z: f64, y: f64) -> f64 {
        let (g, k) = (self.model.p.gamma, self.model.dc.k);
        self.w_hat(z) + g * z.powf((g - 1.0) / g) / ((1.0 - g) * k) + z * self.model.human_capital(y)
            - self.h_over_r() * z
            + self.bequest_flow()
    }

    pub fn dual_v_z(&self, z: f64, y: f64) -> f64 {
        let (g, k) = (self.model.p.gamma, self.model.dc.k);
        self.w_hat_z(z) - z.powf(-1.0 / g) / k + self.model.human_capital(y) - self.h_over_r()
    }

    pub fn dual_v_zz(&self, z: f64) -> f64 {
        let (g, k) = (self.model.p.gamma, self.model.dc.k);
        self.w_hat_zz(z) + z.powf(-1.0 / g - 1.0) / (g * k)
    }

    /// Total wealth x + y/κ at which the agent buys: b^{−1/γ}/K + h/r.
    pub fn wealth_threshold(&self) -> Option<f64> {
        let (g, k) = (self.model.p.gamma, self.model.dc.k);
        self.boundary.map(|fb| fb.b.powf(-1.0 / g) / k + self.h_over_r())
    }

    /// Primal purchase boundary b̂(y) in wealth.
    pub fn primal_boundary(&self, y: f64) -> Result<f64> {
        self.wealth_threshold()
            .map(|t| t - self.model.human_capital(y))
            .ok_or(Error::ImmediatePurchase)
    }

    fn region(&self, x: f64, y: f64) -> Region {
        match self.wealth_threshold() {
            Some(t) if x + self.model.human_capital(y) < t => Region::Continue,
            _ => Region::Stop,
        }
    }

    fn check_domain(&self, x: f64, y: f64) -> Result<f64> {
        let total = x + self.model.human_capital(y);
        if !(total > 0.0) || !(y > 0.0) {
            return Err(Error::Domain(format!("need x > -y/kappa and y > 0, got x = {x}, y = {y}")));
        }
        Ok(total)
    }

    /// Root in s = ln z of C₁α₁z^{α₁−1} − z^{−1/γ}/K + `total` = 0, which is
    /// increasing and concave in s. Newton from any point converges; iterates
    /// are clamped at the analytic lower bound −γ ln(K·total).
    pub fn continuation_root(&self, total: f64, guess: Option<f64>) -> Result<f64> {
        let fb = self.boundary.ok_or(Error::ImmediatePurchase)?;
        let (g, k, a1) = (self.model.p.gamma, self.model.dc.k, self.model.dc.alpha1);
        if !(total > 0.0) {
            return Err(Error::Domain(format!("total wealth {total} must be positive")));
        }
        let s_lo = -g * (k * total).ln();
        let ca = fb.c1 * a1;
        let mut s = guess.map(|z| z.ln()).unwrap_or(s_lo).max(s_lo);
        for _ in 0..200 {
            let e1 = ((a1 - 1.0) * s).exp();
            let e2 = (-s / g).exp();
            let f = ca * e1 - e2 / k + total;
            let df = ca * (a1 - 1.0) * e1 + e2 / (g * k);
            let step = f / df;
            s = (s - step).max(s_lo);
            // Quadratic convergence: the error after this step is O(step²).
            if step.abs() < 1e-9 * s.abs().max(1.0) {
                return Ok(s.exp());
            }
        }
        Err(Error::NoRoot(format!("continuation shadow price for total wealth {total}")))
    }

    /// Shadow price z*(x, y) solving v_z(z, y) = −x.
    pub fn z_star(&self, x: f64, y: f64) -> Result<f64> {
        let total = self.check_domain(x, y)?;
        let (g, k) = (self.model.p.gamma, self.model.dc.k);
        match (self.region(x, y), self.boundary) {
            (Region::Continue, Some(fb)) => {
                let a1 = self.model.dc.alpha1;
                let ca = fb.c1 * a1;
                let fdf = |s: f64| {
                    let e1 = ((a1 - 1.0) * s).exp();
                    let e2 = (-s / g).exp();
                    (ca * e1 - e2 / k + total, ca * (a1 - 1.0) * e1 + e2 / (g * k))
                };
                // f < 0 at the analytic lower bound since C₁α₁ < 0.
                let lo = -g * (k * total).ln();
                let mut hi = lo + 1.0;
                let mut grow = 1.0;
                while fdf(hi).0 <= 0.0 {
                    grow *= 2.0;
                    hi = lo + grow;
                    if grow > 1e4 {
                        return Err(Error::NoRoot("could not bracket the shadow price".into()));
                    }
                }
                newton_bracketed(fdf, lo, hi, 0.5 * (lo + hi), 1e-13, 200).map(f64::exp)
            }
            _ => {
                let net = total - self.h_over_r();
                if !(net > 0.0) {
                    return Err(Error::AdmissibilityViolated(format!(
                        "x + y/kappa - h/r = {net} is not positive"
                    )));
                }
                Ok((net * k).powf(-g))
            }
        }
    }

    /// Optimal lifetime utility V(x, y).
    pub fn value(&self, x: f64, y: f64) -> Result<f64> {
        let z = self.z_star(x, y)?;
        Ok(self.dual_v(z, y) + z * x)
    }

    /// Feedback policy at (x, y).
    pub fn policy(&self, x: f64, y: f64) -> Result<PolicyDecision> {
        let z = self.z_star(x, y)?;
        let region = self.region(x, y);
        let (c, pi) = self.policy_at(z, y);
        Ok(PolicyDecision {
            region,
            consumption: c,
            investment: pi,
            z_star: z,
            bequest: self.model.p.bequest_b,
        })
    }

    /// Consumption z^{−1/γ} and investment [θ z v_zz − σ_y y/κ]/σ at shadow price z.
    pub fn policy_at(&self, z: f64, y: f64) -> (f64, f64) {
        let p = &self.model.p;
        let c = z.powf(-1.0 / p.gamma);
        let pi = (self.model.dc.theta * z * self.dual_v_zz(z) - p.sigma_y * self.model.human_capital(y))
            / p.sigma;
        (c, pi)
    }
}
