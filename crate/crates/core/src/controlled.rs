//! Bequest amount chosen at purchase. Buying immediately is optimal, so the
//! solution is a single shadow price z* = [(x + y/κ)/D]^{−γ} with
//! D = 1/K + m(lr)^{(1−γ)/γ}(ρ+m)^{−1/γ}.

use crate::error::{Error, Result};
use crate::model::Model;
use crate::predetermined::{PolicyDecision, Region};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlledSolution {
    pub model: Model,
    pub d: f64,
    /// Multiplier D^γ of (y/κ + x)^{1−γ}/(1−γ) in the value function.
    pub value_coefficient: f64,
    /// Coefficient C of z^{(γ−1)/γ} in ū(z).
    pub c: f64,
}

pub fn solve(model: &Model) -> Result<ControlledSolution> {
    model.require_integrable()?;
    let p = &model.p;
    let g = p.gamma;
    let beta = model.dc.beta;
    let d = 1.0 / model.dc.k + p.m * (p.l * p.r).powf((1.0 - g) / g) * beta.powf(-1.0 / g);
    let c = p.m * p.l.powf((1.0 - g) / g) * (g / (1.0 - g)) * p.r.powf((1.0 - g) / g) * beta.powf(-1.0 / g);
    Ok(ControlledSolution { model: *model, d, value_coefficient: d.powf(g), c })
}

impl ControlledSolution {
    /// ū(z) = max_B [m u(lB)/(ρ+m) − z m B/r].
    pub fn bar_u(&self, z: f64) -> f64 {
        let g = self.model.p.gamma;
        self.c * z.powf((g - 1.0) / g)
    }

    /// Maximiser B₀*(z) = [z(ρ+m)/r]^{−1/γ} l^{(1−γ)/γ}.
    pub fn bequest_star(&self, z: f64) -> f64 {
        let p = &self.model.p;
        let g = p.gamma;
        (z * self.model.dc.beta / p.r).powf(-1.0 / g) * p.l.powf((1.0 - g) / g)
    }

    fn total(&self, x: f64, y: f64) -> Result<f64> {
        let total = x + self.model.human_capital(y);
        if !(total > 0.0) || !(y > 0.0) {
            return Err(Error::Domain(format!("need x > -y/kappa and y > 0, got x = {x}, y = {y}")));
        }
        Ok(total)
    }

    pub fn z_star(&self, x: f64, y: f64) -> Result<f64> {
        Ok((self.total(x, y)? / self.d).powf(-self.model.p.gamma))
    }

    pub fn value(&self, x: f64, y: f64) -> Result<f64> {
        let g = self.model.p.gamma;
        Ok(self.value_coefficient * self.total(x, y)?.powf(1.0 - g) / (1.0 - g))
    }

    /// Buy now with bequest B₀*, consume (x + y/κ)/D and invest
    /// c θ/(γKσ) − σ_y y/(κσ).
    pub fn policy(&self, x: f64, y: f64) -> Result<PolicyDecision> {
        let p = &self.model.p;
        let total = self.total(x, y)?;
        let c = total / self.d;
        let pi = c * self.model.dc.theta / (p.gamma * self.model.dc.k * p.sigma)
            - p.sigma_y * self.model.human_capital(y) / p.sigma;
        let bequest = c * (self.model.dc.beta / p.r).powf(-1.0 / p.gamma) * p.l.powf((1.0 - p.gamma) / p.gamma);
        Ok(PolicyDecision {
            region: Region::Stop,
            consumption: c,
            investment: pi,
            z_star: c.powf(-p.gamma),
            bequest,
        })
    }
}
