//! Feedback rules built from the closed-form solutions, plus suboptimal
//! variants used as comparisons.

use crate::controlled::ControlledSolution;
use crate::error::Result;
use crate::model::Model;
use crate::oracle::mc::{Action, FeedbackRule};
use crate::predetermined::PredeterminedSolution;

/// Merton consumption and investment on net wealth once insured (or never).
fn merton(model: &Model, x: f64, y: f64, bequest: f64) -> Result<Action> {
    let (c, pi) = model.post_purchase_policy(x, y, bequest)?;
    Ok(Action { consumption: c, investment: pi, purchase: None })
}

/// Continuation feedback of `sol` with purchase once total wealth reaches
/// the threshold implied by the dual boundary `b`.
fn threshold_rule(
    sol: &PredeterminedSolution,
    dual_boundary: Option<f64>,
    x: f64,
    y: f64,
    insured: Option<f64>,
    warm: &mut f64,
) -> Result<Action> {
    let model = &sol.model;
    if let Some(b) = insured {
        return merton(model, x, y, b);
    }
    let total = x + model.human_capital(y);
    let buy = match dual_boundary {
        None => true,
        Some(b) => {
            let threshold = b.powf(-1.0 / model.p.gamma) / model.dc.k + model.dc.h / model.p.r;
            total >= threshold
        }
    };
    if buy {
        return Ok(Action { purchase: Some(model.p.bequest_b), ..merton(model, x, y, model.p.bequest_b)? });
    }
    let guess = if warm.is_finite() { Some(*warm) } else { None };
    let z = sol.continuation_root(total, guess)?;
    *warm = z;
    let (c, pi) = sol.policy_at(z, y);
    Ok(Action { consumption: c, investment: pi, purchase: None })
}

/// Optimal policy with a fixed bequest.
pub struct OptimalPredetermined(pub PredeterminedSolution);

impl FeedbackRule for OptimalPredetermined {
    fn act(&self, _t: f64, x: f64, y: f64, insured: Option<f64>, warm: &mut f64) -> Result<Action> {
        threshold_rule(&self.0, self.0.b(), x, y, insured, warm)
    }
}

/// Optimal continuation policy with the dual purchase boundary scaled by `factor`.
pub struct ShiftedThreshold {
    pub solution: PredeterminedSolution,
    pub factor: f64,
}

impl FeedbackRule for ShiftedThreshold {
    fn act(&self, _t: f64, x: f64, y: f64, insured: Option<f64>, warm: &mut f64) -> Result<Action> {
        let b = self.solution.b().map(|b| b * self.factor);
        threshold_rule(&self.solution, b, x, y, insured, warm)
    }
}

/// Best policy among those that never insure: Merton on x + y/κ.
pub struct NeverPurchase(pub Model);

impl FeedbackRule for NeverPurchase {
    fn act(&self, _t: f64, x: f64, y: f64, _insured: Option<f64>, _warm: &mut f64) -> Result<Action> {
        merton(&self.0, x, y, 0.0)
    }
}

/// Immediate purchase of the optimal bequest, then Merton.
pub struct OptimalControlled(pub ControlledSolution);

impl FeedbackRule for OptimalControlled {
    fn act(&self, _t: f64, x: f64, y: f64, insured: Option<f64>, _warm: &mut f64) -> Result<Action> {
        let model = &self.0.model;
        match insured {
            Some(b) => merton(model, x, y, b),
            None => {
                let d = self.0.policy(x, y)?;
                Ok(Action { purchase: Some(d.bequest), ..merton(model, x, y, d.bequest)? })
            }
        }
    }
}

/// Fixed-proportion consumption c = ε·(x + y/κ) with no risky position beyond
/// the income hedge and no insurance.
pub struct ProportionalConsumption {
    pub model: Model,
    pub rate: f64,
}

impl FeedbackRule for ProportionalConsumption {
    fn act(&self, _t: f64, x: f64, y: f64, _insured: Option<f64>, _warm: &mut f64) -> Result<Action> {
        let p = &self.model.p;
        let hc = self.model.human_capital(y);
        Ok(Action {
            consumption: self.rate * (x + hc),
            investment: -p.sigma_y * hc / p.sigma,
            purchase: None,
        })
    }
}
