//! Suboptimality of shifted purchase thresholds and of never insuring.

use crate::error::{Error, Result};
use crate::model::SimConfig;
use crate::oracle::mc::{mc_value, paired_difference, McEstimate, McReport};
use crate::oracle::rules::{NeverPurchase, OptimalPredetermined, ShiftedThreshold};
use crate::predetermined::PredeterminedSolution;

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub label: String,
    pub estimate: McEstimate,
    /// Paired mean and stderr of (alternative − optimal).
    pub difference: (f64, f64),
}

impl Comparison {
    /// Not better than optimal beyond three standard errors.
    pub fn not_better(&self) -> bool {
        self.difference.0 <= 3.0 * self.difference.1
    }

    /// Worse than optimal beyond three standard errors.
    pub fn strictly_worse(&self) -> bool {
        self.difference.0 < -3.0 * self.difference.1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationReport {
    pub optimal: McEstimate,
    pub alternatives: Vec<Comparison>,
}

impl PerturbationReport {
    pub fn passed(&self) -> bool {
        self.alternatives.iter().all(Comparison::not_better)
    }
}

/// Values the optimal rule, the rules with boundary b·(1 ± s) for each shift,
/// and the best never-insure rule on common paths.
pub fn perturbation_test(
    sol: &PredeterminedSolution,
    x: f64,
    y: f64,
    shifts: &[f64],
    sim: &SimConfig,
) -> Result<PerturbationReport> {
    if sol.immediate_purchase() {
        return Err(Error::UnsupportedRegime("perturbation test needs a purchase boundary".into()));
    }
    let optimal = mc_value(&OptimalPredetermined(*sol), &sol.model, x, y, sim)?;
    perturbation_against(sol, &optimal, x, y, shifts, sim)
}

/// As [`perturbation_test`], reusing an optimal-rule run made with the same
/// `sim` at the same (x, y).
pub fn perturbation_against(
    sol: &PredeterminedSolution,
    optimal: &McReport,
    x: f64,
    y: f64,
    shifts: &[f64],
    sim: &SimConfig,
) -> Result<PerturbationReport> {
    if sol.immediate_purchase() {
        return Err(Error::UnsupportedRegime("perturbation test needs a purchase boundary".into()));
    }
    if optimal.samples.len() != sim.n_paths {
        return Err(Error::Domain("optimal run does not match the simulation settings".into()));
    }
    let model = &sol.model;
    let mut alternatives = Vec::new();
    let mut compare = |label: String, report: McReport| {
        alternatives.push(Comparison {
            label,
            estimate: report.value,
            difference: paired_difference(&report, optimal, sim.antithetic),
        });
    };
    for &s in shifts {
        for factor in [1.0 + s, 1.0 - s] {
            if factor <= 0.0 {
                return Err(Error::Domain(format!("shift {s} leaves no boundary")));
            }
            let rule = ShiftedThreshold { solution: *sol, factor };
            compare(format!("b*{factor}"), mc_value(&rule, model, x, y, sim)?);
        }
    }
    compare("never".into(), mc_value(&NeverPurchase(*model), model, x, y, sim)?);
    Ok(PerturbationReport { optimal: optimal.value, alternatives })
}
