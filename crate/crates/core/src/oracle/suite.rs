//! The verification suite: each band compares a closed form with an
//! independent computation and records pass or fail with the numbers.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::controlled::{self, ControlledSolution};
use crate::earmarked::earmarked_boundary;
use crate::error::Result;
use crate::format::sig;
use crate::model::{Model, SimConfig};
use crate::oracle::dp::{dp_dual_oracle, DpSpec};
use crate::oracle::duality::duality_gap;
use crate::oracle::hjb::hjb_predetermined;
use crate::oracle::mc::{mc_value, McReport};
use crate::oracle::perturbation::{perturbation_against, perturbation_test};
use crate::oracle::rules::{OptimalControlled, OptimalPredetermined};
use crate::predetermined::{self, PredeterminedSolution};

#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Band {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Band { name: name.into(), passed, detail }
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub bands: Vec<Band>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.bands.iter().all(|b| b.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bands {
            writeln!(f, "{b}")?;
        }
        let failed = self.bands.iter().filter(|b| !b.passed).count();
        writeln!(f, "{} bands, {} failed", self.bands.len(), failed)
    }
}

fn s(v: f64) -> String {
    sig(v, 6)
}

/// Points (x, y) on both sides of the purchase threshold at y = 1 and above.
pub fn mc_points(sol: &PredeterminedSolution) -> Vec<(f64, f64)> {
    let y_hc = sol.model.human_capital(1.0);
    match sol.wealth_threshold() {
        Some(t) => vec![
            (1.0, 1.0),
            (0.25 * t - y_hc, 1.0),
            (0.9 * t - y_hc, 1.0),
            (1.15 * t - y_hc, 1.0),
            (2.0 * t - 2.0 * y_hc, 2.0),
        ],
        None => vec![(1.0, 1.0), (50.0, 1.0), (150.0, 1.0), (300.0, 1.0), (500.0, 2.0)],
    }
}

pub fn band_smooth_fit(sol: &PredeterminedSolution) -> Band {
    match sol.pasting_residuals() {
        Some([v, d]) => {
            let worst = v.abs().max(d.abs());
            Band::new("smooth_fit", worst < 1e-9, format!("|w(b)| = {}, |w'(b)| = {}", s(v.abs()), s(d.abs())))
        }
        None => Band::new("smooth_fit", true, "immediate purchase, no boundary".into()),
    }
}

pub fn band_hjb(sol: &PredeterminedSolution) -> Band {
    match hjb_predetermined(sol, 4000) {
        Some(r) => Band::new(
            "hjb_residual",
            r.passed(1e-8),
            format!(
                "max residual {}, max stopping gain {}, min continuation value {}",
                s(r.pde_residual),
                s(r.obstacle_violation),
                s(r.negativity)
            ),
        ),
        None => Band::new("hjb_residual", true, "immediate purchase, no boundary".into()),
    }
}

/// Lattice boundary against the closed form at dt = 1/250 and 600 nodes.
pub fn band_dp_predetermined(sol: &PredeterminedSolution) -> Result<Band> {
    let Some(b) = sol.b() else {
        return Ok(Band::new("dp_boundary", true, "immediate purchase, no boundary".into()));
    };
    let m = &sol.model;
    let ubeq = m.u(m.p.l * m.p.bequest_b);
    let z0 = m.p.m * ubeq / m.dc.h;
    let g = dp_dual_oracle(m, &DpSpec::around(z0, 600, 1.0 / 250.0), |z| m.dc.h * z - m.p.m * ubeq)?;
    let est = g.boundary.unwrap_or(f64::NAN);
    let rel = (est / b - 1.0).abs();
    Ok(Band::new("dp_boundary", rel < 0.02, format!("lattice {} vs closed form {} (rel {})", s(est), s(b), s(rel))))
}

pub fn band_dp_earmarked(model: &Model, q: f64) -> Result<Band> {
    let e = earmarked_boundary(model, q, model.p.bequest_b)?;
    let z0 = e.gain * model.dc.beta / (model.p.m * e.bequest);
    let g = dp_dual_oracle(model, &DpSpec::around(z0, 600, 1.0 / 250.0), |z| e.gain_rate(z))?;
    let est = g.boundary.unwrap_or(f64::NAN);
    let rel = (est / e.b_bar - 1.0).abs();
    Ok(Band::new(
        "dp_boundary_earmarked",
        rel < 0.02,
        format!("lattice {} vs closed form {} (rel {})", s(est), s(e.b_bar), s(rel)),
    ))
}

/// With the gain −K ū(z) < 0 the lattice value must vanish everywhere.
pub fn band_dp_controlled(sol: &ControlledSolution) -> Result<Band> {
    let m = &sol.model;
    let dt = 1.0 / 250.0;
    let g = dp_dual_oracle(m, &DpSpec::around(1.0, 600, dt), |z| -m.dc.k * sol.bar_u(z))?;
    let worst = g.max_abs_value();
    Ok(Band::new(
        "dp_controlled_zero",
        worst < dt * 1e-6 && g.boundary.is_none(),
        format!("max |value| = {}", s(worst)),
    ))
}

/// Twenty random admissible (x, y).
pub fn band_duality(sol: &PredeterminedSolution, seed: u64) -> Result<Band> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let y = rng.gen_range(0.2..3.0);
        let hc = sol.model.human_capital(y);
        let x = rng.gen_range(-0.9 * hc..400.0);
        worst = worst.max(duality_gap(sol, x, y)?.relative());
    }
    Ok(Band::new("duality_gap", worst < 1e-6, format!("max |gap|/|V| = {}", s(worst))))
}

/// Optimal-rule Monte Carlo runs at every point of [`mc_points`].
pub fn mc_runs(sol: &PredeterminedSolution, sim: &SimConfig) -> Result<Vec<(f64, f64, McReport)>> {
    mc_points(sol)
        .into_iter()
        .map(|(x, y)| Ok((x, y, mc_value(&OptimalPredetermined(*sol), &sol.model, x, y, sim)?)))
        .collect()
}

/// Monte Carlo value of the optimal rule against V, and the budget identity.
pub fn mc_bands(sol: &PredeterminedSolution, runs: &[(f64, f64, McReport)]) -> Result<Vec<Band>> {
    let mut out = Vec::new();
    for (x, y, r) in runs {
        let (x, y) = (*x, *y);
        let v = sol.value(x, y)?;
        let z = r.value.z_score(v);
        let rel = r.value.stderr / v.abs();
        out.push(Band::new(
            &format!("mc_value(x={}, y={})", s(x), s(y)),
            z.abs() <= 3.0 && rel < 5e-3 && r.admissibility_violations == 0,
            format!(
                "mc {} +- {} vs V {} (z = {}, bought {})",
                s(r.value.mean),
                s(r.value.stderr),
                s(v),
                sig(z, 3),
                sig(r.purchased, 3)
            ),
        ));
        let bz = r.budget.z_score(x);
        out.push(Band::new(
            &format!("budget(x={}, y={})", s(x), s(y)),
            bz.abs() <= 3.0,
            format!("E[...] {} +- {} vs x {}", s(r.budget.mean), s(r.budget.stderr), s(x)),
        ));
    }
    Ok(out)
}

pub fn band_mc_predetermined(sol: &PredeterminedSolution, sim: &SimConfig) -> Result<Vec<Band>> {
    mc_bands(sol, &mc_runs(sol, sim)?)
}

/// V^B against Monte Carlo, and the 1/D variant of the constant against the same estimate.
pub fn band_mc_controlled(sol: &ControlledSolution, x: f64, y: f64, sim: &SimConfig) -> Result<Vec<Band>> {
    let v = sol.value(x, y)?;
    let g = sol.model.p.gamma;
    let total = x + sol.model.human_capital(y);
    let alt = total.powf(1.0 - g) / (1.0 - g) / sol.d;
    let r = mc_value(&OptimalControlled(*sol), &sol.model, x, y, sim)?;
    let z = r.value.z_score(v);
    let z_alt = r.value.z_score(alt);
    let differ = (alt / v - 1.0).abs() > 0.05;
    Ok(vec![
        Band::new(
            "mc_value_controlled",
            z.abs() <= 3.0 && r.value.stderr / v.abs() < 5e-3,
            format!("mc {} +- {} vs D^gamma form {} (z = {})", s(r.value.mean), s(r.value.stderr), s(v), sig(z, 3)),
        ),
        Band::new(
            "value_constant",
            !differ || z_alt.abs() > 10.0,
            format!("1/D form {} is {} stderr away", s(alt), sig(z_alt.abs(), 3)),
        ),
    ])
}

/// Shifted boundaries and never insuring against the optimal rule. `optimal`
/// may carry an existing run at (x, y) with the same `sim`.
pub fn band_perturbation(
    sol: &PredeterminedSolution,
    x: f64,
    y: f64,
    sim: &SimConfig,
    optimal: Option<&McReport>,
) -> Result<Band> {
    if sol.immediate_purchase() {
        return Ok(Band::new("perturbation", true, "immediate purchase, no boundary".into()));
    }
    let shifts = [0.2, 0.5];
    let rep = match optimal {
        Some(o) => perturbation_against(sol, o, x, y, &shifts, sim)?,
        None => perturbation_test(sol, x, y, &shifts, sim)?,
    };
    let strict = rep.alternatives.iter().filter(|a| a.label == "b*1.5" || a.label == "b*0.5").all(|a| a.strictly_worse());
    let detail = rep
        .alternatives
        .iter()
        .map(|a| format!("{} {} ({} +- {})", a.label, s(a.estimate.mean), s(a.difference.0), s(a.difference.1)))
        .collect::<Vec<_>>()
        .join("; ");
    Ok(Band::new(
        "perturbation",
        rep.passed() && strict,
        format!("optimal {}; {detail}", s(rep.optimal.mean)),
    ))
}

/// Runs every band. `corrupt` rescales the purchase boundary before checking,
/// as a negative control.
pub fn run_verification(model: &Model, sim: &SimConfig, corrupt: Option<f64>) -> Result<VerifyReport> {
    let mut sol = predetermined::solve(model)?;
    if let Some(f) = corrupt {
        sol = sol.with_scaled_boundary(f);
    }
    let mut rep = VerifyReport::default();
    rep.bands.push(band_smooth_fit(&sol));
    rep.bands.push(band_hjb(&sol));
    rep.bands.push(band_dp_predetermined(&sol)?);
    rep.bands.push(band_duality(&sol, sim.seed)?);
    let runs = mc_runs(&sol, sim)?;
    rep.bands.extend(mc_bands(&sol, &runs)?);
    let (x0, y0) = (model.p.x0, model.p.y0);
    let at_start = runs.iter().find(|(x, y, _)| *x == x0 && *y == y0).map(|(_, _, r)| r);
    rep.bands.push(band_perturbation(&sol, x0, y0, sim, at_start)?);
    if model.p.gamma < 1.0 {
        let ctl = controlled::solve(model)?;
        rep.bands.push(band_dp_controlled(&ctl)?);
        rep.bands.extend(band_mc_controlled(&ctl, model.p.x0, model.p.y0, sim)?);
    }
    Ok(rep)
}
