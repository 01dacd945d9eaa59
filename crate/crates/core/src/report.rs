//! Reports and CSV tables produced from the solvers. Numbers are formatted
//! with nine significant digits.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use crate::config::{Case, RunConfig};
use crate::controlled;
use crate::earmarked::{earmarked_boundary, smooth_fit_solve};
use crate::error::{Error, Result};
use crate::format::sig9;
use crate::gompertz::{self, GompertzProblem, MGrid};
use crate::model::{Model, ModelParams};
use crate::numerics::log_grid;
use crate::predetermined;

/// Header plus rows of already formatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Csv {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&v| sig9(v)).collect());
    }

    /// Column `name` parsed back to numbers.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        self.rows.iter().map(|r| r[i].parse().ok()).collect()
    }

    pub fn write<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", self.header.join(","))?;
        for r in &self.rows {
            writeln!(out, "{}", r.join(","))?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        let mut buf = Vec::new();
        self.write(&mut buf)?;
        fs::write(path, buf)
    }
}

/// Ordered `key = value` lines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub title: String,
    pub entries: Vec<(String, String)>,
}

impl Report {
    fn new(title: impl Into<String>) -> Self {
        Report { title: title.into(), entries: Vec::new() }
    }

    fn num(&mut self, key: &str, v: f64) {
        self.entries.push((key.into(), sig9(v)));
    }

    fn text(&mut self, key: &str, v: impl fmt::Display) {
        self.entries.push((key.into(), v.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}]", self.title)?;
        for (k, v) in &self.entries {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

/// Default Gompertz grid: from m up to the level reached over the survival
/// horizon, or [m/2, 2m] without growth.
pub fn default_m_grid(prob: &GompertzProblem) -> MGrid {
    let m = prob.model.p.m;
    let a = prob.model.p.gompertz_a;
    if a > 0.0 {
        let target = -gompertz::TRUNCATION_WEIGHT.ln();
        // ρt + (m/a)(e^{at} − 1) = target, solved for the level M = m e^{at}.
        let mut t = 1.0;
        while prob.model.p.rho * t + m / a * (a * t).exp_m1() < target {
            t *= 1.5;
        }
        let t = crate::numerics::brent(
            |t| prob.model.p.rho * t + m / a * (a * t).exp_m1() - target,
            0.0,
            t,
            1e-10,
            200,
        )
        .unwrap_or(t);
        MGrid { lo: m, hi: m * (a * t).exp(), n: 16 }
    } else {
        MGrid { lo: 0.5 * m, hi: 2.0 * m, n: 16 }
    }
}

fn predetermined_report(model: &Model) -> Result<Report> {
    let p = &model.p;
    let sol = predetermined::solve(model)?;
    let (x, y) = (p.x0, p.y0);
    let mut r = Report::new("predetermined");
    r.num("theta", model.dc.theta);
    r.num("kappa", model.dc.kappa);
    r.num("K", model.dc.k);
    r.num("alpha1", model.dc.alpha1);
    r.num("h", model.dc.h);
    match sol.boundary {
        Some(fb) => {
            r.num("b", fb.b);
            r.num("C1", fb.c1);
            r.num("b_hat", sol.primal_boundary(y)?);
        }
        None => r.text("b", "none (immediate purchase)"),
    }
    let d = sol.policy(x, y)?;
    r.text("region", d.region.label());
    r.num("z_star", d.z_star);
    r.num("V", sol.value(x, y)?);
    r.num("c", d.consumption);
    r.num("pi", d.investment);
    r.num("c_over_x", d.consumption / x);
    r.num("pi_over_x", d.investment / x);
    r.num("y_over_kappa", model.human_capital(y));
    Ok(r)
}

fn controlled_report(model: &Model) -> Result<Report> {
    let p = &model.p;
    let sol = controlled::solve(model)?;
    let (x, y) = (p.x0, p.y0);
    let d = sol.policy(x, y)?;
    let mut r = Report::new("controlled");
    r.num("K", model.dc.k);
    r.num("D", sol.d);
    r.num("value_coefficient", sol.value_coefficient);
    r.num("z_star", d.z_star);
    r.num("V", sol.value(x, y)?);
    r.num("c", d.consumption);
    r.num("pi", d.investment);
    r.num("B0", d.bequest);
    r.num("c_over_x", d.consumption / x);
    r.num("pi_over_x", d.investment / x);
    r.num("B0_over_x", d.bequest / x);
    r.num("y_over_kappa", model.human_capital(y));
    Ok(r)
}

fn earmarked_pre_report(model: &Model) -> Result<Report> {
    let p = &model.p;
    let sol = earmarked_boundary(model, p.earmark_q, p.bequest_b)?;
    let mut r = Report::new("earmarked-pre");
    r.num("q", sol.q);
    r.num("B", sol.bequest);
    r.num("b_bar", sol.b_bar);
    r.num("C1_bar", sol.c1_bar);
    r.num("gain", sol.gain);
    Ok(r)
}

fn earmarked_ctl_report(model: &Model) -> Result<Report> {
    let sol = smooth_fit_solve(model, model.p.earmark_q)?;
    let mut r = Report::new("earmarked-ctl");
    r.num("q", sol.q);
    r.num("b_tilde", sol.b_tilde);
    r.num("L_bar", sol.l_bar);
    r.num("A1", sol.a1);
    r.num("A2", sol.a2);
    r.num("B1", sol.b1);
    r.num("Delta", sol.delta);
    r.num("C", sol.c);
    r.num("F_at_b", sol.conditions.f_at_boundary);
    r.num("min_w", sol.conditions.min_w);
    r.text("conditions_ok", sol.conditions.conditions_ok);
    let res = sol.residuals();
    r.num("max_pasting_residual", res.iter().fold(0.0, |a: f64, v| a.max(v.abs())));
    Ok(r)
}

/// Gompertz boundary on the configured or default grid, plus its CSV.
pub fn gompertz_solution(cfg: &RunConfig) -> Result<(Report, Csv)> {
    let model = Model::new(cfg.params)?;
    let prob = GompertzProblem::new(&model)?;
    let grid = cfg.m_grid.unwrap_or_else(|| default_m_grid(&prob));
    let sol = gompertz::solve_boundary(&prob, &grid, &cfg.gompertz)?;
    let mut r = Report::new("gompertz");
    r.num("a", model.p.gompertz_a);
    r.num("m_grid_lo", grid.lo);
    r.num("m_grid_hi", grid.hi);
    r.text("m_grid_n", grid.n);
    r.text("truncation_dominated", sol.truncation_dominated);
    r.num("lipschitz_estimate", sol.lipschitz_estimate());
    let worst = sol
        .residuals
        .iter()
        .map(|e| e.mean.abs() / e.stderr)
        .fold(0.0, f64::max);
    r.num("max_residual_over_stderr", worst);
    let mut csv = Csv::new(&["m", "b", "b_stderr", "residual", "residual_stderr", "horizon"]);
    for i in 0..sol.m_grid.len() {
        csv.push_numbers(&[
            sol.m_grid[i],
            sol.b_values[i],
            sol.b_stderr[i],
            sol.residuals[i].mean,
            sol.residuals[i].stderr,
            sol.horizons[i],
        ]);
    }
    Ok((r, csv))
}

/// Solver report for the configured case.
pub fn solve_case(cfg: &RunConfig) -> Result<Report> {
    let model = Model::new(cfg.params)?;
    match cfg.case {
        Case::Predetermined => predetermined_report(&model),
        Case::Controlled => controlled_report(&model),
        Case::EarmarkedPre => earmarked_pre_report(&model),
        Case::EarmarkedCtl => earmarked_ctl_report(&model),
        Case::Gompertz => gompertz_solution(cfg).map(|(r, _)| r),
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Columns produced for one case at one parameter set.
fn case_row(case: Case, p: &ModelParams) -> Result<Vec<f64>> {
    let model = Model::new(*p)?;
    let (x, y) = (p.x0, p.y0);
    Ok(match case {
        Case::Predetermined => {
            let sol = predetermined::solve(&model)?;
            let d = sol.policy(x, y)?;
            vec![
                sol.b().unwrap_or(f64::NAN),
                sol.primal_boundary(y).unwrap_or(f64::NAN),
                sol.value(x, y)?,
                d.consumption / x,
                d.investment / x,
            ]
        }
        Case::Controlled => {
            let sol = controlled::solve(&model)?;
            let d = sol.policy(x, y)?;
            vec![d.bequest, sol.value(x, y)?, d.consumption / x, d.investment / x]
        }
        Case::EarmarkedPre => vec![earmarked_boundary(&model, p.earmark_q, p.bequest_b)?.b_bar],
        Case::EarmarkedCtl => {
            let s = smooth_fit_solve(&model, p.earmark_q)?;
            vec![s.b_tilde, s.l_bar, if s.conditions.conditions_ok { 1.0 } else { 0.0 }]
        }
        Case::Gompertz => return Err(Error::UnsupportedRegime("sweeps are not offered for the Gompertz case".into())),
    })
}

fn case_header(case: Case) -> &'static [&'static str] {
    match case {
        Case::Predetermined => &["b", "b_hat", "V", "c_over_x", "pi_over_x"],
        Case::Controlled => &["B0", "V", "c_over_x", "pi_over_x"],
        Case::EarmarkedPre => &["b_bar"],
        Case::EarmarkedCtl => &["b_tilde", "L_bar", "conditions_ok"],
        Case::Gompertz => &[],
    }
}

/// One-parameter sweep of the configured case.
pub fn sweep(base: &ModelParams, case: Case, variable: &str, values: &[f64]) -> Result<Csv> {
    if base.get(variable).is_none() {
        return Err(Error::Domain(format!("unknown sweep variable '{variable}'")));
    }
    let mut header = vec![variable];
    header.extend_from_slice(case_header(case));
    let mut csv = Csv::new(&header);
    for &v in values {
        let mut p = *base;
        p.set(variable, v);
        let mut row = vec![v];
        row.extend(case_row(case, &p)?);
        csv.push_numbers(&row);
    }
    Ok(csv)
}

pub fn sweep_from_config(cfg: &RunConfig) -> Result<Csv> {
    let s = cfg.sweep.as_ref().ok_or_else(|| Error::Domain("no sweep_var in the configuration".into()))?;
    sweep(&cfg.params, cfg.case, &s.variable, &linspace(s.lo, s.hi, s.n))
}

/// Rows of the strategy comparison at (x, y) = (1, 1).
pub fn policy_table(base: &ModelParams) -> Result<Csv> {
    let mut csv = Csv::new(&["case", "B", "c_over_x", "pi_over_x", "B0_over_x", "y_over_kappa", "V"]);
    let mut pre = |bequest: f64| -> Result<()> {
        let model = Model::new(ModelParams { bequest_b: bequest, ..*base })?;
        let sol = predetermined::solve(&model)?;
        let (x, y) = (base.x0, base.y0);
        let d = sol.policy(x, y)?;
        csv.push(vec![
            "predetermined".into(),
            sig9(bequest),
            sig9(d.consumption / x),
            sig9(d.investment / x),
            String::new(),
            sig9(model.human_capital(y)),
            sig9(sol.value(x, y)?),
        ]);
        Ok(())
    };
    pre(base.bequest_b)?;
    let model = Model::new(*base)?;
    let ctl = controlled::solve(&model)?;
    let (x, y) = (base.x0, base.y0);
    let d = ctl.policy(x, y)?;
    // The predetermined bequest set to the chosen amount, rounded as printed.
    pre((d.bequest * 1000.0).round() / 1000.0)?;
    csv.push(vec![
        "controlled".into(),
        sig9(d.bequest),
        sig9(d.consumption / x),
        sig9(d.investment / x),
        sig9(d.bequest / x),
        sig9(model.human_capital(y)),
        sig9(ctl.value(x, y)?),
    ]);
    Ok(csv)
}

/// Strategy ratios along x at y = y₀.
pub fn policy_vs_x(base: &ModelParams, xs: &[f64]) -> Result<Csv> {
    let model = Model::new(*base)?;
    let sol = predetermined::solve(&model)?;
    let mut csv = Csv::new(&["x", "c_over_x", "pi_over_x", "region"]);
    for &x in xs {
        let d = sol.policy(x, base.y0)?;
        csv.push(vec![sig9(x), sig9(d.consumption / x), sig9(d.investment / x), d.region.label().into()]);
    }
    Ok(csv)
}

/// b̂ against γ with the limiting level h/r − y/κ alongside.
pub fn bhat_vs_gamma(base: &ModelParams, gammas: &[f64]) -> Result<Csv> {
    let mut csv = Csv::new(&["gamma", "b_hat", "limit"]);
    for &g in gammas {
        let model = Model::new(ModelParams { gamma: g, ..*base })?;
        let sol = predetermined::solve(&model)?;
        let limit = model.dc.h / model.p.r - model.human_capital(base.y0);
        csv.push_numbers(&[g, sol.primal_boundary(base.y0)?, limit]);
    }
    Ok(csv)
}

/// w̃ on a log grid around the pasting points.
pub fn w_tilde_curve(model: &Model, n: usize) -> Result<Csv> {
    let sol = smooth_fit_solve(model, model.p.earmark_q)?;
    let mut csv = Csv::new(&["z", "w_tilde"]);
    for z in log_grid(sol.b_tilde * 0.1, sol.l_bar * 10.0, n) {
        csv.push_numbers(&[z, sol.tilde_w(z)?]);
    }
    Ok(csv)
}

/// Parameters of the earmarked illustration: γ = 1.8 and q = 1.
pub fn earmarked_illustration(base: &ModelParams) -> ModelParams {
    ModelParams { gamma: 1.8, earmark_q: 1.0, ..*base }
}

/// Every table of the reproduction bundle, by file name.
pub fn reproduce_paper(base: &ModelParams) -> Result<Vec<(&'static str, Csv)>> {
    let mut gammas = linspace(0.5, 0.99, 50);
    gammas.push(0.999);
    Ok(vec![
        ("table3.csv", policy_table(base)?),
        ("bhat_vs_y.csv", sweep(base, Case::Predetermined, "y0", &linspace(0.1, 3.0, 30))?),
        ("bhat_vs_B.csv", sweep(base, Case::Predetermined, "bequest_B", &linspace(0.5, 20.0, 40))?),
        ("bhat_vs_gamma.csv", bhat_vs_gamma(base, &gammas)?),
        ("bhat_vs_l.csv", sweep(base, Case::Predetermined, "l", &linspace(0.1, 2.0, 39))?),
        ("policy_vs_x.csv", policy_vs_x(base, &linspace(1.0, 400.0, 400))?),
        ("B0_vs_l.csv", sweep(base, Case::Controlled, "l", &linspace(0.1, 2.0, 39))?),
        ("B0_vs_gamma.csv", sweep(base, Case::Controlled, "gamma", &linspace(0.5, 0.95, 46))?),
        ("w_tilde_vs_z.csv", w_tilde_curve(&Model::new(earmarked_illustration(base))?, 400)?),
    ])
}
