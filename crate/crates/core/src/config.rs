//! Flat TOML run configuration. Every key is optional and falls back to the
//! baseline calibration; unknown keys are rejected.

use std::fmt;
use std::str::FromStr;

use serde::Deserialize;

use crate::gompertz::{GompertzConfig, MGrid};
use crate::model::{validate_assumptions, Model, ModelParams, SimConfig};

/// Tail weight used when the horizon is not given.
pub const HORIZON_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Case {
    Predetermined,
    Controlled,
    EarmarkedPre,
    EarmarkedCtl,
    Gompertz,
}

impl Case {
    pub fn name(&self) -> &'static str {
        match self {
            Case::Predetermined => "predetermined",
            Case::Controlled => "controlled",
            Case::EarmarkedPre => "earmarked-pre",
            Case::EarmarkedCtl => "earmarked-ctl",
            Case::Gompertz => "gompertz",
        }
    }
}

impl FromStr for Case {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "predetermined" => Case::Predetermined,
            "controlled" => Case::Controlled,
            "earmarked-pre" => Case::EarmarkedPre,
            "earmarked-ctl" => Case::EarmarkedCtl,
            "gompertz" => Case::Gompertz,
            _ => return Err(format!("unknown case '{s}'")),
        })
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: String,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mu: Option<f64>,
    sigma: Option<f64>,
    r: Option<f64>,
    rho: Option<f64>,
    gamma: Option<f64>,
    mu_y: Option<f64>,
    sigma_y: Option<f64>,
    l: Option<f64>,
    m: Option<f64>,
    #[serde(rename = "bequest_B")]
    bequest_b: Option<f64>,
    earmark_q: Option<f64>,
    gompertz_a: Option<f64>,
    x0: Option<f64>,
    y0: Option<f64>,
    n_paths: Option<usize>,
    dt: Option<f64>,
    #[serde(rename = "horizon_T")]
    horizon_t: Option<f64>,
    seed: Option<u64>,
    antithetic: Option<bool>,
    stretch: Option<f64>,
    m_grid_lo: Option<f64>,
    m_grid_hi: Option<f64>,
    m_grid_n: Option<usize>,
    gompertz_paths: Option<usize>,
    gompertz_steps: Option<usize>,
    case: Option<Case>,
    sweep_var: Option<String>,
    sweep_lo: Option<f64>,
    sweep_hi: Option<f64>,
    sweep_n: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub case: Case,
    pub n_paths: usize,
    pub dt: f64,
    pub stretch: f64,
    /// `None` means the horizon follows from [`HORIZON_TOL`].
    pub horizon_t: Option<f64>,
    pub seed: u64,
    pub antithetic: bool,
    pub m_grid: Option<MGrid>,
    pub gompertz: GompertzConfig,
    pub sweep: Option<SweepSpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: ModelParams::baseline(),
            case: Case::Predetermined,
            n_paths: 20_000,
            dt: 0.2,
            stretch: 10.0,
            horizon_t: None,
            seed: 20240917,
            antithetic: true,
            m_grid: None,
            gompertz: GompertzConfig::default(),
            sweep: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    /// Parses TOML text; the error message carries line and column.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        let d = RunConfig::default();
        let b = d.params;
        let params = ModelParams {
            mu: raw.mu.unwrap_or(b.mu),
            sigma: raw.sigma.unwrap_or(b.sigma),
            r: raw.r.unwrap_or(b.r),
            rho: raw.rho.unwrap_or(b.rho),
            gamma: raw.gamma.unwrap_or(b.gamma),
            mu_y: raw.mu_y.unwrap_or(b.mu_y),
            sigma_y: raw.sigma_y.unwrap_or(b.sigma_y),
            l: raw.l.unwrap_or(b.l),
            m: raw.m.unwrap_or(b.m),
            bequest_b: raw.bequest_b.unwrap_or(b.bequest_b),
            earmark_q: raw.earmark_q.unwrap_or(b.earmark_q),
            gompertz_a: raw.gompertz_a.unwrap_or(b.gompertz_a),
            x0: raw.x0.unwrap_or(b.x0),
            y0: raw.y0.unwrap_or(b.y0),
        };
        let m_grid = match (raw.m_grid_lo, raw.m_grid_hi, raw.m_grid_n) {
            (None, None, None) => None,
            (lo, hi, n) => Some(MGrid {
                lo: lo.unwrap_or(params.m),
                hi: hi.unwrap_or(lo.unwrap_or(params.m) * 4.0),
                n: n.unwrap_or(16),
            }),
        };
        let sweep = match raw.sweep_var {
            None => None,
            Some(variable) => Some(SweepSpec {
                variable,
                lo: raw.sweep_lo.ok_or_else(|| ConfigError("sweep_var needs sweep_lo".into()))?,
                hi: raw.sweep_hi.ok_or_else(|| ConfigError("sweep_var needs sweep_hi".into()))?,
                n: raw.sweep_n.unwrap_or(21),
            }),
        };
        Ok(RunConfig {
            params,
            case: raw.case.unwrap_or(d.case),
            n_paths: raw.n_paths.unwrap_or(d.n_paths),
            dt: raw.dt.unwrap_or(d.dt),
            stretch: raw.stretch.unwrap_or(d.stretch),
            horizon_t: raw.horizon_t,
            seed: raw.seed.unwrap_or(d.seed),
            antithetic: raw.antithetic.unwrap_or(d.antithetic),
            m_grid,
            gompertz: GompertzConfig {
                n_paths: raw.gompertz_paths.unwrap_or(d.gompertz.n_paths),
                n_steps: raw.gompertz_steps.unwrap_or(d.gompertz.n_steps),
                seed: raw.seed.unwrap_or(d.gompertz.seed),
                antithetic: raw.antithetic.unwrap_or(d.gompertz.antithetic),
            },
            sweep,
        })
    }

    /// Every problem with the configuration, model assumptions first.
    pub fn violations(&self) -> Vec<String> {
        let predetermined = matches!(self.case, Case::Predetermined | Case::EarmarkedPre);
        let mut out: Vec<String> =
            validate_assumptions(&self.params, predetermined).iter().map(|v| v.to_string()).collect();
        if self.case == Case::Gompertz && !(self.params.earmark_q > 0.0) && self.params.gamma > 1.0 {
            out.push("EARMARK_REQUIRED: gamma > 1 needs earmark_q > 0".into());
        }
        if matches!(self.case, Case::EarmarkedPre | Case::EarmarkedCtl) && !(self.params.earmark_q > 0.0) {
            out.push("EARMARK_REQUIRED: earmarked cases need earmark_q > 0".into());
        }
        let sim = SimConfig {
            n_paths: self.n_paths,
            dt: self.dt,
            horizon_t: self.horizon_t.unwrap_or(1.0),
            seed: self.seed,
            antithetic: self.antithetic,
            stretch: self.stretch,
        };
        if let Err(e) = sim.validate() {
            out.push(format!("SIM: {e}"));
        }
        if let Some(g) = &self.m_grid {
            if !(g.lo > 0.0 && g.hi >= g.lo && g.n >= 1) {
                out.push("M_GRID: need 0 < m_grid_lo <= m_grid_hi and m_grid_n >= 1".into());
            }
        }
        if self.gompertz.n_paths == 0 || self.gompertz.n_steps == 0 {
            out.push("GOMPERTZ: gompertz_paths and gompertz_steps must be >= 1".into());
        }
        if let Some(s) = &self.sweep {
            if ModelParams::baseline().get(&s.variable).is_none() {
                out.push(format!("SWEEP: unknown variable '{}'", s.variable));
            }
            if !(s.lo.is_finite() && s.hi.is_finite()) || s.n < 2 {
                out.push("SWEEP: need finite sweep_lo, sweep_hi and sweep_n >= 2".into());
            }
        }
        out
    }

    /// Simulation settings with the horizon resolved for `model`.
    pub fn sim(&self, model: &Model) -> SimConfig {
        SimConfig {
            n_paths: self.n_paths,
            dt: self.dt,
            horizon_t: self.horizon_t.unwrap_or_else(|| model.default_horizon(HORIZON_TOL)),
            seed: self.seed,
            antithetic: self.antithetic,
            stretch: self.stretch,
        }
    }
}
