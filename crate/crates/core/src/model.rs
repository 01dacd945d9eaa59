//! Model parameters, derived constants, assumption checks and exact simulation
//! of the income, state-price and dual processes.

use std::fmt;
use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::sig9;

/// Raw market, preference, mortality and income inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub mu: f64,
    pub sigma: f64,
    pub r: f64,
    pub rho: f64,
    pub gamma: f64,
    pub mu_y: f64,
    pub sigma_y: f64,
    pub l: f64,
    pub m: f64,
    #[serde(rename = "bequest_B")]
    pub bequest_b: f64,
    pub earmark_q: f64,
    pub gompertz_a: f64,
    pub x0: f64,
    pub y0: f64,
}

impl ModelParams {
    /// The baseline calibration used throughout the numerical illustrations.
    pub fn baseline() -> Self {
        ModelParams {
            mu: 0.05,
            sigma: 0.22,
            r: 0.01,
            rho: 0.01,
            gamma: 0.8,
            mu_y: 0.01,
            sigma_y: 0.1,
            l: 0.5,
            m: 0.0175,
            bequest_b: 5.0,
            earmark_q: 0.0,
            gompertz_a: 0.0,
            x0: 1.0,
            y0: 1.0,
        }
    }

    pub fn theta(&self) -> f64 {
        (self.mu - self.r) / self.sigma
    }

    pub fn kappa(&self) -> f64 {
        self.r - self.mu_y + self.sigma_y * self.theta()
    }

    /// Value of the parameter with config key `name`.
    pub fn get(&self, name: &str) -> Option<f64> {
        self.named().iter().find(|(k, _)| *k == name).map(|(_, v)| *v)
    }

    /// Sets the parameter with config key `name`; false if no such key.
    pub fn set(&mut self, name: &str, value: f64) -> bool {
        let slot = match name {
            "mu" => &mut self.mu,
            "sigma" => &mut self.sigma,
            "r" => &mut self.r,
            "rho" => &mut self.rho,
            "gamma" => &mut self.gamma,
            "mu_y" => &mut self.mu_y,
            "sigma_y" => &mut self.sigma_y,
            "l" => &mut self.l,
            "m" => &mut self.m,
            "bequest_B" => &mut self.bequest_b,
            "earmark_q" => &mut self.earmark_q,
            "gompertz_a" => &mut self.gompertz_a,
            "x0" => &mut self.x0,
            "y0" => &mut self.y0,
            _ => return false,
        };
        *slot = value;
        true
    }

    fn named(&self) -> [(&'static str, f64); 14] {
        [
            ("mu", self.mu),
            ("sigma", self.sigma),
            ("r", self.r),
            ("rho", self.rho),
            ("gamma", self.gamma),
            ("mu_y", self.mu_y),
            ("sigma_y", self.sigma_y),
            ("l", self.l),
            ("m", self.m),
            ("bequest_B", self.bequest_b),
            ("earmark_q", self.earmark_q),
            ("gompertz_a", self.gompertz_a),
            ("x0", self.x0),
            ("y0", self.y0),
        ]
    }
}

/// A single failed model requirement.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonFinite(&'static str),
    NonPositive(&'static str),
    Negative(&'static str),
    GammaIsOne,
    MuNotAboveR,
    KappaNonPositive,
    /// ρ+m ≤ (1−γ)r + ((1−γ)/(2γ))θ², equivalently K ≤ 0.
    DiscountTooLow,
    RhoPlusMNotAboveR,
}

impl Violation {
    pub fn code(&self) -> &'static str {
        match self {
            Violation::NonFinite(_) => "NON_FINITE",
            Violation::NonPositive(_) => "NON_POSITIVE",
            Violation::Negative(_) => "NEGATIVE",
            Violation::GammaIsOne => "GAMMA_IS_ONE",
            Violation::MuNotAboveR => "MU_NOT_ABOVE_R",
            Violation::KappaNonPositive => "KAPPA_NON_POSITIVE",
            Violation::DiscountTooLow => "DISCOUNT_TOO_LOW",
            Violation::RhoPlusMNotAboveR => "RHO_PLUS_M_NOT_ABOVE_R",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFinite(k) => write!(f, "{}: {k} is not finite", self.code()),
            Violation::NonPositive(k) => write!(f, "{}: {k} must be > 0", self.code()),
            Violation::Negative(k) => write!(f, "{}: {k} must be >= 0", self.code()),
            Violation::GammaIsOne => write!(f, "{}: gamma = 1 (log utility) is excluded", self.code()),
            Violation::MuNotAboveR => write!(f, "{}: mu must exceed r", self.code()),
            Violation::KappaNonPositive => {
                write!(f, "{}: kappa = r - mu_y + sigma_y*theta must be > 0", self.code())
            }
            Violation::DiscountTooLow => write!(
                f,
                "{}: rho + m must exceed (1-gamma) r + (1-gamma)/(2 gamma) theta^2",
                self.code()
            ),
            Violation::RhoPlusMNotAboveR => write!(f, "{}: rho + m must exceed r", self.code()),
        }
    }
}

/// Range checks that every solver relies on.
fn domain_violations(p: &ModelParams) -> Vec<Violation> {
    let mut out = Vec::new();
    for (k, v) in p.named() {
        if !v.is_finite() {
            out.push(Violation::NonFinite(k));
        }
    }
    for (k, v) in [
        ("sigma", p.sigma),
        ("sigma_y", p.sigma_y),
        ("y0", p.y0),
        ("m", p.m),
        ("gamma", p.gamma),
        ("r", p.r),
        ("rho", p.rho),
        ("l", p.l),
    ] {
        if v.is_finite() && v <= 0.0 {
            out.push(Violation::NonPositive(k));
        }
    }
    for (k, v) in [
        ("bequest_B", p.bequest_b),
        ("earmark_q", p.earmark_q),
        ("gompertz_a", p.gompertz_a),
    ] {
        if v < 0.0 {
            out.push(Violation::Negative(k));
        }
    }
    if p.gamma == 1.0 {
        out.push(Violation::GammaIsOne);
    }
    if p.mu <= p.r {
        out.push(Violation::MuNotAboveR);
    }
    out
}

/// Every violated requirement. `predetermined_boundary` adds the ρ+m > r
/// condition needed by the fixed-bequest free boundary.
pub fn validate_assumptions(p: &ModelParams, predetermined_boundary: bool) -> Vec<Violation> {
    let mut out = domain_violations(p);
    if !out.is_empty() {
        return out;
    }
    let theta = p.theta();
    let g = p.gamma;
    if p.rho + p.m <= (1.0 - g) * p.r + (1.0 - g) / (2.0 * g) * theta * theta {
        out.push(Violation::DiscountTooLow);
    }
    if p.kappa() <= 0.0 {
        out.push(Violation::KappaNonPositive);
    }
    if predetermined_boundary && p.gamma < 1.0 && p.rho + p.m <= p.r {
        out.push(Violation::RhoPlusMNotAboveR);
    }
    out
}

/// Quantities derived once from [`ModelParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    pub theta: f64,
    pub kappa: f64,
    /// Dual decay constant K.
    pub k: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    /// Premium rate m·B.
    pub h: f64,
    /// Effective discount ρ+m.
    pub beta: f64,
    /// K > 0, i.e. the integrability assumption holds.
    pub integrable: bool,
}

/// Roots α₁ < 0 < 1 < α₂ of ½θ²α² + (ρ−r+m−½θ²)α − (ρ+m) = 0.
pub fn characteristic_roots(theta: f64, r: f64, rho: f64, m: f64) -> (f64, f64) {
    let a = 0.5 * theta * theta;
    let b = rho - r + m - a;
    let c = -(rho + m);
    let disc = (b * b - 4.0 * a * c).sqrt();
    let big = -0.5 * (b + b.signum() * disc) / a;
    let small = c / (a * big);
    if big < small {
        (big, small)
    } else {
        (small, big)
    }
}

/// Residual of the characteristic quadratic at `alpha`.
pub fn characteristic_residual(theta: f64, r: f64, rho: f64, m: f64, alpha: f64) -> f64 {
    let a = 0.5 * theta * theta;
    a * alpha * alpha + (rho - r + m - a) * alpha - (rho + m)
}

pub fn derive_constants(p: &ModelParams) -> Result<DerivedConstants> {
    let theta = p.theta();
    let kappa = p.kappa();
    if kappa <= 0.0 {
        return Err(Error::KappaNonPositive(kappa));
    }
    let g = p.gamma;
    let beta = p.rho + p.m;
    let k = (beta - p.r * (1.0 - g) - (1.0 - g) / (2.0 * g) * theta * theta) / g;
    let (alpha1, alpha2) = characteristic_roots(theta, p.r, p.rho, p.m);
    Ok(DerivedConstants {
        theta,
        kappa,
        k,
        alpha1,
        alpha2,
        h: premium_rate(p.bequest_b, p.m),
        beta,
        integrable: k > 0.0,
    })
}

/// Actuarially fair premium for bequest `b` under constant mortality `m`.
pub fn premium_rate(b: f64, m: f64) -> f64 {
    m * b
}

/// CRRA utility c^{1−γ}/(1−γ); u(0) is 0 for γ<1 and −∞ for γ>1.
pub fn utility(c: f64, gamma: f64) -> f64 {
    c.powf(1.0 - gamma) / (1.0 - gamma)
}

/// Validated parameters together with their derived constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model {
    pub p: ModelParams,
    pub dc: DerivedConstants,
}

impl Model {
    pub fn new(p: ModelParams) -> Result<Model> {
        let v = domain_violations(&p);
        if !v.is_empty() {
            return Err(Error::InvalidParams(v));
        }
        let dc = derive_constants(&p)?;
        Ok(Model { p, dc })
    }

    pub fn baseline() -> Model {
        Model::new(ModelParams::baseline()).expect("baseline parameters are valid")
    }

    /// Same market and preferences with a different parameter set applied.
    pub fn with(&self, f: impl FnOnce(&mut ModelParams)) -> Result<Model> {
        let mut p = self.p;
        f(&mut p);
        Model::new(p)
    }

    pub fn u(&self, c: f64) -> f64 {
        utility(c, self.p.gamma)
    }

    pub fn human_capital(&self, y: f64) -> f64 {
        y / self.dc.kappa
    }

    /// Fails with [`Error::InvalidParams`] unless K > 0.
    pub fn require_integrable(&self) -> Result<()> {
        if self.dc.integrable {
            Ok(())
        } else {
            Err(Error::InvalidParams(vec![Violation::DiscountTooLow]))
        }
    }

    /// Truncation horizon T with e^{−γK T} below `tol`.
    pub fn default_horizon(&self, tol: f64) -> f64 {
        let rate = self.p.gamma * self.dc.k;
        if rate > 0.0 {
            (1.0 / tol).ln() / rate
        } else {
            f64::INFINITY
        }
    }

    /// Consumption and risky investment after a purchase with bequest `b`:
    /// total net wealth x + y/κ − mB/r is consumed at rate K and invested in
    /// the Merton proportion θ/(γσ), net of the income hedge.
    pub fn post_purchase_policy(&self, x: f64, y: f64, b: f64) -> Result<(f64, f64)> {
        let net = x + self.human_capital(y) - premium_rate(b, self.p.m) / self.p.r;
        if !(net > 0.0) {
            return Err(Error::AdmissibilityViolated(format!(
                "net wealth x + y/kappa - h/r = {net} is not positive after purchase"
            )));
        }
        let c = self.dc.k * net;
        let pi = (self.dc.theta * net / self.p.gamma - self.p.sigma_y * self.human_capital(y))
            / self.p.sigma;
        Ok((c, pi))
    }

    /// ∫₀ᵗ M_s ds for the Gompertz force M_s = m·e^{a s} (exactly m·t for a = 0).
    pub fn integrated_mortality(&self, t0: f64, t1: f64) -> f64 {
        integrated_gompertz(self.p.m, self.p.gompertz_a, t0, t1)
    }
}

pub fn integrated_gompertz(m0: f64, a: f64, t0: f64, t1: f64) -> f64 {
    if a == 0.0 {
        m0 * (t1 - t0)
    } else {
        m0 / a * (a * t0).exp() * (a * (t1 - t0)).exp_m1()
    }
}

/// Monte Carlo configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub n_paths: usize,
    pub dt: f64,
    pub horizon_t: f64,
    pub seed: u64,
    pub antithetic: bool,
    /// Steps grow as dt·(1 + t/stretch); 0 keeps the grid uniform.
    pub stretch: f64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Domain(format!("dt = {} must be > 0", self.dt)));
        }
        if !(self.horizon_t > 0.0 && self.horizon_t.is_finite()) {
            return Err(Error::Domain(format!("horizon_T = {} must be > 0", self.horizon_t)));
        }
        if !(self.stretch >= 0.0 && self.stretch.is_finite()) {
            return Err(Error::Domain(format!("stretch = {} must be >= 0", self.stretch)));
        }
        if self.n_paths == 0 {
            return Err(Error::Domain("n_paths must be >= 1".into()));
        }
        if self.antithetic && self.n_paths % 2 == 1 {
            return Err(Error::Domain("antithetic sampling needs an even n_paths".into()));
        }
        Ok(())
    }

    /// Grid from 0 ending exactly at the horizon, uniform unless stretched.
    pub fn time_grid(&self) -> Vec<f64> {
        if self.stretch == 0.0 {
            let n = (self.horizon_t / self.dt - 1e-9).ceil().max(1.0) as usize;
            return (0..=n).map(|k| (k as f64 * self.dt).min(self.horizon_t)).collect();
        }
        let mut times = vec![0.0];
        let mut t = 0.0;
        while t < self.horizon_t * (1.0 - 1e-12) {
            t = (t + self.dt * (1.0 + t / self.stretch)).min(self.horizon_t);
            times.push(t);
        }
        times
    }
}

/// Gaussian noise source for one path. Paths 2j and 2j+1 share a stream with
/// opposite signs under antithetic sampling; every stream is addressed by
/// (seed, index) so results do not depend on how paths are scheduled.
pub struct PathNoise {
    rng: ChaCha8Rng,
    sign: f64,
}

impl PathNoise {
    pub fn new(seed: u64, path: usize, antithetic: bool) -> Self {
        let (stream, sign) = if antithetic {
            ((path / 2) as u64, if path % 2 == 0 { 1.0 } else { -1.0 })
        } else {
            (path as u64, 1.0)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        PathNoise { rng, sign }
    }

    pub fn normal(&mut self) -> f64 {
        let e: f64 = StandardNormal.sample(&mut self.rng);
        self.sign * e
    }

    pub fn uniform(&mut self) -> f64 {
        use rand::Rng;
        self.rng.gen::<f64>()
    }
}

/// Simulated paths stored path-major: index `p * n_times + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBundle {
    pub times: Vec<f64>,
    pub n_paths: usize,
    pub w: Vec<f64>,
    pub y: Vec<f64>,
    pub xi: Vec<f64>,
    pub z: Vec<f64>,
    pub m: Option<Vec<f64>>,
}

impl PathBundle {
    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    fn slice<'a>(&self, v: &'a [f64], p: usize) -> &'a [f64] {
        let n = self.n_times();
        &v[p * n..(p + 1) * n]
    }

    pub fn w_path(&self, p: usize) -> &[f64] {
        self.slice(&self.w, p)
    }
    pub fn y_path(&self, p: usize) -> &[f64] {
        self.slice(&self.y, p)
    }
    pub fn xi_path(&self, p: usize) -> &[f64] {
        self.slice(&self.xi, p)
    }
    pub fn z_path(&self, p: usize) -> &[f64] {
        self.slice(&self.z, p)
    }
    pub fn m_path(&self, p: usize) -> Option<&[f64]> {
        self.m.as_ref().map(|m| self.slice(m, p))
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let with_m = self.m.is_some();
        writeln!(out, "t,path_id,W,Y,xi,Z{}", if with_m { ",M" } else { "" })?;
        for p in 0..self.n_paths {
            let (w, y, xi, z) = (self.w_path(p), self.y_path(p), self.xi_path(p), self.z_path(p));
            let mp = self.m_path(p);
            for (k, t) in self.times.iter().enumerate() {
                write!(
                    out,
                    "{},{},{},{},{},{}",
                    sig9(*t),
                    p,
                    sig9(w[k]),
                    sig9(y[k]),
                    sig9(xi[k]),
                    sig9(z[k])
                )?;
                if let Some(mp) = mp {
                    write!(out, ",{}", sig9(mp[k]))?;
                }
                writeln!(out)?;
            }
        }
        Ok(())
    }
}

/// Exact lognormal paths of Y, ξ and Z started at Z₀ = `z0`. With a positive
/// Gompertz rate the mortality path M is included and Z uses the integrated
/// force in its drift.
pub fn simulate_paths(model: &Model, sim: &SimConfig, z0: f64) -> Result<PathBundle> {
    sim.validate()?;
    if !(z0 > 0.0) {
        return Err(Error::Domain(format!("z0 = {z0} must be > 0")));
    }
    let p = &model.p;
    let theta = model.dc.theta;
    let times = sim.time_grid();
    let nt = times.len();
    let gompertz = p.gompertz_a > 0.0;
    let total = sim.n_paths * nt;
    let (mut w, mut y, mut xi, mut z) = (
        Vec::with_capacity(total),
        Vec::with_capacity(total),
        Vec::with_capacity(total),
        Vec::with_capacity(total),
    );
    let mut mort = if gompertz { Some(Vec::with_capacity(total)) } else { None };
    for path in 0..sim.n_paths {
        let mut noise = PathNoise::new(sim.seed, path, sim.antithetic);
        let (mut wk, mut yk, mut xik, mut zk) = (0.0, p.y0, 1.0, z0);
        w.push(wk);
        y.push(yk);
        xi.push(xik);
        z.push(zk);
        if let Some(m) = mort.as_mut() {
            m.push(p.m);
        }
        for k in 1..nt {
            let dt = times[k] - times[k - 1];
            let dw = dt.sqrt() * noise.normal();
            wk += dw;
            yk *= ((p.mu_y - 0.5 * p.sigma_y * p.sigma_y) * dt + p.sigma_y * dw).exp();
            xik *= (-(p.r + 0.5 * theta * theta) * dt - theta * dw).exp();
            let drift = (p.rho - p.r - 0.5 * theta * theta) * dt
                + model.integrated_mortality(times[k - 1], times[k]);
            zk *= (drift - theta * dw).exp();
            w.push(wk);
            y.push(yk);
            xi.push(xik);
            z.push(zk);
            if let Some(m) = mort.as_mut() {
                m.push(p.m * (p.gompertz_a * times[k]).exp());
            }
        }
    }
    Ok(PathBundle { times, n_paths: sim.n_paths, w, y, xi, z, m: mort })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_constants() {
        let m = Model::baseline();
        assert!((m.dc.theta - 0.181818181818).abs() < 1e-10);
        assert!((m.dc.kappa - 1.0 / 55.0).abs() < 1e-15);
        assert!((m.human_capital(1.0) - 55.0).abs() < 1e-12);
        assert!((m.dc.h - 0.0875).abs() < 1e-15);
        assert!(m.dc.integrable);
    }

    #[test]
    fn roots_are_ordered_and_satisfy_quadratic() {
        let m = Model::baseline();
        let (a1, a2) = (m.dc.alpha1, m.dc.alpha2);
        assert!(a1 < 0.0 && a2 > 1.0);
        for a in [a1, a2] {
            assert!(characteristic_residual(m.dc.theta, 0.01, 0.01, 0.0175, a).abs() < 1e-12);
        }
    }

    #[test]
    fn kappa_sign_is_checked() {
        let p = ModelParams { mu_y: 0.05, ..ModelParams::baseline() };
        assert!(matches!(Model::new(p), Err(Error::KappaNonPositive(k)) if k < 0.0));
    }

    #[test]
    fn gamma_one_is_rejected() {
        let p = ModelParams { gamma: 1.0, ..ModelParams::baseline() };
        assert!(validate_assumptions(&p, false).contains(&Violation::GammaIsOne));
        assert!(Model::new(p).is_err());
    }

    #[test]
    fn premium_examples() {
        assert_eq!(premium_rate(0.0, 0.0175), 0.0);
        assert!((premium_rate(0.351, 0.0175) - 0.0061425).abs() < 1e-15);
    }

    #[test]
    fn time_grid_ends_at_horizon() {
        let sim = SimConfig { n_paths: 1, dt: 0.3, horizon_t: 1.0, seed: 1, antithetic: false, stretch: 0.0 };
        let g = sim.time_grid();
        assert_eq!(g.len(), 5);
        assert_eq!(*g.last().unwrap(), 1.0);
    }

    #[test]
    fn antithetic_pairs_mirror() {
        let mut a = PathNoise::new(7, 4, true);
        let mut b = PathNoise::new(7, 5, true);
        for _ in 0..10 {
            assert_eq!(a.normal(), -b.normal());
        }
    }
}
