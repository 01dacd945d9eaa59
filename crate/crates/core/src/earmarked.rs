//! Wealth split as x = q + x′ with q reserved for heirs. With a fixed bequest
//! the purchase boundary b̄ exists for every γ; with a chosen bequest the dual
//! gain w̃ is pasted across two points, b̃ and the threshold L̄ above which no
//! extra bequest is bought.

use crate::error::{Error, Result};
use crate::model::Model;
use crate::numerics::{brent, log_grid, sign_changes};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarmarkedPredeterminedSolution {
    pub model: Model,
    pub q: f64,
    pub bequest: f64,
    pub b_bar: f64,
    pub c1_bar: f64,
    /// (m u(l(B+q)) − m u(q))/(ρ+m).
    pub gain: f64,
}

pub fn earmarked_boundary(model: &Model, q: f64, bequest: f64) -> Result<EarmarkedPredeterminedSolution> {
    let p = &model.p;
    let dc = &model.dc;
    if !(q > 0.0) || !(bequest >= 0.0) {
        return Err(Error::Domain(format!("need q > 0 and B >= 0, got q = {q}, B = {bequest}")));
    }
    if dc.beta <= p.r {
        return Err(Error::NeedsRhoPlusMGreaterR);
    }
    let numer = p.m * model.u(p.l * (bequest + q)) - p.m * model.u(q);
    if !(numer > 0.0) {
        return Err(Error::DegenerateBoundary(format!(
            "m u(l(B+q)) - m u(q) = {numer} is not positive: insurance never pays"
        )));
    }
    let h = p.m * bequest;
    if h == 0.0 {
        return Err(Error::DegenerateBoundary("zero premium: purchase is immediate".into()));
    }
    let a1 = dc.alpha1;
    let b_bar = numer * p.r * a1 / (dc.beta * h * (a1 - 1.0));
    let c1_bar = -(h / (p.r * a1)) * b_bar.powf(1.0 - a1);
    Ok(EarmarkedPredeterminedSolution { model: *model, q, bequest, b_bar, c1_bar, gain: numer / dc.beta })
}

impl EarmarkedPredeterminedSolution {
    fn h_over_r(&self) -> f64 {
        self.model.p.m * self.bequest / self.model.p.r
    }

    /// Value and slope of the continuation branch at b̄.
    pub fn pasting_residuals(&self) -> [f64; 2] {
        let (b, a1) = (self.b_bar, self.model.dc.alpha1);
        [
            self.c1_bar * b.powf(a1) + self.h_over_r() * b - self.gain,
            self.c1_bar * a1 * b.powf(a1 - 1.0) + self.h_over_r(),
        ]
    }

    pub fn w(&self, z: f64) -> f64 {
        if z <= self.b_bar {
            0.0
        } else {
            self.c1_bar * z.powf(self.model.dc.alpha1) + self.h_over_r() * z - self.gain
        }
    }

    pub fn w_z(&self, z: f64) -> f64 {
        if z <= self.b_bar {
            0.0
        } else {
            let a1 = self.model.dc.alpha1;
            self.c1_bar * a1 * z.powf(a1 - 1.0) + self.h_over_r()
        }
    }

    pub fn w_zz(&self, z: f64) -> f64 {
        if z <= self.b_bar {
            0.0
        } else {
            let a1 = self.model.dc.alpha1;
            self.c1_bar * a1 * (a1 - 1.0) * z.powf(a1 - 2.0)
        }
    }

    /// Running dual gain m u(q) − m u(l(B+q)) + m B z.
    pub fn gain_rate(&self, z: f64) -> f64 {
        self.model.p.m * self.bequest * z - self.gain * self.model.dc.beta
    }
}

/// L̄ = q^{−γ} l^{1−γ} r/(ρ+m).
pub fn threshold_l(model: &Model, q: f64) -> f64 {
    let p = &model.p;
    q.powf(-p.gamma) * p.l.powf(1.0 - p.gamma) * p.r / model.dc.beta
}

fn c_coefficient(model: &Model) -> f64 {
    let p = &model.p;
    let g = p.gamma;
    p.m * p.l.powf((1.0 - g) / g) * (g / (1.0 - g)) * p.r.powf((1.0 - g) / g) * model.dc.beta.powf(-1.0 / g)
}

/// ũ(z) and the extra bequest bought on top of q.
pub fn tilde_u(model: &Model, q: f64, z: f64) -> (f64, f64) {
    let p = &model.p;
    let g = p.gamma;
    let l_bar = threshold_l(model, q);
    if z < l_bar {
        let value = c_coefficient(model) * z.powf((g - 1.0) / g) + z * p.m * q / p.r;
        let bequest = (z * model.dc.beta / p.r).powf(-1.0 / g) * p.l.powf((1.0 - g) / g) - q;
        (value, bequest)
    } else {
        (p.m * model.u(p.l * q) / model.dc.beta, 0.0)
    }
}

/// Hypothesis checks for the two-point pasting solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionReport {
    pub below_threshold: bool,
    /// F(b̃) = m u(q) − K ũ(b̃) + b̃ K m q/r, required ≤ 0.
    pub f_at_boundary: f64,
    /// Minimum of w̃ over the certificate grid, required ≥ 0.
    pub min_w: f64,
    pub conditions_ok: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarmarkedControlledSolution {
    pub model: Model,
    pub q: f64,
    pub b_tilde: f64,
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub l_bar: f64,
    pub delta: f64,
    pub c: f64,
    pub conditions: ConditionReport,
}

struct Pasting {
    c: f64,
    c0: f64,
    delta: f64,
    l_bar: f64,
    p: f64,
    a1: f64,
    a2: f64,
}

impl Pasting {
    /// Scaled coefficients Â_i = A_i b^{α_i} from value matching and smooth
    /// fit at b.
    fn scaled(&self, b: f64) -> (f64, f64) {
        let r1 = self.c * b.powf(self.p) - self.c0;
        let r2 = self.c * self.p * b.powf(self.p);
        let s2 = (r2 - self.a1 * r1) / (self.a2 - self.a1);
        (r1 - s2, s2)
    }

    /// Value-matching residual at L̄ once B₁ is fixed by smooth fit there.
    fn residual(&self, b: f64) -> f64 {
        let (_, s2) = self.scaled(b);
        let l = self.l_bar;
        s2 * (l / b).powf(self.a2) * (1.0 - self.a2 / self.a1) + self.c0
            - self.c * l.powf(self.p) * (1.0 - self.p / self.a1)
            - self.delta
    }
}

/// Solves the four pasting equations for (A₁, A₂, B₁, b̃) with b̃ < L̄.
pub fn smooth_fit_solve(model: &Model, q: f64) -> Result<EarmarkedControlledSolution> {
    model.require_integrable()?;
    if !(q > 0.0) {
        return Err(Error::Domain(format!("earmark q = {q} must be positive")));
    }
    let p = &model.p;
    let g = p.gamma;
    let beta = model.dc.beta;
    let l_bar = threshold_l(model, q);
    let sys = Pasting {
        c: c_coefficient(model),
        c0: p.m * model.u(q) / beta,
        delta: (p.m * model.u(q) - p.m * model.u(p.l * q)) / beta,
        l_bar,
        p: (g - 1.0) / g,
        a1: model.dc.alpha1,
        a2: model.dc.alpha2,
    };
    let grid = log_grid(l_bar * 1e-12, l_bar * (1.0 - 1e-10), 4000);
    let brackets = sign_changes(|b| sys.residual(b), &grid);
    let (lo, hi) = match brackets.len() {
        0 => {
            return Err(Error::UnsupportedRegime(
                "no pasting point below the threshold L: the purchase rule needs more than one boundary"
                    .into(),
            ))
        }
        1 => brackets[0],
        n => return Err(Error::MultipleRoots { what: "the pasting point b_tilde", count: n }),
    };
    let b = brent(|b| sys.residual(b), lo, hi, lo * 1e-15, 200)?;
    let (s1, s2) = sys.scaled(b);
    let (a1c, a2c) = (s1 * b.powf(-sys.a1), s2 * b.powf(-sys.a2));
    let b1 = (a1c * sys.a1 * l_bar.powf(sys.a1 - 1.0) + a2c * sys.a2 * l_bar.powf(sys.a2 - 1.0)
        - sys.c * sys.p * l_bar.powf(sys.p - 1.0))
        / (sys.a1 * l_bar.powf(sys.a1 - 1.0));
    let mut sol = EarmarkedControlledSolution {
        model: *model,
        q,
        b_tilde: b,
        a1: a1c,
        a2: a2c,
        b1,
        l_bar,
        delta: sys.delta,
        c: sys.c,
        conditions: ConditionReport { below_threshold: b < l_bar, f_at_boundary: 0.0, min_w: 0.0, conditions_ok: false },
    };
    let f_at = p.m * model.u(q) - model.dc.k * tilde_u(model, q, b).0 + b * model.dc.k * p.m * q / p.r;
    let min_w = log_grid(b * 1e-2, l_bar * 1e2, 10_000)
        .into_iter()
        .map(|z| sol.w_raw(z))
        .fold(f64::INFINITY, f64::min);
    let tol = 1e-12 * (1.0 + sys.delta.abs() + sys.c0.abs());
    sol.conditions = ConditionReport {
        below_threshold: b < l_bar,
        f_at_boundary: f_at,
        min_w,
        conditions_ok: b < l_bar && f_at <= 0.0 && min_w >= -tol,
    };
    Ok(sol)
}

impl EarmarkedControlledSolution {
    fn pw(&self) -> f64 {
        (self.model.p.gamma - 1.0) / self.model.p.gamma
    }

    fn c0(&self) -> f64 {
        self.model.p.m * self.model.u(self.q) / self.model.dc.beta
    }

    fn w_raw(&self, z: f64) -> f64 {
        if z <= self.b_tilde {
            0.0
        } else if z <= self.l_bar {
            self.middle(z)
        } else {
            self.b1 * z.powf(self.model.dc.alpha1) + self.delta
        }
    }

    fn middle(&self, z: f64) -> f64 {
        let (a1, a2) = (self.model.dc.alpha1, self.model.dc.alpha2);
        self.a1 * z.powf(a1) + self.a2 * z.powf(a2) + self.c0() - self.c * z.powf(self.pw())
    }

    fn middle_z(&self, z: f64) -> f64 {
        let (a1, a2) = (self.model.dc.alpha1, self.model.dc.alpha2);
        let p = self.pw();
        self.a1 * a1 * z.powf(a1 - 1.0) + self.a2 * a2 * z.powf(a2 - 1.0) - self.c * p * z.powf(p - 1.0)
    }

    fn middle_zz(&self, z: f64) -> f64 {
        let (a1, a2) = (self.model.dc.alpha1, self.model.dc.alpha2);
        let p = self.pw();
        self.a1 * a1 * (a1 - 1.0) * z.powf(a1 - 2.0) + self.a2 * a2 * (a2 - 1.0) * z.powf(a2 - 2.0)
            - self.c * p * (p - 1.0) * z.powf(p - 2.0)
    }

    fn ensure_ok(&self) -> Result<()> {
        if self.conditions.conditions_ok {
            Ok(())
        } else {
            Err(Error::UnsupportedRegime(format!(
                "verification conditions fail (b < L: {}, F(b) = {:e}, min w = {:e})",
                self.conditions.below_threshold, self.conditions.f_at_boundary, self.conditions.min_w
            )))
        }
    }

    pub fn tilde_w(&self, z: f64) -> Result<f64> {
        self.ensure_ok()?;
        Ok(self.w_raw(z))
    }

    pub fn tilde_w_z(&self, z: f64) -> Result<f64> {
        self.ensure_ok()?;
        let a1 = self.model.dc.alpha1;
        Ok(if z <= self.b_tilde {
            0.0
        } else if z <= self.l_bar {
            self.middle_z(z)
        } else {
            self.b1 * a1 * z.powf(a1 - 1.0)
        })
    }

    pub fn tilde_w_zz(&self, z: f64) -> Result<f64> {
        self.ensure_ok()?;
        let a1 = self.model.dc.alpha1;
        Ok(if z <= self.b_tilde {
            0.0
        } else if z <= self.l_bar {
            self.middle_zz(z)
        } else {
            self.b1 * a1 * (a1 - 1.0) * z.powf(a1 - 2.0)
        })
    }

    /// Residuals of the four pasting equations (value and slope at b̃, then
    /// value and slope at L̄).
    pub fn residuals(&self) -> [f64; 4] {
        let a1 = self.model.dc.alpha1;
        let (b, l) = (self.b_tilde, self.l_bar);
        [
            self.middle(b),
            self.middle_z(b),
            self.middle(l) - self.b1 * l.powf(a1) - self.delta,
            self.middle_z(l) - self.b1 * a1 * l.powf(a1 - 1.0),
        ]
    }
}
