//! Duality gap: V(x, y) against inf_z [v(z, y) + z x] found by direct search.

use crate::error::{Error, Result};
use crate::numerics::golden_min;
use crate::predetermined::PredeterminedSolution;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityGap {
    /// Minimiser found by the search.
    pub z_min: f64,
    pub dual_min: f64,
    pub value: f64,
    pub gap: f64,
}

impl DualityGap {
    pub fn relative(&self) -> f64 {
        self.gap.abs() / self.value.abs()
    }
}

/// Scans ln z on [−40, 40] and refines the best cell by golden section.
pub fn duality_gap(sol: &PredeterminedSolution, x: f64, y: f64) -> Result<DualityGap> {
    let value = sol.value(x, y)?;
    let f = |s: f64| sol.dual_v(s.exp(), y) + s.exp() * x;
    let n = 8001;
    let (lo, hi) = (-40.0, 40.0);
    let h = (hi - lo) / (n - 1) as f64;
    let mut best = (f64::INFINITY, 0usize);
    for i in 0..n {
        let v = f(lo + i as f64 * h);
        if v < best.0 {
            best = (v, i);
        }
    }
    if !best.0.is_finite() {
        return Err(Error::NoRoot("dual objective has no finite minimum on the search range".into()));
    }
    let centre = lo + best.1 as f64 * h;
    let (s, dual_min) = golden_min(f, centre - h, centre + h, 1e-12);
    Ok(DualityGap { z_min: s.exp(), dual_min, value, gap: dual_min - value })
}

/// Largest violation of midpoint convexity of z ↦ v(z, y) + z x on a grid.
pub fn convexity_defect(sol: &PredeterminedSolution, x: f64, y: f64, zs: &[f64]) -> f64 {
    zs.windows(3)
        .map(|w| {
            let f = |z: f64| sol.dual_v(z, y) + z * x;
            let t = (w[1] - w[0]) / (w[2] - w[0]);
            let chord = (1.0 - t) * f(w[0]) + t * f(w[2]);
            (f(w[1]) - chord).max(0.0)
        })
        .fold(0.0, f64::max)
}
