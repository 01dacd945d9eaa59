use thiserror::Error;

use crate::model::Violation;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {}", join(.0))]
    InvalidParams(Vec<Violation>),
    #[error("kappa = {0} is not positive: human capital is unbounded")]
    KappaNonPositive(f64),
    #[error("rho + m must exceed r for the free-boundary solution")]
    NeedsRhoPlusMGreaterR,
    #[error("gamma > 1: purchase is immediate and no wealth threshold exists")]
    ImmediatePurchase,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no root found: {0}")]
    NoRoot(String),
    #[error("{count} sign changes found for {what}; expected exactly one")]
    MultipleRoots { what: &'static str, count: usize },
    #[error("admissibility violated: {0}")]
    AdmissibilityViolated(String),
    #[error("non-finite utility: {0}")]
    NonFiniteUtility(String),
    #[error("degenerate boundary: {0}")]
    DegenerateBoundary(String),
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
    #[error("no convergence after {iters} iterations (last movement {movement:e})")]
    NoConvergence { iters: usize, movement: f64 },
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
