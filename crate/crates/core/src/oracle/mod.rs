//! Independent checks of the closed-form solutions: Monte Carlo valuation of
//! feedback rules, a lattice dynamic-programming solution of the dual stopping
//! problems, the duality gap and residuals of the variational inequalities.

pub mod dp;
pub mod duality;
pub mod hjb;
pub mod mc;
pub mod perturbation;
pub mod rules;
pub mod suite;

pub use mc::{mc_value, Action, FeedbackRule, McEstimate, McReport};
