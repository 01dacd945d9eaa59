//! Optimal consumption, investment and life-insurance purchase timing for an
//! agent with an uncertain lifetime and spanned labour income.
//!
//! The closed-form dual solutions live in [`predetermined`], [`controlled`]
//! and [`earmarked`]; [`gompertz`] handles age-dependent mortality through an
//! integral equation for the purchase boundary; [`oracle`] holds the
//! independent Monte Carlo and dynamic-programming checks.

pub mod config;
pub mod controlled;
pub mod earmarked;
pub mod error;
pub mod format;
pub mod gompertz;
pub mod model;
pub mod numerics;
pub mod oracle;
pub mod predetermined;
pub mod report;

pub use error::{Error, Result};
pub use model::{Model, ModelParams, SimConfig};
