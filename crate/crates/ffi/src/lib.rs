//! C interface to `bequest-core`.
//!
//! Every function returns a [`BqStatus`]; results go through out-pointers.
//! Models are opaque handles created with [`bq_model_new`] and released with
//! [`bq_model_free`]. The message for the last non-OK status on the calling
//! thread is available from [`bq_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bequest_core::earmarked::{earmarked_boundary, smooth_fit_solve};
use bequest_core::model::ModelParams;
use bequest_core::predetermined::{PolicyDecision, Region};
use bequest_core::{controlled, predetermined, Error, Model};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParams = 2,
    Domain = 3,
    Solver = 4,
    Unsupported = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BqRegion {
    Continue = 0,
    Stop = 1,
}

/// Model parameters; field names follow the configuration keys.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BqParams {
    pub mu: f64,
    pub sigma: f64,
    pub r: f64,
    pub rho: f64,
    pub gamma: f64,
    pub mu_y: f64,
    pub sigma_y: f64,
    pub l: f64,
    pub m: f64,
    pub bequest_b: f64,
    pub earmark_q: f64,
    pub gompertz_a: f64,
    pub x0: f64,
    pub y0: f64,
}

impl From<BqParams> for ModelParams {
    fn from(p: BqParams) -> Self {
        ModelParams {
            mu: p.mu,
            sigma: p.sigma,
            r: p.r,
            rho: p.rho,
            gamma: p.gamma,
            mu_y: p.mu_y,
            sigma_y: p.sigma_y,
            l: p.l,
            m: p.m,
            bequest_b: p.bequest_b,
            earmark_q: p.earmark_q,
            gompertz_a: p.gompertz_a,
            x0: p.x0,
            y0: p.y0,
        }
    }
}

impl From<ModelParams> for BqParams {
    fn from(p: ModelParams) -> Self {
        BqParams {
            mu: p.mu,
            sigma: p.sigma,
            r: p.r,
            rho: p.rho,
            gamma: p.gamma,
            mu_y: p.mu_y,
            sigma_y: p.sigma_y,
            l: p.l,
            m: p.m,
            bequest_b: p.bequest_b,
            earmark_q: p.earmark_q,
            gompertz_a: p.gompertz_a,
            x0: p.x0,
            y0: p.y0,
        }
    }
}

/// Feedback decision at (x, y).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BqPolicy {
    pub region: BqRegion,
    pub consumption: f64,
    /// Amount held in the risky asset.
    pub investment: f64,
    pub z_star: f64,
    pub bequest: f64,
}

impl From<PolicyDecision> for BqPolicy {
    fn from(d: PolicyDecision) -> Self {
        BqPolicy {
            region: match d.region {
                Region::Continue => BqRegion::Continue,
                Region::Stop => BqRegion::Stop,
            },
            consumption: d.consumption,
            investment: d.investment,
            z_star: d.z_star,
            bequest: d.bequest,
        }
    }
}

/// Earmarked case with the bequest chosen at purchase.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BqEarmarked {
    pub b_tilde: f64,
    pub l_bar: f64,
    /// 1 when every verification condition holds.
    pub conditions_ok: i32,
}

/// Opaque model handle.
pub struct BqModel {
    model: Model,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> BqStatus {
    match e {
        Error::InvalidParams(_) | Error::KappaNonPositive(_) => BqStatus::InvalidParams,
        Error::Domain(_) | Error::AdmissibilityViolated(_) | Error::NonFiniteUtility(_) => BqStatus::Domain,
        Error::ImmediatePurchase | Error::UnsupportedRegime(_) => BqStatus::Unsupported,
        _ => BqStatus::Solver,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), Error>>(f: F) -> BqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BqStatus::Ok,
        Ok(Err(e)) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            BqStatus::Panic
        }
    }
}

macro_rules! nonnull {
    ($($p:expr),+) => {
        if $($p.is_null())||+ {
            set_error("null pointer argument".into());
            return BqStatus::NullPointer;
        }
    };
}

/// Writes the baseline calibration to `out`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bq_params_baseline(out: *mut BqParams) -> BqStatus {
    nonnull!(out);
    *out = ModelParams::baseline().into();
    BqStatus::Ok
}

/// Validates `params` and creates a model handle in `*out`.
///
/// # Safety
/// `params` must be null or point to a valid `BqParams`; `out` must be null
/// or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bq_model_new(params: *const BqParams, out: *mut *mut BqModel) -> BqStatus {
    nonnull!(params, out);
    *out = ptr::null_mut();
    let p: ModelParams = (*params).into();
    guard(|| {
        let model = Model::new(p)?;
        *out = Box::into_raw(Box::new(BqModel { model }));
        Ok(())
    })
}

/// Releases a handle from [`bq_model_new`]. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bq_model_free(model: *mut BqModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Dual purchase boundary b and coefficient C₁ for the fixed bequest.
/// Returns `BQ_STATUS_UNSUPPORTED` when purchase is immediate.
///
/// # Safety
/// `model` must be a live handle; `b` and `c1` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bq_predetermined_boundary(model: *const BqModel, b: *mut f64, c1: *mut f64) -> BqStatus {
    nonnull!(model, b, c1);
    let m = &(*model).model;
    guard(|| {
        let fb = predetermined::solve(m)?.boundary.ok_or(Error::ImmediatePurchase)?;
        *b = fb.b;
        *c1 = fb.c1;
        Ok(())
    })
}

/// Wealth level b̂(y) at which the fixed bequest is bought.
///
/// # Safety
/// `model` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bq_predetermined_wealth_boundary(model: *const BqModel, y: f64, out: *mut f64) -> BqStatus {
    nonnull!(model, out);
    let m = &(*model).model;
    guard(|| {
        *out = predetermined::solve(m)?.primal_boundary(y)?;
        Ok(())
    })
}

/// Value V(x, y) with the fixed bequest.
///
/// # Safety
/// `model` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bq_predetermined_value(model: *const BqModel, x: f64, y: f64, out: *mut f64) -> BqStatus {
    nonnull!(model, out);
    let m = &(*model).model;
    guard(|| {
        *out = predetermined::solve(m)?.value(x, y)?;
        Ok(())
    })
}

/// Optimal policy at (x, y) with the fixed bequest.
///
/// # Safety
/// `model` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bq_predetermined_policy(model: *const BqModel, x: f64, y: f64, out: *mut BqPolicy) -> BqStatus {
    nonnull!(model, out);
    let m = &(*model).model;
    guard(|| {
        *out = predetermined::solve(m)?.policy(x, y)?.into();
        Ok(())
    })
}

/// Value V^B(x, y) when the bequest is chosen at purchase.
///
/// # Safety
/// `model` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bq_controlled_value(model: *const BqModel, x: f64, y: f64, out: *mut f64) -> BqStatus {
    nonnull!(model, out);
    let m = &(*model).model;
    guard(|| {
        *out = controlled::solve(m)?.value(x, y)?;
        Ok(())
    })
}

/// Optimal policy at (x, y) when the bequest is chosen at purchase.
///
/// # Safety
/// `model` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bq_controlled_policy(model: *const BqModel, x: f64, y: f64, out: *mut BqPolicy) -> BqStatus {
    nonnull!(model, out);
    let m = &(*model).model;
    guard(|| {
        *out = controlled::solve(m)?.policy(x, y)?.into();
        Ok(())
    })
}

/// Dual boundary b̄ for fixed bequest `bequest` on top of earmark `q`.
///
/// # Safety
/// `model` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bq_earmarked_boundary(model: *const BqModel, q: f64, bequest: f64, out: *mut f64) -> BqStatus {
    nonnull!(model, out);
    let m = &(*model).model;
    guard(|| {
        *out = earmarked_boundary(m, q, bequest)?.b_bar;
        Ok(())
    })
}

/// Pasting points for earmark `q` with the bequest chosen at purchase.
///
/// # Safety
/// `model` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bq_earmarked_controlled(model: *const BqModel, q: f64, out: *mut BqEarmarked) -> BqStatus {
    nonnull!(model, out);
    let m = &(*model).model;
    guard(|| {
        let s = smooth_fit_solve(m, q)?;
        *out = BqEarmarked { b_tilde: s.b_tilde, l_bar: s.l_bar, conditions_ok: s.conditions.conditions_ok as i32 };
        Ok(())
    })
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`) and returns its full length in bytes.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes of writes.
#[no_mangle]
pub unsafe extern "C" fn bq_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn bq_status_message(status: BqStatus) -> *const c_char {
    let s: &'static CStr = match status {
        BqStatus::Ok => c"ok",
        BqStatus::NullPointer => c"null pointer argument",
        BqStatus::InvalidParams => c"invalid parameters",
        BqStatus::Domain => c"argument outside the domain",
        BqStatus::Solver => c"solver failure",
        BqStatus::Unsupported => c"unsupported regime",
        BqStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}
