//! C ABI over `lobspatial`: load a model bundle, build order-book states and
//! query likelihoods, distributions and top-k predictions.
//!
//! Every fallible function returns a [`LobsStatus`]; on failure the message is
//! available from [`lobs_last_error`] on the same thread. Handles are opaque
//! and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use lobspatial::data::{JointMove, LOBState, LEVELS};
use lobspatial::models::{joint_loglik, joint_pmf, load_model, predict_topk, Family, Model};
use lobspatial::Error;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LobsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    Numeric = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Model families, matching the bundle's `family` field.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LobsFamily {
    Naive = 0,
    Logistic = 1,
    Standard = 2,
    Spatial = 3,
}

/// A loaded model bundle.
pub struct LobsModel(Model);

/// An order-book state.
pub struct LobsState(LOBState);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> LobsStatus {
    match e {
        Error::Io { .. } => LobsStatus::Io,
        Error::Parse { .. } | Error::Json(_) | Error::Csv(_) => LobsStatus::Parse,
        Error::NotANumber(_) | Error::Diverged { .. } | Error::ZeroProbability { .. } | Error::BoundViolation { .. } => {
            LobsStatus::Numeric
        }
        _ => LobsStatus::InvalidArgument,
    }
}

fn fail(status: LobsStatus, msg: impl Into<String>) -> LobsStatus {
    set_error(msg.into());
    status
}

fn guard(f: impl FnOnce() -> Result<(), LobsStatus>) -> LobsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LobsStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(LobsStatus::Panic, "internal panic"),
    }
}

fn lift<T>(r: lobspatial::Result<T>) -> Result<T, LobsStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, LobsStatus> {
    p.as_ref().ok_or_else(|| fail(LobsStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, LobsStatus> {
    p.as_mut().ok_or_else(|| fail(LobsStatus::NullPointer, format!("{what} is null")))
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn lobs_last_error(buf: *mut c_char, len: usize) -> usize {
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

/// Number of price levels per side expected by [`lobs_state_new`].
#[no_mangle]
pub extern "C" fn lobs_levels() -> usize {
    LEVELS
}

/// Load a JSON model bundle from `path`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lobs_model_load(path: *const c_char, out: *mut *mut LobsModel) -> LobsStatus {
    guard(|| {
        let path = deref(path, "path")?;
        let out = out_ref(out, "out")?;
        let s = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| fail(LobsStatus::InvalidArgument, "path is not UTF-8"))?;
        let model = lift(load_model(Path::new(s)))?;
        *out = Box::into_raw(Box::new(LobsModel(model)));
        Ok(())
    })
}

/// Release a model. Null is ignored.
///
/// # Safety
/// `model` must come from [`lobs_model_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lobs_model_free(model: *mut LobsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn lobs_model_family(model: *const LobsModel, out: *mut LobsFamily) -> LobsStatus {
    guard(|| {
        let m = deref(model, "model")?;
        *out_ref(out, "out")? = match m.0.family() {
            Family::Naive => LobsFamily::Naive,
            Family::Logistic => LobsFamily::Logistic,
            Family::Standard => LobsFamily::Standard,
            Family::Spatial => LobsFamily::Spatial,
        };
        Ok(())
    })
}

/// Number of values per component on the model's truncated grid.
///
/// # Safety
/// `model` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn lobs_model_grid_size(model: *const LobsModel, out: *mut usize) -> LobsStatus {
    guard(|| {
        let m = deref(model, "model")?;
        *out_ref(out, "out")? = m.0.as_dyn().grid().size();
        Ok(())
    })
}

/// Build a state from prices in ticks and `lobs_levels()` sizes per side.
///
/// # Safety
/// `ask_sizes` and `bid_sizes` must be valid for `levels` values; `out` must
/// be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lobs_state_new(
    timestamp_ns: i64,
    best_ask_price: i64,
    best_bid_price: i64,
    ask_sizes: *const u64,
    bid_sizes: *const u64,
    levels: usize,
    out: *mut *mut LobsState,
) -> LobsStatus {
    guard(|| {
        deref(ask_sizes, "ask_sizes")?;
        deref(bid_sizes, "bid_sizes")?;
        let out = out_ref(out, "out")?;
        let state = LOBState {
            timestamp: timestamp_ns,
            best_ask_price,
            best_bid_price,
            ask_sizes: std::slice::from_raw_parts(ask_sizes, levels).to_vec(),
            bid_sizes: std::slice::from_raw_parts(bid_sizes, levels).to_vec(),
            halted: false,
        };
        lift(state.validate())?;
        *out = Box::into_raw(Box::new(LobsState(state)));
        Ok(())
    })
}

/// Release a state. Null is ignored.
///
/// # Safety
/// `state` must come from [`lobs_state_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lobs_state_free(state: *mut LobsState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Joint log-likelihood of the move `(y1, y2)`; `-inf` for impossible moves.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn lobs_log_prob(
    model: *const LobsModel,
    state: *const LobsState,
    y1: i64,
    y2: i64,
    out: *mut f64,
) -> LobsStatus {
    guard(|| {
        let m = deref(model, "model")?.0.as_dyn();
        let s = deref(state, "state")?;
        let out = out_ref(out, "out")?;
        *out = lift(joint_loglik(m, &m.prepare(&s.0), JointMove::new(y1, y2)))?;
        Ok(())
    })
}

/// Materialized joint distribution over the grid, `y1`-major: entry
/// `i * size + j` is `P[y1 = i - half, y2 = j - half]`. `residual` receives the
/// mass outside the grid. `len` must be at least `size * size`.
///
/// # Safety
/// `probs` must be valid for `len` values; the other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn lobs_joint_pmf(
    model: *const LobsModel,
    state: *const LobsState,
    probs: *mut f64,
    len: usize,
    residual: *mut f64,
) -> LobsStatus {
    guard(|| {
        let m = deref(model, "model")?.0.as_dyn();
        let s = deref(state, "state")?;
        let residual = out_ref(residual, "residual")?;
        out_ref(probs, "probs")?;
        let need = m.grid().size() * m.grid().size();
        if len < need {
            return Err(fail(LobsStatus::BufferTooSmall, format!("probs needs {need} values, got {len}")));
        }
        let d = lift(joint_pmf(m, &m.prepare(&s.0)))?;
        std::slice::from_raw_parts_mut(probs, need).copy_from_slice(&d.probs);
        *residual = d.residual;
        Ok(())
    })
}

/// The `k` most probable moves in decreasing probability.
///
/// # Safety
/// `y1`, `y2` and `probs` must be valid for `k` values; the other pointers
/// must be valid.
#[no_mangle]
pub unsafe extern "C" fn lobs_topk(
    model: *const LobsModel,
    state: *const LobsState,
    k: usize,
    y1: *mut i64,
    y2: *mut i64,
    probs: *mut f64,
) -> LobsStatus {
    guard(|| {
        let m = deref(model, "model")?.0.as_dyn();
        let s = deref(state, "state")?;
        out_ref(y1, "y1")?;
        out_ref(y2, "y2")?;
        out_ref(probs, "probs")?;
        let top = lift(predict_topk(m, &m.prepare(&s.0), k))?;
        let (a, b, p) = (
            std::slice::from_raw_parts_mut(y1, k),
            std::slice::from_raw_parts_mut(y2, k),
            std::slice::from_raw_parts_mut(probs, k),
        );
        for (i, (mv, pr)) in top.into_iter().enumerate() {
            a[i] = mv.y1;
            b[i] = mv.y2;
            p[i] = pr;
        }
        Ok(())
    })
}
