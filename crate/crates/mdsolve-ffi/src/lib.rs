//! C ABI for the solver library.
//!
//! The interface follows the usual opaque-handle pattern: a configuration
//! is parsed and time-marched with [`mdsolve_run_config_text`] or
//! [`mdsolve_run_config_file`], yielding a handle that must be released
//! with [`mdsolve_run_free`]. Every fallible call returns an
//! [`MdsolveStatus`]; a human-readable message for the most recent failure
//! on the calling thread is available via [`mdsolve_last_error_message`].

use mdsolve::config::RunConfig;
use mdsolve::harness::{self, run, RunSummary};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let clean: String = msg.chars().filter(|c| *c != '\0').collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).unwrap_or_default());
}

/// Result of a C API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MdsolveStatus {
    Ok = 0,
    /// A null pointer or otherwise unusable argument.
    InvalidArgument = 1,
    /// The configuration could not be parsed or validated.
    ConfigError = 2,
    /// The implicit solver or time integrator failed.
    SolverFailure = 3,
    /// Reading the configuration file failed.
    IoError = 4,
    /// An internal panic was caught at the language boundary.
    Panic = 5,
}

/// A completed run: the final state together with its summary.
pub struct MdsolveRun {
    summary: RunSummary,
    state: Vec<f64>,
}

fn run_config(cfg: &RunConfig) -> Result<MdsolveRun, MdsolveStatus> {
    match run(cfg) {
        Ok((state, summary)) => Ok(MdsolveRun {
            summary,
            state: state.as_slice().to_vec(),
        }),
        Err(e) => {
            set_last_error(&e.to_string());
            Err(if e.is_solver_failure() {
                MdsolveStatus::SolverFailure
            } else {
                MdsolveStatus::ConfigError
            })
        }
    }
}

fn guard(f: impl FnOnce() -> MdsolveStatus) -> MdsolveStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("internal panic");
            MdsolveStatus::Panic
        }
    }
}

/// Parse a configuration from text, run it and return a handle.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mdsolve_run_config_text(
    text: *const c_char,
    out: *mut *mut MdsolveRun,
) -> MdsolveStatus {
    if text.is_null() || out.is_null() {
        return MdsolveStatus::InvalidArgument;
    }
    let text = match CStr::from_ptr(text).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_last_error("configuration text is not valid UTF-8");
            return MdsolveStatus::InvalidArgument;
        }
    };
    guard(|| match RunConfig::parse(text) {
        Ok(cfg) => match run_config(&cfg) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(r));
                MdsolveStatus::Ok
            }
            Err(status) => status,
        },
        Err(e) => {
            set_last_error(&e.to_string());
            MdsolveStatus::ConfigError
        }
    })
}

/// Parse a configuration file, run it and return a handle.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mdsolve_run_config_file(
    path: *const c_char,
    out: *mut *mut MdsolveRun,
) -> MdsolveStatus {
    if path.is_null() || out.is_null() {
        return MdsolveStatus::InvalidArgument;
    }
    let path = match CStr::from_ptr(path).to_str() {
        Ok(p) => p,
        Err(_) => {
            set_last_error("path is not valid UTF-8");
            return MdsolveStatus::InvalidArgument;
        }
    };
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            set_last_error(&e.to_string());
            return MdsolveStatus::IoError;
        }
    };
    let text = match CString::new(text) {
        Ok(t) => t,
        Err(_) => {
            set_last_error("configuration contains NUL bytes");
            return MdsolveStatus::ConfigError;
        }
    };
    mdsolve_run_config_text(text.as_ptr(), out)
}

/// Release a run handle. A null handle is ignored.
///
/// # Safety
/// `handle` must come from a `mdsolve_run_*` constructor and must not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mdsolve_run_free(handle: *mut MdsolveRun) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Number of timesteps taken.
///
/// # Safety
/// `handle` must be a live run handle.
#[no_mangle]
pub unsafe extern "C" fn mdsolve_run_steps(handle: *const MdsolveRun) -> u64 {
    handle.as_ref().map_or(0, |r| r.summary.steps as u64)
}

/// Total Newton iterations across the run.
///
/// # Safety
/// `handle` must be a live run handle.
#[no_mangle]
pub unsafe extern "C" fn mdsolve_run_newton_total(handle: *const MdsolveRun) -> u64 {
    handle.as_ref().map_or(0, |r| r.summary.newton_total as u64)
}

/// Total Krylov iterations across the run.
///
/// # Safety
/// `handle` must be a live run handle.
#[no_mangle]
pub unsafe extern "C" fn mdsolve_run_gmres_total(handle: *const MdsolveRun) -> u64 {
    handle.as_ref().map_or(0, |r| r.summary.gmres_total as u64)
}

/// Wallclock seconds of the run.
///
/// # Safety
/// `handle` must be a live run handle.
#[no_mangle]
pub unsafe extern "C" fn mdsolve_run_wallclock_seconds(handle: *const MdsolveRun) -> f64 {
    handle.as_ref().map_or(0.0, |r| r.summary.wallclock_s)
}

/// Number of per-variable error entries (0 when no reference solution
/// exists for the case).
///
/// # Safety
/// `handle` must be a live run handle.
#[no_mangle]
pub unsafe extern "C" fn mdsolve_run_error_count(handle: *const MdsolveRun) -> u64 {
    handle
        .as_ref()
        .and_then(|r| r.summary.err_per_var.as_ref())
        .map_or(0, |v| v.len() as u64)
}

/// L2 error of one variable.
///
/// # Safety
/// `handle` must be a live run handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mdsolve_run_error(
    handle: *const MdsolveRun,
    index: u64,
    out: *mut f64,
) -> MdsolveStatus {
    let Some(r) = handle.as_ref() else {
        return MdsolveStatus::InvalidArgument;
    };
    if out.is_null() {
        return MdsolveStatus::InvalidArgument;
    }
    match r.summary.err_per_var.as_ref().and_then(|v| v.get(index as usize)) {
        Some(e) => {
            *out = *e;
            MdsolveStatus::Ok
        }
        None => MdsolveStatus::InvalidArgument,
    }
}

/// Sum of the per-variable L2 errors.
///
/// # Safety
/// `handle` must be a live run handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mdsolve_run_error_sum(
    handle: *const MdsolveRun,
    out: *mut f64,
) -> MdsolveStatus {
    let Some(r) = handle.as_ref() else {
        return MdsolveStatus::InvalidArgument;
    };
    if out.is_null() {
        return MdsolveStatus::InvalidArgument;
    }
    match r.summary.err_sum {
        Some(e) => {
            *out = e;
            MdsolveStatus::Ok
        }
        None => MdsolveStatus::InvalidArgument,
    }
}

/// Length of the flat final-state array
/// (`elements x nodes x nodes x variables`).
///
/// # Safety
/// `handle` must be a live run handle.
#[no_mangle]
pub unsafe extern "C" fn mdsolve_run_state_len(handle: *const MdsolveRun) -> u64 {
    handle.as_ref().map_or(0, |r| r.state.len() as u64)
}

/// Copy the flat final state into a caller-provided buffer of length
/// `len`; fails unless `len` matches [`mdsolve_run_state_len`].
///
/// # Safety
/// `handle` must be a live run handle and `buf` must point to at least
/// `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mdsolve_run_state_copy(
    handle: *const MdsolveRun,
    buf: *mut f64,
    len: u64,
) -> MdsolveStatus {
    let Some(r) = handle.as_ref() else {
        return MdsolveStatus::InvalidArgument;
    };
    if buf.is_null() || len as usize != r.state.len() {
        return MdsolveStatus::InvalidArgument;
    }
    std::ptr::copy_nonoverlapping(r.state.as_ptr(), buf, r.state.len());
    MdsolveStatus::Ok
}

/// Run the built-in invariant checks; returns `Ok` when all pass.
#[no_mangle]
pub extern "C" fn mdsolve_selftest() -> MdsolveStatus {
    guard(|| {
        for (name, outcome) in harness::selftest() {
            if let Err(msg) = outcome {
                set_last_error(&format!("{name}: {msg}"));
                return MdsolveStatus::SolverFailure;
            }
        }
        MdsolveStatus::Ok
    })
}

/// Copy the most recent error message for this thread into `buf`
/// (NUL-terminated, truncated to `len`); returns the full message length
/// excluding the terminator.
///
/// # Safety
/// `buf` must point to at least `len` bytes, or be null to query the
/// length only.
#[no_mangle]
pub unsafe extern "C" fn mdsolve_last_error_message(buf: *mut c_char, len: u64) -> u64 {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len as usize - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len() as u64
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mdsolve_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
