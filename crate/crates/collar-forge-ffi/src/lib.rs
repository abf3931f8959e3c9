//! C ABI for collar-forge: build fixtures, construct validated global
//! collars, evaluate them, and run the Lipschitz verification.
//!
//! Conventions:
//! - Every function returns a `CfStatus` code; `CF_OK` (0) is success.
//! - Objects are opaque handles freed with the matching `_free` call.
//! - On any failure, `cf_last_error_message` returns a thread-local,
//!   NUL-terminated description valid until the next failing call on
//!   the same thread.
//! - Strings returned through out-parameters are heap-allocated and
//!   must be released with `cf_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use collar_forge::collar::{GlobalCollar, ValidationConfig};
use collar_forge::estimator::{verify, VerifyConfig};
use collar_forge::fixtures::{make_fixture, Fixture};
use collar_forge::metric::Point;

/// Status codes returned by every FFI entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CfStatus {
    /// Success.
    CfOk = 0,
    /// A pointer argument was null.
    CfNullPointer = 1,
    /// Arguments were malformed (bad UTF-8/JSON, unknown fixture,
    /// out-of-range parameter).
    CfInvalidArgument = 2,
    /// Construction or verification failed; see the error message.
    CfRuntimeError = 3,
    /// Verification completed and reported a failing verdict.
    CfVerificationFailed = 4,
    /// A panic was caught at the boundary.
    CfPanic = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|c| *c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn guard<F: FnOnce() -> CfStatus>(f: F) -> CfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic across FFI boundary".into());
            set_error(&msg);
            CfStatus::CfPanic
        }
    }
}

/// Opaque fixture handle.
pub struct CfFixture {
    inner: Fixture,
}

/// Opaque validated-collar handle.
pub struct CfCollar {
    gc: GlobalCollar,
    dim: usize,
}

unsafe fn cstr_arg<'a>(ptr: *const c_char) -> Result<&'a str, CfStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(CfStatus::CfNullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        CfStatus::CfInvalidArgument
    })
}

/// Last error message for this thread; empty string if none. The
/// pointer stays valid until the next failing call on the thread.
#[no_mangle]
pub extern "C" fn cf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Create a fixture by name with JSON parameters (e.g. `{"r": 1.0}`);
/// `params_json` may be null for defaults.
///
/// # Safety
/// `name` must be a NUL-terminated string, `params_json` null or
/// NUL-terminated, and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_fixture_new(
    name: *const c_char,
    params_json: *const c_char,
    out: *mut *mut CfFixture,
) -> CfStatus {
    guard(|| {
        if out.is_null() {
            set_error("null out pointer");
            return CfStatus::CfNullPointer;
        }
        let name = match cstr_arg(name) {
            Ok(s) => s,
            Err(st) => return st,
        };
        let params = if params_json.is_null() {
            serde_json::Value::Object(Default::default())
        } else {
            let raw = match cstr_arg(params_json) {
                Ok(s) => s,
                Err(st) => return st,
            };
            match serde_json::from_str(raw) {
                Ok(v) => v,
                Err(e) => {
                    set_error(&format!("invalid parameter JSON: {e}"));
                    return CfStatus::CfInvalidArgument;
                }
            }
        };
        match make_fixture(name, &params) {
            Ok(fixture) => {
                *out = Box::into_raw(Box::new(CfFixture { inner: fixture }));
                CfStatus::CfOk
            }
            Err(e) => {
                set_error(&e.to_string());
                CfStatus::CfInvalidArgument
            }
        }
    })
}

/// Release a fixture handle. Null is a no-op.
///
/// # Safety
/// `fixture` must have come from `cf_fixture_new` and not been freed.
#[no_mangle]
pub unsafe extern "C" fn cf_fixture_free(fixture: *mut CfFixture) {
    if !fixture.is_null() {
        drop(Box::from_raw(fixture));
    }
}

/// Construct and validate the global collar of a fixture.
///
/// # Safety
/// `fixture` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_collar_build(
    fixture: *const CfFixture,
    seed: u64,
    out: *mut *mut CfCollar,
) -> CfStatus {
    guard(|| {
        if fixture.is_null() || out.is_null() {
            set_error("null handle");
            return CfStatus::CfNullPointer;
        }
        let fixture = &(*fixture).inner;
        let cfg = ValidationConfig {
            seed,
            ..ValidationConfig::default()
        };
        match fixture.build_global(&cfg) {
            Ok(gc) => {
                let dim = fixture.dom.dim;
                *out = Box::into_raw(Box::new(CfCollar { gc, dim }));
                CfStatus::CfOk
            }
            Err(e) => {
                set_error(&e.to_string());
                CfStatus::CfRuntimeError
            }
        }
    })
}

/// Release a collar handle. Null is a no-op.
///
/// # Safety
/// `collar` must have come from `cf_collar_build` and not been freed.
#[no_mangle]
pub unsafe extern "C" fn cf_collar_free(collar: *mut CfCollar) {
    if !collar.is_null() {
        drop(Box::from_raw(collar));
    }
}

/// Ambient dimension of the collar's coordinates.
///
/// # Safety
/// `collar` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cf_collar_dim(collar: *const CfCollar) -> usize {
    if collar.is_null() {
        0
    } else {
        (*collar).dim
    }
}

/// Evaluate the global collar at a base point `x` (length `dim`) and
/// height `t` in [0,1], writing `dim` coordinates to `out`.
///
/// # Safety
/// `x` and `out` must point to `dim` readable/writable doubles.
#[no_mangle]
pub unsafe extern "C" fn cf_collar_evaluate(
    collar: *const CfCollar,
    x: *const f64,
    dim: usize,
    t: f64,
    out: *mut f64,
) -> CfStatus {
    guard(|| {
        if collar.is_null() || x.is_null() || out.is_null() {
            set_error("null handle or buffer");
            return CfStatus::CfNullPointer;
        }
        let collar = &*collar;
        if dim != collar.dim {
            set_error(&format!("dimension {dim} does not match collar dimension {}", collar.dim));
            return CfStatus::CfInvalidArgument;
        }
        let p = Point(std::slice::from_raw_parts(x, dim).to_vec());
        match collar.gc.evaluate(&p, t) {
            Ok(y) => {
                std::ptr::copy_nonoverlapping(y.0.as_ptr(), out, dim);
                CfStatus::CfOk
            }
            Err(e) => {
                set_error(&e.to_string());
                CfStatus::CfRuntimeError
            }
        }
    })
}

/// Run the Lipschitz verification with `n_pairs` sampled pairs and
/// write the full report as a JSON string to `out_json` (release with
/// `cf_string_free`). Returns `CF_OK` when all verdicts pass and
/// `CfVerificationFailed` when the report contains a failing verdict;
/// in both cases the report is written.
///
/// # Safety
/// `collar` must be a live handle and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_collar_verify_json(
    collar: *const CfCollar,
    n_pairs: usize,
    seed: u64,
    out_json: *mut *mut c_char,
) -> CfStatus {
    guard(|| {
        if collar.is_null() || out_json.is_null() {
            set_error("null handle or out pointer");
            return CfStatus::CfNullPointer;
        }
        let collar = &*collar;
        let cfg = VerifyConfig {
            n_pairs: n_pairs.max(16),
            seed,
            ..VerifyConfig::default()
        };
        let report = match verify(&collar.gc, &cfg) {
            Ok(r) => r,
            Err(e) => {
                set_error(&e.to_string());
                return CfStatus::CfRuntimeError;
            }
        };
        let json = match serde_json::to_string(&report) {
            Ok(j) => j,
            Err(e) => {
                set_error(&e.to_string());
                return CfStatus::CfRuntimeError;
            }
        };
        let c = CString::new(json).unwrap_or_default();
        *out_json = c.into_raw();
        if report.passed() {
            CfStatus::CfOk
        } else {
            set_error("verification reported failing verdicts");
            CfStatus::CfVerificationFailed
        }
    })
}

/// Serialize a fixture's description as JSON (release with
/// `cf_string_free`).
///
/// # Safety
/// `fixture` must be a live handle and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_fixture_to_json(
    fixture: *const CfFixture,
    out_json: *mut *mut c_char,
) -> CfStatus {
    guard(|| {
        if fixture.is_null() || out_json.is_null() {
            set_error("null handle or out pointer");
            return CfStatus::CfNullPointer;
        }
        match serde_json::to_string(&(*fixture).inner.spec()) {
            Ok(json) => {
                *out_json = CString::new(json).unwrap_or_default().into_raw();
                CfStatus::CfOk
            }
            Err(e) => {
                set_error(&e.to_string());
                CfStatus::CfRuntimeError
            }
        }
    })
}

/// Free a string returned by this library. Null is a no-op.
///
/// # Safety
/// `s` must have been returned by a `cf_*` function and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
