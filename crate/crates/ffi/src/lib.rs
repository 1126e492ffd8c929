//! C ABI for the dkcalc engine.
//!
//! Two surfaces are exposed:
//!
//! - `dkcalc_run_json`: the whole batch pipeline behind one call. The
//!   request string is the same JSON the `dkcalc` binary builds from its
//!   command line; the returned string is the full JSON response (including
//!   error responses). Free it with `dkcalc_string_free`.
//! - opaque series handles for callers that want exact graded-series
//!   arithmetic without JSON round trips: create an alphabet, parse series
//!   in the `c * g1.g2 + ...` text form, combine, format, free.
//!
//! All functions return `DkStatus`; on any status other than `Ok` the
//! thread-local message from `dkcalc_last_error` describes the failure.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::sync::Arc;

use dkcalc::alphabet::GeneratorAlphabet;
use dkcalc::error::Error;
use dkcalc::series::GradedSeries;

/// Status codes for every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DkStatus {
    Ok = 0,
    /// A pointer argument was null or not valid UTF-8/JSON.
    InvalidArgument = 1,
    /// Operands live in different algebras or truncations.
    Structural = 2,
    /// A value precondition failed (constant terms, invariance, ...).
    Domain = 3,
    /// A stated hypothesis of the underlying theory was violated.
    ContractViolation = 4,
    /// Text or JSON could not be parsed.
    Parse = 5,
    /// Outside the supported size or degree guards.
    Unsupported = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap();
    });
}

fn status_of(err: &Error) -> DkStatus {
    match err {
        Error::Structural(_) => DkStatus::Structural,
        Error::Domain(_) => DkStatus::Domain,
        Error::ContractViolation(_) => DkStatus::ContractViolation,
        Error::Parse(_) => DkStatus::Parse,
        Error::Unsupported(_) => DkStatus::Unsupported,
    }
}

/// An interned generator alphabet.
pub struct DkAlphabet {
    inner: Arc<GeneratorAlphabet>,
}

/// A truncated graded series with exact rational coefficients.
pub struct DkSeries {
    inner: GradedSeries,
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, DkStatus> {
    if ptr.is_null() {
        set_error("null pointer argument");
        return Err(DkStatus::InvalidArgument);
    }
    unsafe { CStr::from_ptr(ptr) }.to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        DkStatus::InvalidArgument
    })
}

fn leak_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .expect("no interior NUL after replacement")
        .into_raw()
}

/// Version of the underlying engine, as a static string.
#[no_mangle]
pub extern "C" fn dkcalc_version() -> *const c_char {
    concat!("dkcalc ", env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for the most recent failure on this thread. Free the returned
/// string with `dkcalc_string_free`.
#[no_mangle]
pub extern "C" fn dkcalc_last_error() -> *mut c_char {
    LAST_ERROR.with(|slot| leak_string(slot.borrow().to_string_lossy().into_owned()))
}

/// Runs one JSON request against the engine and returns the JSON response
/// (always a complete response object, also for residuals and contract
/// errors; the embedded `status` field mirrors the CLI exit code). Returns
/// null only when the request itself is unreadable.
#[no_mangle]
pub extern "C" fn dkcalc_run_json(request: *const c_char) -> *mut c_char {
    let text = match unsafe { read_str(request) } {
        Ok(t) => t,
        Err(_) => return std::ptr::null_mut(),
    };
    let value: serde_json::Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => {
            set_error(&format!("request is not valid JSON: {e}"));
            return std::ptr::null_mut();
        }
    };
    let outcome = dkcalc::api::run_request(&value);
    leak_string(outcome.body.to_string())
}

/// Frees a string returned by this library.
///
/// # Safety
/// `ptr` must have been produced by a `dkcalc_*` function and not freed yet.
#[no_mangle]
pub unsafe extern "C" fn dkcalc_string_free(ptr: *mut c_char) {
    if !ptr.is_null() {
        drop(unsafe { CString::from_raw(ptr) });
    }
}

/// Creates an alphabet from a comma-separated list of `label` or
/// `label:degree` entries (degree defaults to 1).
#[no_mangle]
pub extern "C" fn dkcalc_alphabet_new(
    spec: *const c_char,
    out: *mut *mut DkAlphabet,
) -> DkStatus {
    if out.is_null() {
        set_error("null output pointer");
        return DkStatus::InvalidArgument;
    }
    let text = match unsafe { read_str(spec) } {
        Ok(t) => t,
        Err(s) => return s,
    };
    let mut gens: Vec<(String, u32)> = Vec::new();
    for entry in text.split(',') {
        let entry = entry.trim();
        if entry.is_empty() {
            continue;
        }
        match entry.split_once(':') {
            None => gens.push((entry.to_string(), 1)),
            Some((label, degree)) => match degree.trim().parse() {
                Ok(d) => gens.push((label.trim().to_string(), d)),
                Err(_) => {
                    set_error(&format!("bad degree in alphabet entry `{entry}`"));
                    return DkStatus::Parse;
                }
            },
        }
    }
    let refs: Vec<(&str, u32)> = gens.iter().map(|(l, d)| (l.as_str(), *d)).collect();
    match GeneratorAlphabet::new(&refs) {
        Ok(inner) => {
            unsafe { *out = Box::into_raw(Box::new(DkAlphabet { inner })) };
            DkStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// # Safety
/// `ptr` must come from `dkcalc_alphabet_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dkcalc_alphabet_free(ptr: *mut DkAlphabet) {
    if !ptr.is_null() {
        drop(unsafe { Box::from_raw(ptr) });
    }
}

/// Parses a series in the text form `c1 * g1.g2 + c2 * g3 + ...` at the
/// given truncation degree.
#[no_mangle]
pub extern "C" fn dkcalc_series_parse(
    alphabet: *const DkAlphabet,
    truncation: u32,
    text: *const c_char,
    out: *mut *mut DkSeries,
) -> DkStatus {
    if alphabet.is_null() || out.is_null() {
        set_error("null pointer argument");
        return DkStatus::InvalidArgument;
    }
    let text = match unsafe { read_str(text) } {
        Ok(t) => t,
        Err(s) => return s,
    };
    let alphabet = unsafe { &*alphabet };
    match GradedSeries::parse_text(alphabet.inner.clone(), truncation, text) {
        Ok(inner) => {
            unsafe { *out = Box::into_raw(Box::new(DkSeries { inner })) };
            DkStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// Canonical text rendering of a series; free with `dkcalc_string_free`.
#[no_mangle]
pub extern "C" fn dkcalc_series_format(
    series: *const DkSeries,
    out: *mut *mut c_char,
) -> DkStatus {
    if series.is_null() || out.is_null() {
        set_error("null pointer argument");
        return DkStatus::InvalidArgument;
    }
    let series = unsafe { &*series };
    unsafe { *out = leak_string(series.inner.to_text()) };
    DkStatus::Ok
}

fn binary_op(
    a: *const DkSeries,
    b: *const DkSeries,
    out: *mut *mut DkSeries,
    op: impl FnOnce(&GradedSeries, &GradedSeries) -> dkcalc::Result<GradedSeries>,
) -> DkStatus {
    if a.is_null() || b.is_null() || out.is_null() {
        set_error("null pointer argument");
        return DkStatus::InvalidArgument;
    }
    let (a, b) = unsafe { (&*a, &*b) };
    match op(&a.inner, &b.inner) {
        Ok(inner) => {
            unsafe { *out = Box::into_raw(Box::new(DkSeries { inner })) };
            DkStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

fn unary_op(
    a: *const DkSeries,
    out: *mut *mut DkSeries,
    op: impl FnOnce(&GradedSeries) -> dkcalc::Result<GradedSeries>,
) -> DkStatus {
    if a.is_null() || out.is_null() {
        set_error("null pointer argument");
        return DkStatus::InvalidArgument;
    }
    let a = unsafe { &*a };
    match op(&a.inner) {
        Ok(inner) => {
            unsafe { *out = Box::into_raw(Box::new(DkSeries { inner })) };
            DkStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

#[no_mangle]
pub extern "C" fn dkcalc_series_add(
    a: *const DkSeries,
    b: *const DkSeries,
    out: *mut *mut DkSeries,
) -> DkStatus {
    binary_op(a, b, out, |x, y| x.add(y))
}

#[no_mangle]
pub extern "C" fn dkcalc_series_mul(
    a: *const DkSeries,
    b: *const DkSeries,
    out: *mut *mut DkSeries,
) -> DkStatus {
    binary_op(a, b, out, |x, y| x.mul(y))
}

/// exp of a series with zero constant term.
#[no_mangle]
pub extern "C" fn dkcalc_series_exp(a: *const DkSeries, out: *mut *mut DkSeries) -> DkStatus {
    unary_op(a, out, GradedSeries::exp)
}

/// log of a series with constant term 1.
#[no_mangle]
pub extern "C" fn dkcalc_series_log(a: *const DkSeries, out: *mut *mut DkSeries) -> DkStatus {
    unary_op(a, out, GradedSeries::log)
}

/// Multiplicative inverse of a series with constant term 1.
#[no_mangle]
pub extern "C" fn dkcalc_series_inverse(
    a: *const DkSeries,
    out: *mut *mut DkSeries,
) -> DkStatus {
    unary_op(a, out, GradedSeries::inverse)
}

/// # Safety
/// `ptr` must come from a series-producing call and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dkcalc_series_free(ptr: *mut DkSeries) {
    if !ptr.is_null() {
        drop(unsafe { Box::from_raw(ptr) });
    }
}
