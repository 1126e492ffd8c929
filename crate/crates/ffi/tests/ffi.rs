//! Exercises the C ABI exactly as a foreign caller would: through raw
//! pointers and status codes.

use std::ffi::{CStr, CString};

use dkcalc_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take_string(ptr: *mut std::ffi::c_char) -> String {
    assert!(!ptr.is_null());
    let s = unsafe { CStr::from_ptr(ptr) }.to_str().unwrap().to_string();
    unsafe { dkcalc_string_free(ptr) };
    s
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(dkcalc_version()) }.to_str().unwrap();
    assert!(v.starts_with("dkcalc "));
}

#[test]
fn series_round_trip_through_the_abi() {
    unsafe {
        let mut alphabet: *mut DkAlphabet = std::ptr::null_mut();
        let spec = cstr("x,y");
        assert_eq!(dkcalc_alphabet_new(spec.as_ptr(), &mut alphabet), DkStatus::Ok);

        let mut a: *mut DkSeries = std::ptr::null_mut();
        let text = cstr("x + 1/2 * x.y");
        assert_eq!(
            dkcalc_series_parse(alphabet, 4, text.as_ptr(), &mut a),
            DkStatus::Ok
        );

        // exp then log returns the original series
        let mut e: *mut DkSeries = std::ptr::null_mut();
        assert_eq!(dkcalc_series_exp(a, &mut e), DkStatus::Ok);
        let mut back: *mut DkSeries = std::ptr::null_mut();
        assert_eq!(dkcalc_series_log(e, &mut back), DkStatus::Ok);
        let mut rendered: *mut std::ffi::c_char = std::ptr::null_mut();
        assert_eq!(dkcalc_series_format(back, &mut rendered), DkStatus::Ok);
        assert_eq!(take_string(rendered), "x + 1/2 * x.y");

        // noncommutativity shows up through the ABI
        let mut x: *mut DkSeries = std::ptr::null_mut();
        let mut y: *mut DkSeries = std::ptr::null_mut();
        let tx = cstr("x");
        let ty = cstr("y");
        assert_eq!(dkcalc_series_parse(alphabet, 4, tx.as_ptr(), &mut x), DkStatus::Ok);
        assert_eq!(dkcalc_series_parse(alphabet, 4, ty.as_ptr(), &mut y), DkStatus::Ok);
        let mut xy: *mut DkSeries = std::ptr::null_mut();
        let mut yx: *mut DkSeries = std::ptr::null_mut();
        assert_eq!(dkcalc_series_mul(x, y, &mut xy), DkStatus::Ok);
        assert_eq!(dkcalc_series_mul(y, x, &mut yx), DkStatus::Ok);
        let mut sx: *mut std::ffi::c_char = std::ptr::null_mut();
        let mut sy: *mut std::ffi::c_char = std::ptr::null_mut();
        assert_eq!(dkcalc_series_format(xy, &mut sx), DkStatus::Ok);
        assert_eq!(dkcalc_series_format(yx, &mut sy), DkStatus::Ok);
        assert_ne!(take_string(sx), take_string(sy));

        for p in [a, e, back, x, y, xy, yx] {
            dkcalc_series_free(p);
        }
        dkcalc_alphabet_free(alphabet);
    }
}

#[test]
fn domain_errors_surface_with_messages() {
    unsafe {
        let mut alphabet: *mut DkAlphabet = std::ptr::null_mut();
        let spec = cstr("x");
        assert_eq!(dkcalc_alphabet_new(spec.as_ptr(), &mut alphabet), DkStatus::Ok);
        let mut one: *mut DkSeries = std::ptr::null_mut();
        let text = cstr("1 + x");
        assert_eq!(
            dkcalc_series_parse(alphabet, 3, text.as_ptr(), &mut one),
            DkStatus::Ok
        );
        let mut out: *mut DkSeries = std::ptr::null_mut();
        // exp of something with constant term 1 is a domain error
        assert_eq!(dkcalc_series_exp(one, &mut out), DkStatus::Domain);
        let message = take_string(dkcalc_last_error());
        assert!(message.contains("constant term"), "message: {message}");
        dkcalc_series_free(one);
        dkcalc_alphabet_free(alphabet);
    }
}

#[test]
fn run_json_drives_the_full_engine() {
    unsafe {
        let request = cstr(r#"{"command":"dk-dim","n":3,"max":4}"#);
        let response = dkcalc_run_json(request.as_ptr());
        let body: serde_json::Value = serde_json::from_str(&take_string(response)).unwrap();
        assert_eq!(body["status"], "ok");
        assert_eq!(body["result"]["dimensions"], serde_json::json!([3, 1, 2, 3]));

        // malformed request: null result plus a last-error message
        let bad = cstr("not json");
        let response = dkcalc_run_json(bad.as_ptr());
        assert!(response.is_null());
        let message = take_string(dkcalc_last_error());
        assert!(message.contains("JSON"));
    }
}
