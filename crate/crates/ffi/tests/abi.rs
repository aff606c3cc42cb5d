//! Calls through the exported C functions from Rust.

use std::ffi::CStr;
use std::ptr;

use trilattice_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(tl_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn scalar_functions() {
    let (mut mid, mut rad) = (0.0, 0.0);
    let st = unsafe { tl_epstein_certified(0.0, 1.0, 6.0, 1e-8, &mut mid, &mut rad) };
    assert_eq!(st, TlStatus::Ok);
    assert!((mid - 4.658_913_6).abs() < 1e-6 && rad <= 1e-8);

    let st = unsafe { tl_riemann_certified(2.0, 1e-6, &mut mid, &mut rad) };
    assert_eq!(st, TlStatus::Ok);
    assert!((mid - std::f64::consts::PI.powi(2) / 6.0).abs() <= rad);

    let mut q = 0.0;
    assert_eq!(unsafe { tl_quadratic_form(0.5, 0.75f64.sqrt(), 1, 1, &mut q) }, TlStatus::Ok);
    assert!((q - 3.0 / 0.75f64.sqrt()).abs() < 1e-12);

    let (mut y_bar, mut y_exact) = (0.0, 0.0);
    assert_eq!(unsafe { tl_threshold(12.0, 6.0, 2, &mut y_bar, &mut y_exact) }, TlStatus::Ok);
    assert_eq!(y_bar, 7.52);
    assert!(y_exact <= y_bar);

    let mut v = 0.0;
    let st = unsafe { tl_optimal_volume(0.5, 0.8660254, 12.0, 6.0, 1.0, 1.0, 1e-10, &mut v) };
    assert_eq!(st, TlStatus::Ok);
    assert!((v - 1.07).abs() < 0.01);
    let (mut e_min, mut e_at) = (0.0, 0.0);
    unsafe {
        assert_eq!(tl_min_dilated_energy(0.5, 0.8660254, 12.0, 6.0, 1.0, 1.0, 1e-10, &mut e_min), TlStatus::Ok);
        assert_eq!(tl_lj_energy(0.5, 0.8660254, v, 12.0, 6.0, 1.0, 1.0, 1e-10, &mut e_at), TlStatus::Ok);
    }
    assert!(e_min < 0.0 && ((e_min - e_at) / e_min).abs() < 1e-10);

    let mut m = 0.0;
    assert_eq!(unsafe { tl_global_lipschitz(12.0, 6.0, 7.52, 40, &mut m) }, TlStatus::Ok);
    assert!(m > 181.0);
}

#[test]
fn errors_set_status_and_message() {
    let (mut mid, mut rad) = (0.0, 0.0);
    let st = unsafe { tl_epstein_certified(0.0, 1.0, 1.5, 1e-8, &mut mid, &mut rad) };
    assert_eq!(st, TlStatus::InvalidArgument);
    assert!(last_error().contains("1.5"));

    let st = unsafe { tl_quotient(0.5, 0.75f64.sqrt(), 12.0, 6.0, 1e-8, &mut mid, &mut rad) };
    assert_eq!(st, TlStatus::NearTriangular);

    let st = unsafe { tl_epstein_certified(0.0, 1.0, 6.0, 1e-8, ptr::null_mut(), &mut rad) };
    assert_eq!(st, TlStatus::NullPointer);
    assert!(last_error().contains("mid"));

    let mut c = ptr::null_mut();
    assert_eq!(unsafe { tl_certifier_new(6.0, 12.0, &mut c) }, TlStatus::InvalidArgument);
    assert!(c.is_null());
}

#[test]
fn certifier_handle_lifecycle() {
    let mut c = ptr::null_mut();
    unsafe {
        assert_eq!(tl_certifier_new(24.0, 6.0, &mut c), TlStatus::Ok);
        assert_eq!(tl_certifier_set_mode(c, TlMode::Paper), TlStatus::Ok);
        assert_eq!(tl_certifier_set_delta(c, 0.05), TlStatus::Ok);
        assert_eq!(tl_certifier_set_truncation(c, 20), TlStatus::Ok);
        assert_eq!(tl_certifier_set_lipschitz(c, 33.0), TlStatus::Ok);
        assert_eq!(tl_certifier_set_workers(c, 2), TlStatus::Ok);

        let mut r = ptr::null_mut();
        assert_eq!(tl_certifier_run(c, &mut r), TlStatus::Ok);
        let mut verdict = false;
        assert_eq!(tl_report_verdict(r, &mut verdict), TlStatus::Ok);
        let (mut mid, mut rad, mut x, mut y) = (0.0, 0.0, 0.0, 0.0);
        assert_eq!(tl_report_min_q(r, &mut mid, &mut rad, &mut x, &mut y), TlStatus::Ok);
        assert!(mid > 4.0);
        let json = CStr::from_ptr(tl_report_json(r)).to_str().unwrap();
        let doc: serde_json::Value = serde_json::from_str(json).unwrap();
        assert_eq!(doc["command"], "certify");
        assert_eq!(doc["result"]["data"]["verdict"], serde_json::Value::Bool(verdict));
        tl_report_free(r);

        // invalid delta is reported at run time
        assert_eq!(tl_certifier_set_delta(c, 0.03), TlStatus::Ok);
        let mut r2 = ptr::null_mut();
        assert_eq!(tl_certifier_run(c, &mut r2), TlStatus::InvalidArgument);
        assert!(r2.is_null());
        tl_certifier_free(c);
    }
    unsafe {
        tl_certifier_free(ptr::null_mut());
        tl_report_free(ptr::null_mut());
        assert_eq!(tl_certifier_set_delta(ptr::null_mut(), 0.01), TlStatus::NullPointer);
    }
}
