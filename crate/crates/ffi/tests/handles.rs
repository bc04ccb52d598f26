use std::ffi::{CStr, CString};
use std::ptr;

use ramanujan_parseval_ffi::*;

fn last_error() -> String {
    let p = rp_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn scalar_functions() {
    let mut c = 0i64;
    let mut x = 0.0;
    unsafe {
        assert_eq!(rp_ramanujan_sum(12, 0, &mut c), RpStatus::Ok);
        assert_eq!(c, 4);
        assert_eq!(rp_zeta(2.0, &mut x), RpStatus::Ok);
        assert!((x - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-13);
        assert_eq!(rp_zeta(1.0, &mut x), RpStatus::Domain);
        assert!(last_error().contains("z > 1"));
        assert_eq!(rp_optimal_u(1e6, 1.0, &mut x), RpStatus::Ok);
        assert!((x - 1e4 * 1e6f64.ln().powf(4.0 / 3.0)).abs() < 1e-6 * x);
        assert_eq!(rp_error_bound(100.0, 1.0, -1.0, &mut x), RpStatus::Domain);
    }
}

#[test]
fn null_pointers_are_reported() {
    unsafe {
        assert_eq!(
            rp_ramanujan_sum(1, 1, ptr::null_mut()),
            RpStatus::NullPointer
        );
        assert!(last_error().contains("out_value"));
        let mut v = 0.0;
        assert_eq!(rp_table_get(ptr::null(), 1, &mut v), RpStatus::NullPointer);
        rp_table_free(ptr::null_mut());
        rp_mertens_free(ptr::null_mut());
        rp_family_free(ptr::null_mut());
    }
    rp_clear_error();
    assert!(rp_last_error().is_null());
}

#[test]
fn table_handles() {
    unsafe {
        let mut t: *mut RpTable = ptr::null_mut();
        assert_eq!(rp_table_euler_phi(100, &mut t), RpStatus::Ok);
        let mut limit = 0usize;
        assert_eq!(rp_table_limit(t, &mut limit), RpStatus::Ok);
        assert_eq!(limit, 100);
        let mut v = 0.0;
        assert_eq!(rp_table_get(t, 12, &mut v), RpStatus::Ok);
        assert_eq!(v, 4.0);
        assert_eq!(rp_table_get(t, 0, &mut v), RpStatus::OutOfRange);
        assert_eq!(rp_table_get(t, 101, &mut v), RpStatus::OutOfRange);

        let dir = std::env::temp_dir().join(format!("rp-handles-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let file = CString::new(dir.join("phi.bin").to_str().unwrap()).unwrap();
        assert_eq!(rp_table_write(t, file.as_ptr()), RpStatus::Ok);
        let mut back: *mut RpTable = ptr::null_mut();
        assert_eq!(rp_table_read(file.as_ptr(), &mut back), RpStatus::Ok);
        assert_eq!(rp_table_get(back, 97, &mut v), RpStatus::Ok);
        assert_eq!(v, 96.0);
        rp_table_free(back);
        rp_table_free(t);

        let missing = CString::new(dir.join("missing.bin").to_str().unwrap()).unwrap();
        let mut none: *mut RpTable = ptr::null_mut();
        assert_eq!(rp_table_read(missing.as_ptr(), &mut none), RpStatus::Io);
        assert!(none.is_null());

        let mut big: *mut RpTable = ptr::null_mut();
        assert_eq!(rp_table_divisor_k(2000, 4096, &mut big), RpStatus::Overflow);
        assert!(big.is_null());
    }
}

#[test]
fn mertens_and_partial_sums() {
    unsafe {
        let mut m: *mut RpMertens = ptr::null_mut();
        assert_eq!(rp_mertens_new(10_000, &mut m), RpStatus::Ok);
        let mut v = 0i64;
        assert_eq!(rp_mertens_get(m, 10, &mut v), RpStatus::Ok);
        assert_eq!(v, -1);
        assert_eq!(
            rp_ramanujan_partial_sum(m, 1, 10_000.0, &mut v),
            RpStatus::Ok
        );
        assert_eq!(v, -23);
        assert_eq!(
            rp_ramanujan_partial_sum(m, 1, 20_000.0, &mut v),
            RpStatus::TableTooShort
        );
        assert_eq!(rp_mertens_get(m, 10_001, &mut v), RpStatus::OutOfRange);
        rp_mertens_free(m);
    }
}

#[test]
fn families_and_main_terms() {
    unsafe {
        let mut f: *mut RpFamily = ptr::null_mut();
        let mut g: *mut RpFamily = ptr::null_mut();
        assert_eq!(rp_family_phi(1.0, &mut f), RpStatus::Ok);
        assert_eq!(rp_family_phi(1.0, &mut g), RpStatus::Ok);
        let (mut delta, mut c) = (0.0, 0.0);
        assert_eq!(rp_family_decay(f, &mut delta, &mut c), RpStatus::Ok);
        assert_eq!((delta, c), (1.0, 1.0));
        let mut x = 0.0;
        assert_eq!(rp_family_coefficient(f, 2, &mut x), RpStatus::Ok);
        assert!((x + 0.2026423672846756).abs() < 1e-12, "{x}");
        assert_eq!(rp_family_coefficient(f, 0, &mut x), RpStatus::OutOfRange);

        let mut series = RpPrediction {
            value: 0.0,
            tail_estimate: 0.0,
            route: RpRoute::SeriesPhi,
        };
        let mut euler = series;
        assert_eq!(
            rp_main_term(f, g, 0, 10_000, 1_000, &mut series),
            RpStatus::Ok
        );
        assert_eq!(series.route, RpRoute::SeriesPhi);
        assert_eq!(
            rp_main_term(f, g, 6, 10_000, 100_000, &mut euler),
            RpStatus::Ok
        );
        assert_eq!(euler.route, RpRoute::EulerPhi);

        let (mut v, mut tail) = (0.0, 0.0);
        assert_eq!(rp_expansion(f, 4, 10_000, &mut v, &mut tail), RpStatus::Ok);
        assert!((v - 0.5).abs() <= tail);
        rp_family_free(f);
        rp_family_free(g);

        let mut bad: *mut RpFamily = ptr::null_mut();
        assert_eq!(rp_family_sigma(-1.0, &mut bad), RpStatus::Domain);
        assert!(bad.is_null());
    }
}

#[test]
fn errors_are_per_thread() {
    unsafe {
        let mut x = 0.0;
        assert_eq!(rp_zeta(0.5, &mut x), RpStatus::Domain);
    }
    std::thread::spawn(|| assert!(rp_last_error().is_null()))
        .join()
        .unwrap();
    assert!(!rp_last_error().is_null());
}

#[test]
fn header_is_generated() {
    let h = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/include/ramanujan_parseval.h"
    ))
    .unwrap();
    for name in [
        "rp_ramanujan_sum",
        "rp_table_free",
        "RP_STATUS_OK",
        "typedef struct RpTable RpTable",
    ] {
        assert!(h.contains(name), "{name}");
    }
}
