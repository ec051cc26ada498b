use std::ffi::CStr;
use std::ptr;

use refprice_ffi::*;

fn example() -> *mut RpMarket {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { rp_market_example(&mut m) }, RpStatus::Ok);
    assert!(!m.is_null());
    m
}

fn spec() -> RpMarketSpec {
    RpMarketSpec {
        alpha: [5.0, 6.0],
        beta: [2.0, 3.0],
        delta: [0.4, 0.7],
        gamma: [0.1, 0.5],
        theta: [0.8, 0.2],
        a: 0.4,
        p_lo: 1.0,
        p_hi: 2.0,
        m: f64::NAN,
    }
}

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    unsafe {
        rp_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn market_from_spec_matches_example() {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { rp_market_new(&spec(), &mut m) }, RpStatus::Ok);
    let mut margin = 0.0;
    assert_eq!(unsafe { rp_market_margin(m, &mut margin) }, RpStatus::Ok);
    assert!((margin - 2.5).abs() < 1e-15);

    let mut sne = RpSne::default();
    assert_eq!(unsafe { rp_sne(m, &mut sne) }, RpStatus::Ok);
    assert!((sne.p1_star - 1.412688608488485).abs() < 1e-12);
    assert!((sne.p2_star - 1.2803317744639549).abs() < 1e-12);
    assert!((sne.r_star - 1.386217241683579).abs() < 1e-12);
    assert!(sne.interior);

    let mut g = 1.0;
    assert_eq!(
        unsafe { rp_gradient(m, 1, sne.p1_star, sne.p2_star, sne.r_star, &mut g) },
        RpStatus::Ok
    );
    assert!(g.abs() < 1e-10);
    unsafe { rp_market_free(m) };
}

#[test]
fn invalid_spec_reports_field() {
    let mut s = spec();
    s.theta = [0.8, 0.3];
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { rp_market_new(&s, &mut m) }, RpStatus::InvalidParams);
    assert!(m.is_null());
    assert!(last_error().contains("theta"), "{}", last_error());
    let n = unsafe { rp_last_error_message(ptr::null_mut(), 0) };
    assert_eq!(n, last_error().len());
}

#[test]
fn null_and_range_errors() {
    let m = example();
    let mut out = 0.0;
    assert_eq!(
        unsafe { rp_demand(ptr::null(), 1, 1.0, 1.0, 1.0, &mut out) },
        RpStatus::NullPointer
    );
    assert_eq!(
        unsafe { rp_demand(m, 3, 1.0, 1.0, 1.0, &mut out) },
        RpStatus::OutOfRange
    );
    assert_eq!(unsafe { rp_demand(m, 1, 5.0, 1.0, 1.0, &mut out) }, RpStatus::Domain);
    assert_eq!(unsafe { rp_demand(m, 2, 1.0, 1.0, 1.5, &mut out) }, RpStatus::Ok);
    assert!((out - 4.45).abs() < 1e-12);
    assert_eq!(unsafe { rp_sigma0(2.0, &mut out) }, RpStatus::OutOfRegime);
    assert_eq!(unsafe { rp_sne(m, ptr::null_mut()) }, RpStatus::NullPointer);
    unsafe { rp_market_free(m) };
    unsafe { rp_market_free(ptr::null_mut()) };
}

#[test]
fn reference_and_best_response() {
    let m = example();
    let mut r = 0.0;
    assert_eq!(unsafe { rp_reference_update(m, 1.5, 1.0, 1.0, &mut r) }, RpStatus::Ok);
    assert!((r - 1.2).abs() < 1e-12);
    let mut br = 0.0;
    assert_eq!(unsafe { rp_best_response(m, 1, 1.1755, 1.2039, &mut br) }, RpStatus::Ok);
    assert!((br - 1.40).abs() < 0.01);
    let (mut p1, mut p2) = (0.0, 0.0);
    assert_eq!(
        unsafe { rp_best_response_profile(m, 1.386217241683579, &mut p1, &mut p2) },
        RpStatus::Ok
    );
    assert!((p1 - 1.412688608488485).abs() < 1e-8 && (p2 - 1.2803317744639549).abs() < 1e-8);
    unsafe { rp_market_free(m) };
}

#[test]
fn simulate_and_read_rows() {
    let m = example();
    let sched = [RpSchedule {
        kind: RpScheduleKind::Power,
        c: 1.0,
        eta: 1.0,
        offset: 0.0,
    }; 2];
    let scales = [1.0, 1.0];
    let mut tr = ptr::null_mut();
    let st = unsafe { rp_simulate(m, sched.as_ptr(), scales.as_ptr(), 1.0, 1.0, 1.5, 200, &mut tr) };
    assert_eq!(st, RpStatus::Ok);
    assert_eq!(unsafe { rp_trajectory_len(tr) }, 200);
    let mut row = RpPeriod::default();
    assert_eq!(unsafe { rp_trajectory_row(tr, 0, &mut row) }, RpStatus::Ok);
    assert_eq!((row.t, row.p1, row.p2, row.r), (1, 1.0, 1.0, 1.5));
    assert!((row.g1 + 1.55).abs() < 1e-12);
    assert_eq!(unsafe { rp_trajectory_row(tr, 199, &mut row) }, RpStatus::Ok);
    assert!((row.p1 - 1.412688608488485).abs() < 1e-6);
    assert_eq!(unsafe { rp_trajectory_row(tr, 200, &mut row) }, RpStatus::OutOfRange);
    unsafe { rp_trajectory_free(tr) };
    assert_eq!(unsafe { rp_trajectory_len(ptr::null()) }, 0);

    let bad = [RpSchedule {
        kind: RpScheduleKind::Constant,
        c: -1.0,
        eta: 0.0,
        offset: 0.0,
    }; 2];
    let st = unsafe { rp_simulate(m, bad.as_ptr(), scales.as_ptr(), 1.0, 1.0, 1.5, 10, &mut tr) };
    assert_ne!(st, RpStatus::Ok);
    unsafe { rp_market_free(m) };
}

#[test]
fn const_step_region_through_abi() {
    let m = example();
    let mut reg = RpConstStep::default();
    assert_eq!(unsafe { rp_const_step_region(m, 9.0, 9.0, &mut reg) }, RpStatus::Ok);
    assert!(reg.feasible);
    assert!((reg.sigma0 - 380.25 / 43.0).abs() < 1e-12);
    assert!(reg.h >= -0.25 && reg.h < 0.0);
    assert!((reg.eps[0] - reg.s_tilde * 9.0 * 0.6 / 2.0).abs() < 1e-15);

    assert_eq!(unsafe { rp_const_step_region(m, 1.0, 1.0, &mut reg) }, RpStatus::Ok);
    assert!(!reg.feasible);
    assert!(reg.eps[0].is_nan());
    unsafe { rp_market_free(m) };
}

#[test]
fn status_names() {
    let s = unsafe { CStr::from_ptr(rp_status_name(RpStatus::Singular)) };
    assert_eq!(s.to_str().unwrap(), "singular system");
}
