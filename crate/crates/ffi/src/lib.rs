//! C interface to `refprice`.
//!
//! Every fallible function returns an [`RpStatus`] and writes its result
//! through an out-pointer. On failure the message is kept per thread and can
//! be fetched with [`rp_last_error_message`]. Handles returned by the
//! `*_new`/`rp_simulate` functions must be released with the matching
//! `*_free` function.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use refprice::equilibrium::{best_response, largest_best_response_profile, sne_closed_form};
use refprice::market::{Firm, MarketParams, MarketSpec, PriceState};
use refprice::omd::{simulate, Init, Learner, StepSchedule, Trajectory};
use refprice::stepsize::{const_step_region, sigma0};
use refprice::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParams = 2,
    Domain = 3,
    Singular = 4,
    OutOfRegime = 5,
    Configuration = 6,
    Overflow = 7,
    OutOfRange = 8,
    Panic = 9,
}

/// Market parameters. Set `m` to NaN to derive the margin.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RpMarketSpec {
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub delta: [f64; 2],
    pub gamma: [f64; 2],
    pub theta: [f64; 2],
    pub a: f64,
    pub p_lo: f64,
    pub p_hi: f64,
    pub m: f64,
}

/// Opaque validated market.
pub struct RpMarket(MarketParams);

/// Opaque simulation result.
pub struct RpTrajectory(Trajectory);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RpSne {
    pub p1_star: f64,
    pub p2_star: f64,
    pub r_star: f64,
    pub interior: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpScheduleKind {
    /// `c`
    Constant = 0,
    /// `c / (t + offset)^eta`
    Power = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RpSchedule {
    pub kind: RpScheduleKind,
    pub c: f64,
    pub eta: f64,
    pub offset: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RpPeriod {
    pub t: u64,
    pub p1: f64,
    pub p2: f64,
    pub r: f64,
    pub y1: f64,
    pub y2: f64,
    pub g1: f64,
    pub g2: f64,
    pub gn: f64,
    pub d1: f64,
    pub d2: f64,
    pub rev1: f64,
    pub rev2: f64,
}

/// Constant-step region. Missing values are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RpConstStep {
    pub sigma0: f64,
    pub z1: f64,
    pub z2: f64,
    pub s_tilde: f64,
    pub h: f64,
    pub feasible: bool,
    pub eps: [f64; 2],
    pub contraction: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> RpStatus {
    match e {
        Error::InvalidParams { .. } => RpStatus::InvalidParams,
        Error::Domain(_) => RpStatus::Domain,
        Error::Singular { .. } => RpStatus::Singular,
        Error::OutOfRegime(_) => RpStatus::OutOfRegime,
        Error::Configuration(_) => RpStatus::Configuration,
        Error::Overflow { .. } => RpStatus::Overflow,
    }
}

enum Fail {
    Null(&'static str),
    Range(String),
    Model(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Model(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            RpStatus::Ok
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            RpStatus::NullPointer
        }
        Ok(Err(Fail::Range(msg))) => {
            set_error(msg);
            RpStatus::OutOfRange
        }
        Ok(Err(Fail::Model(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            RpStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

fn firm(i: u32) -> Result<Firm, Fail> {
    match i {
        1 => Ok(Firm::One),
        2 => Ok(Firm::Two),
        _ => Err(Fail::Range(format!("firm must be 1 or 2, got {i}"))),
    }
}

/// Validates `spec` and returns a new market handle in `*out`.
///
/// # Safety
/// `spec` must point to a valid `RpMarketSpec` and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn rp_market_new(spec: *const RpMarketSpec, out_market: *mut *mut RpMarket) -> RpStatus {
    guard(|| {
        let s = deref(spec, "spec")?;
        let o = out(out_market, "out_market")?;
        let ms = MarketSpec {
            alpha: s.alpha,
            beta: s.beta,
            delta: s.delta,
            gamma: s.gamma,
            theta: s.theta,
            a: s.a,
            p_lo: s.p_lo,
            p_hi: s.p_hi,
            m: if s.m.is_nan() { None } else { Some(s.m) },
        };
        *o = Box::into_raw(Box::new(RpMarket(MarketParams::new(&ms)?)));
        Ok(())
    })
}

/// The worked example market: alpha = (5, 6), beta = (2, 3), delta = (0.4, 0.7),
/// gamma = (0.1, 0.5), theta = (0.8, 0.2), a = 0.4, prices in [1, 2].
///
/// # Safety
/// `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn rp_market_example(out_market: *mut *mut RpMarket) -> RpStatus {
    guard(|| {
        *out(out_market, "out_market")? = Box::into_raw(Box::new(RpMarket(MarketParams::example())));
        Ok(())
    })
}

/// # Safety
/// `market` must be null or a handle from `rp_market_new`/`rp_market_example`
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn rp_market_free(market: *mut RpMarket) {
    if !market.is_null() {
        drop(Box::from_raw(market));
    }
}

/// Sensitivity margin `m` in effect.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rp_market_margin(market: *const RpMarket, out_m: *mut f64) -> RpStatus {
    guard(|| {
        *out(out_m, "out_m")? = deref(market, "market")?.0.m();
        Ok(())
    })
}

/// Demand of `firm` (1 or 2) at the profile `(p1, p2, r)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rp_demand(
    market: *const RpMarket,
    firm_index: u32,
    p1: f64,
    p2: f64,
    r: f64,
    out_demand: *mut f64,
) -> RpStatus {
    guard(|| {
        let m = deref(market, "market")?;
        let o = out(out_demand, "out_demand")?;
        *o = m.0.demand(firm(firm_index)?, p1, p2, r)?;
        Ok(())
    })
}

/// Gradient of the negated revenue of `firm` in its own price, at `(p1, p2, r)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rp_gradient(
    market: *const RpMarket,
    firm_index: u32,
    p1: f64,
    p2: f64,
    r: f64,
    out_gradient: *mut f64,
) -> RpStatus {
    guard(|| {
        let m = deref(market, "market")?;
        let o = out(out_gradient, "out_gradient")?;
        *o = m.0.gradient(firm(firm_index)?, p1, p2, r)?;
        Ok(())
    })
}

/// Next reference price.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rp_reference_update(
    market: *const RpMarket,
    r: f64,
    p1: f64,
    p2: f64,
    out_r: *mut f64,
) -> RpStatus {
    guard(|| {
        let m = deref(market, "market")?;
        *out(out_r, "out_r")? = m.0.reference_update(r, p1, p2)?;
        Ok(())
    })
}

/// Closed-form stable equilibrium.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rp_sne(market: *const RpMarket, out_sne: *mut RpSne) -> RpStatus {
    guard(|| {
        let m = deref(market, "market")?;
        let o = out(out_sne, "out_sne")?;
        let s = sne_closed_form(&m.0)?;
        *o = RpSne {
            p1_star: s.p1_star,
            p2_star: s.p2_star,
            r_star: s.r_star,
            interior: s.interior,
        };
        Ok(())
    })
}

/// Best response of `firm` to the rival price and reference price.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rp_best_response(
    market: *const RpMarket,
    firm_index: u32,
    p_other: f64,
    r: f64,
    out_price: *mut f64,
) -> RpStatus {
    guard(|| {
        let m = deref(market, "market")?;
        let o = out(out_price, "out_price")?;
        *o = best_response(&m.0, firm(firm_index)?, p_other, r)?;
        Ok(())
    })
}

/// Largest joint best-response profile at reference price `r`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rp_best_response_profile(
    market: *const RpMarket,
    r: f64,
    out_p1: *mut f64,
    out_p2: *mut f64,
) -> RpStatus {
    guard(|| {
        let m = deref(market, "market")?;
        let o1 = out(out_p1, "out_p1")?;
        let o2 = out(out_p2, "out_p2")?;
        (*o1, *o2) = largest_best_response_profile(&m.0, r)?;
        Ok(())
    })
}

fn schedule(s: &RpSchedule) -> StepSchedule {
    match s.kind {
        RpScheduleKind::Constant => StepSchedule::constant(s.c),
        RpScheduleKind::Power => StepSchedule::power(s.c, s.eta, s.offset),
    }
}

/// Mirror-descent run with quadratic regularizers `scale_i·z²/2`, starting from
/// prices `(p1, p2)` and reference `r`.
///
/// # Safety
/// `schedules` and `scales` must each point to two elements; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rp_simulate(
    market: *const RpMarket,
    schedules: *const RpSchedule,
    scales: *const f64,
    p1: f64,
    p2: f64,
    r: f64,
    horizon: usize,
    out_traj: *mut *mut RpTrajectory,
) -> RpStatus {
    guard(|| {
        let m = deref(market, "market")?;
        if schedules.is_null() {
            return Err(Fail::Null("schedules"));
        }
        if scales.is_null() {
            return Err(Fail::Null("scales"));
        }
        let o = out(out_traj, "out_traj")?;
        let sch = std::slice::from_raw_parts(schedules, 2);
        let sc = std::slice::from_raw_parts(scales, 2);
        let firms = [
            Learner::quadratic(sc[0], schedule(&sch[0]))?,
            Learner::quadratic(sc[1], schedule(&sch[1]))?,
        ];
        let traj = simulate(&m.0, &firms, Init::Prices(PriceState::new(p1, p2, r)), horizon)?;
        *o = Box::into_raw(Box::new(RpTrajectory(traj)));
        Ok(())
    })
}

/// Number of recorded periods; 0 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rp_trajectory_len(traj: *const RpTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.len())
}

/// Row `index` (0-based).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rp_trajectory_row(
    traj: *const RpTrajectory,
    index: usize,
    out_row: *mut RpPeriod,
) -> RpStatus {
    guard(|| {
        let t = deref(traj, "traj")?;
        let o = out(out_row, "out_row")?;
        let p =
            t.0.periods()
                .get(index)
                .ok_or_else(|| Fail::Range(format!("row {index} out of range for length {}", t.0.len())))?;
        *o = RpPeriod {
            t: p.t,
            p1: p.p1,
            p2: p.p2,
            r: p.r,
            y1: p.y1,
            y2: p.y2,
            g1: p.g1,
            g2: p.g2,
            gn: p.gn,
            d1: p.d1,
            d2: p.d2,
            rev1: p.rev1,
            rev2: p.rev2,
        };
        Ok(())
    })
}

/// # Safety
/// `traj` must be null or a handle from `rp_simulate` that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn rp_trajectory_free(traj: *mut RpTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Strong-convexity threshold for margin `m > 2`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rp_sigma0(m: f64, out_sigma0: *mut f64) -> RpStatus {
    guard(|| {
        *out(out_sigma0, "out_sigma0")? = sigma0(m)?;
        Ok(())
    })
}

/// Constant-step region for moduli `(sigma1, sigma2)`. Infeasibility is
/// reported through `feasible`, not the status.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rp_const_step_region(
    market: *const RpMarket,
    sigma1: f64,
    sigma2: f64,
    out_region: *mut RpConstStep,
) -> RpStatus {
    guard(|| {
        let m = deref(market, "market")?;
        let o = out(out_region, "out_region")?;
        let rep = const_step_region(&m.0, sigma1, sigma2)?;
        let nan = f64::NAN;
        *o = RpConstStep {
            sigma0: rep.sigma0.unwrap_or(nan),
            z1: rep.z1.unwrap_or(nan),
            z2: rep.z2.unwrap_or(nan),
            s_tilde: rep.s_tilde.unwrap_or(nan),
            h: rep.h.unwrap_or(nan),
            feasible: rep.feasible,
            eps: rep.recommended_eps.unwrap_or([nan, nan]),
            contraction: rep.contraction_factor.unwrap_or(nan),
        };
        Ok(())
    })
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len − 1` bytes) and returns the full message length.
/// Pass a null `buf` to query the length.
///
/// # Safety
/// `buf` must be null or point to at least `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn rp_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn rp_status_name(status: RpStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        RpStatus::Ok => b"ok\0",
        RpStatus::NullPointer => b"null pointer\0",
        RpStatus::InvalidParams => b"invalid parameters\0",
        RpStatus::Domain => b"domain error\0",
        RpStatus::Singular => b"singular system\0",
        RpStatus::OutOfRegime => b"out of regime\0",
        RpStatus::Configuration => b"configuration error\0",
        RpStatus::Overflow => b"overflow\0",
        RpStatus::OutOfRange => b"out of range\0",
        RpStatus::Panic => b"panic\0",
    };
    s.as_ptr().cast()
}
