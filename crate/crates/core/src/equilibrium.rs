//! Stable Nash equilibria and best-response dynamics.
//!
//! A stable equilibrium is a price pair where each firm best-responds to the
//! rival and the reference price, and the reference price equals the
//! visibility-weighted average of the two prices, so it no longer moves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{Firm, MarketParams};
use crate::omd::{Period, Trajectory};

/// Fixed-point tolerance for the joint best-response iteration.
pub const FIXPOINT_TOL: f64 = 1e-12;
/// Iteration cap for the joint best-response iteration.
pub const FIXPOINT_MAX_ITER: usize = 1_000_000;

/// Stable Nash equilibrium candidate `(p1*, p2*, r*)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sne {
    pub p1_star: f64,
    pub p2_star: f64,
    pub r_star: f64,
    /// All three components strictly inside the price box. When false the
    /// closed form is only a candidate and boundary equilibria may exist.
    pub interior: bool,
}

impl Sne {
    pub fn price(&self, i: Firm) -> f64 {
        match i {
            Firm::One => self.p1_star,
            Firm::Two => self.p2_star,
        }
    }

    pub fn components(&self) -> [f64; 3] {
        [self.p1_star, self.p2_star, self.r_star]
    }
}

/// Closed-form interior solution of the two first-order conditions together
/// with the stationarity of the reference price.
pub fn sne_closed_form(params: &MarketParams) -> Result<Sne> {
    let (a1, a2) = (params.alpha(Firm::One), params.alpha(Firm::Two));
    let (b1, b2) = (params.beta(Firm::One), params.beta(Firm::Two));
    let (d1, d2) = (params.delta(Firm::One), params.delta(Firm::Two));
    let (g1, g2) = (params.gamma(Firm::One), params.gamma(Firm::Two));
    let (t1, t2) = (params.theta(Firm::One), params.theta(Firm::Two));

    let det = (2.0 * b1 - t1 * g1) * (2.0 * b2 - t2 * g2) - (t2 * g1 + d1) * (t1 * g2 + d2);
    if !(det > 0.0) || !det.is_finite() {
        return Err(Error::Singular { det });
    }
    let p1 = (2.0 * a1 * b2 - a1 * t2 * g2 + a2 * (d1 + t2 * g1)) / det;
    let p2 = (2.0 * a2 * b1 - a2 * t1 * g1 + a1 * (d2 + t1 * g2)) / det;
    let r = (t1 * (2.0 * a1 * b2 + a2 * d1) + t2 * (2.0 * a2 * b1 + a1 * d2)) / det;

    let strictly_inside = |x: f64| x > params.p_lo() && x < params.p_hi();
    Ok(Sne {
        p1_star: p1,
        p2_star: p2,
        r_star: r,
        interior: strictly_inside(p1) && strictly_inside(p2) && strictly_inside(r),
    })
}

#[inline]
fn best_response_raw(params: &MarketParams, i: Firm, p_other: f64, r: f64) -> f64 {
    let unconstrained = (params.alpha(i) + params.delta(i) * p_other + params.gamma(i) * r) / (2.0 * params.beta(i));
    params.project(unconstrained)
}

/// Revenue-maximizing price for firm `i`, clamped to the box.
pub fn best_response(params: &MarketParams, i: Firm, p_other: f64, r: f64) -> Result<f64> {
    params.check_price("p_other", p_other)?;
    params.check_price("r", r)?;
    Ok(best_response_raw(params, i, p_other, r))
}

/// Jacobi iteration of the joint best-response map at a fixed reference price,
/// started from the top corner of the box. Each item is the next profile.
///
/// The map is increasing in the rival price, so the iterates are componentwise
/// nonincreasing and converge to the greatest fixed point.
#[derive(Debug, Clone)]
pub struct JointBestResponse<'a> {
    params: &'a MarketParams,
    r: f64,
    current: (f64, f64),
}

impl<'a> JointBestResponse<'a> {
    pub fn from_top(params: &'a MarketParams, r: f64) -> Result<Self> {
        params.check_price("r", r)?;
        Ok(JointBestResponse {
            params,
            r,
            current: (params.p_hi(), params.p_hi()),
        })
    }

    pub fn current(&self) -> (f64, f64) {
        self.current
    }
}

impl Iterator for JointBestResponse<'_> {
    type Item = (f64, f64);

    fn next(&mut self) -> Option<(f64, f64)> {
        let (p1, p2) = self.current;
        self.current = (
            best_response_raw(self.params, Firm::One, p2, self.r),
            best_response_raw(self.params, Firm::Two, p1, self.r),
        );
        Some(self.current)
    }
}

fn greatest_fixed_point(params: &MarketParams, r: f64) -> Result<(f64, f64)> {
    let mut it = JointBestResponse::from_top(params, r)?;
    let mut prev = it.current();
    for _ in 0..FIXPOINT_MAX_ITER {
        let next = it.next().expect("infinite iterator");
        if (next.0 - prev.0).abs() < FIXPOINT_TOL && (next.1 - prev.1).abs() < FIXPOINT_TOL {
            return Ok(next);
        }
        prev = next;
    }
    Ok(prev)
}

/// Greatest mutual best-response profile `U(r)` at reference price `r`.
pub fn largest_best_response_profile(params: &MarketParams, r: f64) -> Result<(f64, f64)> {
    greatest_fixed_point(params, r)
}

/// Best-response dynamics: each period firms post `U(r_t)`, then the reference
/// price updates. The reference path is monotone and converges to a stable equilibrium.
pub fn best_response_dynamics(params: &MarketParams, r1: f64, horizon: usize) -> Result<Trajectory> {
    if horizon == 0 {
        return Err(Error::Domain("horizon must be at least 1".into()));
    }
    params.check_price("r1", r1)?;
    let mut r = r1;
    let mut periods = Vec::with_capacity(horizon);
    for t in 1..=horizon as u64 {
        let (p1, p2) = greatest_fixed_point(params, r)?;
        periods.push(Period::observe(params, t, [p1, p2], r, [p1, p2]));
        r = params.reference_update_raw(r, p1, p2);
    }
    Ok(Trajectory::new(
        params.clone(),
        vec!["best-response dynamics (greatest profile)".to_string()],
        periods,
    ))
}
