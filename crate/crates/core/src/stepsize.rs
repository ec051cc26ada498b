//! Step-size feasibility and rate constants.
//!
//! Two families of results live here:
//!
//! * constant steps `eps_i = s·sigma_i·(1-a)/beta_i`, feasible when the
//!   multiplier `s` makes three quadratics `f_{i,m}` negative at once, with a
//!   geometric contraction certificate at the point `s̃` where the normalized
//!   quadratics cross;
//! * decreasing steps `Θ(1/t)` inside an explicit band, with an explicit
//!   constant `c` such that the squared price distance is at most `c/t`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{Firm, MarketParams};
use crate::omd::StepSchedule;

/// Strong-convexity modulus of `R(z) = z²` under the `sigma/2` convention.
pub const SQUARE_MAP_SIGMA: f64 = 2.0;

/// Length of the tail over which `t_theta` is re-verified after the scan.
const T_THETA_TAIL: u64 = 1000;

/// Margin applied to the box bound on squared gradients.
const C2_MARGIN: f64 = 1.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Player {
    One,
    Two,
    Nature,
}

impl From<Firm> for Player {
    fn from(f: Firm) -> Self {
        match f {
            Firm::One => Player::One,
            Firm::Two => Player::Two,
        }
    }
}

/// The feasibility quadratic of player `i` at multiplier `z`.
pub fn f_im(sigma1: f64, sigma2: f64, m: f64, player: Player, z: f64) -> f64 {
    let (a, b, c) = quad_coeffs(sigma1, sigma2, m, player);
    (a * z + b) * z + c
}

/// Coefficients `(A, B, C)` of `A z² + B z + C`.
fn quad_coeffs(sigma1: f64, sigma2: f64, m: f64, player: Player) -> (f64, f64, f64) {
    let firm = |own: f64, other: f64| {
        (
            4.0 * own + 2.0 * other / (m * m),
            -((2.0 - 1.0 / (2.0 * m)) * own - other / (2.0 * m)),
            0.75,
        )
    };
    match player {
        Player::One => firm(sigma1, sigma2),
        Player::Two => firm(sigma2, sigma1),
        Player::Nature => {
            let s = sigma1 + sigma2;
            (2.0 * s / (m * m), s / (2.0 * m), -0.25)
        }
    }
}

/// Strong-convexity threshold above which equal-modulus constant steps are feasible.
pub fn sigma0(m: f64) -> Result<f64> {
    if !(m > 2.0) || !m.is_finite() {
        return Err(Error::OutOfRegime(format!("sigma0 requires m > 2, got {m}")));
    }
    let first = 6.0 * (2.0 * m * m + 1.0) / ((2.0 * m - 1.0) * (2.0 * m - 1.0));
    let second = (2.0 * m * m + 7.0).powi(2) / (8.0 * m.powi(3) - 36.0 * m + 8.0);
    Ok(first.max(second))
}

/// Feasible constant-step multipliers and the contraction certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstStepReport {
    pub m: f64,
    pub sigma: [f64; 2],
    /// `None` when `m ≤ 2`.
    pub sigma0: Option<f64>,
    /// Endpoints of the multiplier region where all three quadratics are negative.
    pub z1: Option<f64>,
    pub z2: Option<f64>,
    /// Multiplier where the normalized quadratics meet.
    pub s_tilde: Option<f64>,
    /// Common normalized value at `s_tilde`; in `[-1/4, 0)` when feasible.
    pub h: Option<f64>,
    pub feasible: bool,
    pub reasons: Vec<String>,
    /// `s_tilde·sigma_i·(1-a)/beta_i`, only when built against a market.
    pub recommended_eps: Option<[f64; 2]>,
    /// Per-period contraction of `sigma·x_t + x_{n,t}`: `1 + 2(1-a)H`.
    pub contraction_factor: Option<f64>,
}

impl ConstStepReport {
    /// Value of every normalized quadratic at `z`; firms are divided by `2 sigma_i`.
    pub fn normalized(&self, player: Player, z: f64) -> f64 {
        normalized(self.sigma[0], self.sigma[1], self.m, player, z)
    }
}

fn normalized(s1: f64, s2: f64, m: f64, player: Player, z: f64) -> f64 {
    let f = f_im(s1, s2, m, player, z);
    match player {
        Player::One => f / (2.0 * s1),
        Player::Two => f / (2.0 * s2),
        Player::Nature => f,
    }
}

/// Interval of `z > 0` where a quadratic is negative, if any.
fn negative_interval(a: f64, b: f64, c: f64) -> Option<(f64, f64)> {
    let disc = b * b - 4.0 * a * c;
    if !(disc > 0.0) {
        return None;
    }
    let sq = disc.sqrt();
    // stable root pair for a > 0
    let q = -0.5 * (b + b.signum() * sq);
    let (r1, r2) = if q == 0.0 { (0.0, -b / a) } else { (q / a, c / q) };
    let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
    if hi <= 0.0 {
        None
    } else {
        Some((lo.max(0.0), hi))
    }
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Minimizer of a convex function on `[lo, hi]` by golden-section search.
fn golden_min(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Constant-step multiplier region for margin `m` and moduli `sigma1`, `sigma2`.
pub fn const_step_region_for(m: f64, sigma1: f64, sigma2: f64) -> Result<ConstStepReport> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Domain(format!("margin m must be positive, got {m}")));
    }
    if !(sigma1 > 0.0 && sigma2 > 0.0 && sigma1.is_finite() && sigma2.is_finite()) {
        return Err(Error::Domain("strong-convexity moduli must be positive".into()));
    }
    let mut report = ConstStepReport {
        m,
        sigma: [sigma1, sigma2],
        sigma0: sigma0(m).ok(),
        z1: None,
        z2: None,
        s_tilde: None,
        h: None,
        feasible: false,
        reasons: Vec::new(),
        recommended_eps: None,
        contraction_factor: None,
    };
    if m <= 2.0 {
        report.reasons.push(format!("margin m = {m} ≤ 2: no threshold sigma0"));
    }
    if let Some(s0) = report.sigma0 {
        if sigma1.min(sigma2) <= s0 {
            report
                .reasons
                .push(format!("min sigma = {} ≤ sigma0 = {s0}", sigma1.min(sigma2)));
        }
    }

    let equal = sigma1 == sigma2;
    let region = if equal {
        let sigma = sigma1;
        let lead = 1.0 - 1.0 / (2.0 * m);
        let disc1 = lead * lead - 1.5 / sigma * (2.0 + 1.0 / (m * m));
        let nature_root = (0.5 / (1.0 / m + (1.0 / (m * m) + 4.0 / (sigma * m * m)).sqrt())) / sigma;
        if !(disc1 > 0.0) {
            report
                .reasons
                .push("firm quadratic has no two distinct roots (sigma ≤ 6(2m²+1)/(2m−1)²)".into());
            None
        } else {
            let lower = (0.75 / (lead + disc1.sqrt())) / sigma;
            let (a, b, _) = quad_coeffs(sigma, sigma, m, Player::One);
            let upper = (-b + (b * b - 3.0 * a).sqrt()) / (2.0 * a);
            Some((lower, nature_root.min(upper)))
        }
    } else {
        let mut lo = 0.0f64;
        let mut hi = f64::INFINITY;
        let mut ok = true;
        for player in [Player::One, Player::Two, Player::Nature] {
            let (a, b, c) = quad_coeffs(sigma1, sigma2, m, player);
            match negative_interval(a, b, c) {
                Some((l, h)) => {
                    lo = lo.max(l);
                    hi = hi.min(h);
                }
                None => {
                    report
                        .reasons
                        .push(format!("{player:?} quadratic is never negative on z > 0"));
                    ok = false;
                }
            }
        }
        ok.then_some((lo, hi))
    };

    let Some((z1, z2)) = region else {
        return Ok(report);
    };
    report.z1 = Some(z1);
    report.z2 = Some(z2);
    if !(z1 < z2) {
        report.reasons.push(format!("empty region: z1 = {z1} ≥ z2 = {z2}"));
        return Ok(report);
    }

    let norm = |p: Player, z: f64| normalized(sigma1, sigma2, m, p, z);
    let worst = |z: f64| {
        norm(Player::One, z)
            .max(norm(Player::Two, z))
            .max(norm(Player::Nature, z))
    };
    let crossing = |z: f64| norm(Player::One, z) - norm(Player::Nature, z);
    let s = if equal && crossing(z1) > 0.0 && crossing(z2) < 0.0 {
        bisect(z1, z2, crossing)
    } else {
        golden_min(z1, z2, worst)
    };
    let h = worst(s);
    report.s_tilde = Some(s);
    report.h = Some(h);
    report.feasible = h < 0.0 && worst(0.5 * (z1 + z2)) < 0.0;
    if !report.feasible {
        report
            .reasons
            .push("quadratics not jointly negative inside the region".into());
    }
    Ok(report)
}

/// Constant-step region for a market, with the recommended step sizes.
pub fn const_step_region(params: &MarketParams, sigma1: f64, sigma2: f64) -> Result<ConstStepReport> {
    let mut report = const_step_region_for(params.m(), sigma1, sigma2)?;
    if let (true, Some(s), Some(h)) = (report.feasible, report.s_tilde, report.h) {
        let one_minus_a = 1.0 - params.a();
        report.recommended_eps = Some([
            s * sigma1 * one_minus_a / params.beta(Firm::One),
            s * sigma2 * one_minus_a / params.beta(Firm::Two),
        ]);
        report.contraction_factor = Some(1.0 + 2.0 * one_minus_a * h);
    }
    Ok(report)
}

/// Admissible step range at one period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepBand {
    pub lower: f64,
    pub upper: f64,
}

impl StepBand {
    pub fn contains(&self, eps: f64) -> bool {
        eps >= self.lower && eps <= self.upper
    }
}

/// Band `10/((4β_i − δ_i)(t+1)) ≤ eps_{i,t} ≤ 2/(max{δ_i, γ_i}(t+1))` for both firms.
pub fn decreasing_step_band(params: &MarketParams, t: u64) -> Result<[StepBand; 2]> {
    if params.m() < 2.0 {
        return Err(Error::OutOfRegime(format!(
            "decreasing-step band requires m ≥ 2, got {}",
            params.m()
        )));
    }
    let scale = 1.0 / (t as f64 + 1.0);
    Ok(Firm::BOTH.map(|i| StepBand {
        lower: scale * 10.0 / (4.0 * params.beta(i) - params.delta(i)),
        upper: scale * 2.0 / params.delta(i).max(params.gamma(i)),
    }))
}

/// Schedules `c_i/(t+1)` at relative `position ∈ [0, 1]` inside each firm's band.
pub fn decreasing_step_schedules(params: &MarketParams, position: f64) -> Result<[StepSchedule; 2]> {
    if !(0.0..=1.0).contains(&position) {
        return Err(Error::Domain(format!(
            "band position must lie in [0,1], got {position}"
        )));
    }
    let band = decreasing_step_band(params, 0)?;
    Ok(band.map(|b| StepSchedule::power(b.lower + position * (b.upper - b.lower), 1.0, 1.0)))
}

/// Constants of the `c/t` rate certificate for decreasing steps with `R(z) = z²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateConstantReport {
    pub rho_a: u64,
    pub t_a: u64,
    pub t_theta: u64,
    pub t_tilde: u64,
    pub u: f64,
    pub c2: f64,
    pub c: f64,
    pub theta_bar: f64,
    /// Box bound on `|g_i|` per firm used for `c2`.
    pub gradient_bound: [f64; 2],
    /// `|2 t̃ Δ² + c2 + 1 + θ̄ c − c|`.
    pub identity_residual: f64,
    /// The `t̃` inequality re-checked over the tail and the margin found increasing.
    pub t_tilde_tail_verified: bool,
}

impl RateConstantReport {
    pub fn bound(&self, t: u64) -> f64 {
        self.c / t as f64
    }
}

fn ceil_pos(x: f64) -> u64 {
    // absorb rounding in expressions that are exact integers in exact arithmetic
    ((x - 1e-9).ceil()).max(1.0) as u64
}

/// Default `θ̄`: midway between `max θ` and one.
pub fn default_theta_bar(params: &MarketParams) -> f64 {
    0.5 * (1.0 + params.theta_max())
}

pub fn rate_constant(params: &MarketParams, theta_bar: Option<f64>, horizon_guard: u64) -> Result<RateConstantReport> {
    let a = params.a();
    let theta_max = params.theta_max();
    let theta_bar = theta_bar.unwrap_or_else(|| default_theta_bar(params));
    if !(theta_bar > theta_max && theta_bar < 1.0) {
        return Err(Error::Domain(format!(
            "theta_bar must lie in (max theta = {theta_max}, 1), got {theta_bar}"
        )));
    }
    let q = a / (1.0 - a);
    let rho = ceil_pos(q) + 1;
    let rho_f = rho as f64;
    let t_a = ceil_pos(q * (rho_f + 1.0) / (rho_f - q));

    let u = (1.0 - a)
        * theta_max
        * (1..rho + t_a)
            .map(|tau| a.powi(-(tau as i32)) / tau as f64)
            .sum::<f64>();

    // t_theta: first period after the last violation of the log-ratio condition.
    let slack = theta_bar / theta_max - 1.0;
    let ratio = |tau: u64| (rho_f + 1.0) * ((tau - rho - 1) as f64).ln() / tau as f64;
    let start = rho + 3;
    let mut last_violation = None;
    let mut tau = start;
    loop {
        if tau > horizon_guard {
            return Err(Error::Overflow {
                what: "t_theta".into(),
                guard: horizon_guard,
            });
        }
        if ratio(tau) > slack {
            last_violation = Some(tau);
        } else if ratio(tau + 1) <= ratio(tau) {
            break;
        }
        tau += 1;
    }
    let t_theta = last_violation.map_or(start, |v| v + 1);
    if (t_theta..t_theta + T_THETA_TAIL).any(|t| ratio(t) > slack) {
        return Err(Error::Domain(format!(
            "t_theta = {t_theta} fails on its verification tail"
        )));
    }

    let width_sq = params.width().powi(2);
    let gradient_bound = Firm::BOTH.map(|i| {
        let (lo, hi) = (params.p_lo(), params.p_hi());
        let low = 2.0 * params.beta(i) * lo - (params.alpha(i) + (params.delta(i) + params.gamma(i)) * hi);
        let high = 2.0 * params.beta(i) * hi - (params.alpha(i) + (params.delta(i) + params.gamma(i)) * lo);
        low.abs().max(high.abs())
    });
    let c2 = C2_MARGIN
        * Firm::BOTH
            .iter()
            .map(|&i| {
                let g = gradient_bound[i.index()];
                let k = params.delta(i).max(params.gamma(i));
                4.0 * g * g / (SQUARE_MAP_SIGMA * k * k)
            })
            .fold(0.0, f64::max);

    // t_tilde: compare (t − ρ)(2Δ² + u(2tΔ² + c2 + 1)/(1 − θ̄)) with a^{-t} in logs.
    let log_inv_a = -a.ln();
    let margin = |t: u64| {
        let tf = t as f64;
        let lhs = (tf - rho_f) * (2.0 * width_sq + u * (2.0 * tf * width_sq + c2 + 1.0) / (1.0 - theta_bar));
        tf * log_inv_a - lhs.ln()
    };
    let t_start = (rho + t_a).max(t_theta) + 1;
    let mut last_violation = None;
    let mut t = t_start;
    loop {
        if t > horizon_guard {
            return Err(Error::Overflow {
                what: "t_tilde".into(),
                guard: horizon_guard,
            });
        }
        let here = margin(t);
        if here <= 0.0 {
            last_violation = Some(t);
        } else if margin(t + 1) > here {
            break;
        }
        t += 1;
    }
    let t_tilde = last_violation.map_or(t_start, |v| v + 1);
    let tail = t_tilde..=t_tilde + 10 * rho;
    let t_tilde_tail_verified =
        tail.clone().all(|s| margin(s) > 0.0) && tail.clone().all(|s| margin(s + 1) > margin(s));

    let c = (2.0 * t_tilde as f64 * width_sq + c2 + 1.0) / (1.0 - theta_bar);
    let identity_residual = (2.0 * t_tilde as f64 * width_sq + c2 + 1.0 + theta_bar * c - c).abs();

    Ok(RateConstantReport {
        rho_a: rho,
        t_a,
        t_theta,
        t_tilde,
        u,
        c2,
        c,
        theta_bar,
        gradient_bound,
        identity_residual,
        t_tilde_tail_verified,
    })
}

/// Geometric bound `((1+2σ)/σ)(p̄−p̲)²((1+a)/2)^t` on the squared price distance.
pub fn memory_rate_bound(params: &MarketParams, sigma: f64, t: u64) -> f64 {
    geometric_bound(params, sigma, 0.5 * (1.0 + params.a()), t)
}

/// `((1+2σ)/σ)(p̄−p̲)² · factor^t`.
pub fn geometric_bound(params: &MarketParams, sigma: f64, factor: f64, t: u64) -> f64 {
    (1.0 + 2.0 * sigma) / sigma * params.width().powi(2) * factor.powf(t as f64)
}
