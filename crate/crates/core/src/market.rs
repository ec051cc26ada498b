//! Linear demand with reference-price effects.
//!
//! Firm `i` posting `p_i` against a rival price `p_j` and reference price `r`
//! sells `alpha_i - beta_i p_i + delta_i p_j + gamma_i r` units. Consumers form
//! the reference price as an exponentially weighted average of past posted
//! prices, `r' = a r + (1 - a)(theta_1 p_1 + theta_2 p_2)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed when checking that a price lies in the box, to absorb
/// rounding in convex combinations of box points.
const BOX_SLACK: f64 = 1e-12;

/// One of the two real firms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Firm {
    One,
    Two,
}

impl Firm {
    pub const BOTH: [Firm; 2] = [Firm::One, Firm::Two];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Firm::One => 0,
            Firm::Two => 1,
        }
    }

    #[inline]
    pub fn rival(self) -> Firm {
        match self {
            Firm::One => Firm::Two,
            Firm::Two => Firm::One,
        }
    }

    pub fn from_index(i: usize) -> Option<Firm> {
        match i {
            0 => Some(Firm::One),
            1 => Some(Firm::Two),
            _ => None,
        }
    }
}

/// Unvalidated market description, as read from a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketSpec {
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub delta: [f64; 2],
    pub gamma: [f64; 2],
    pub theta: [f64; 2],
    pub a: f64,
    pub p_lo: f64,
    pub p_hi: f64,
    /// Sensitivity margin. Derived as `min_i beta_i / (delta_i + gamma_i)` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
}

impl MarketSpec {
    /// The two-firm market used throughout the worked examples.
    pub fn example() -> Self {
        MarketSpec {
            alpha: [5.0, 6.0],
            beta: [2.0, 3.0],
            delta: [0.4, 0.7],
            gamma: [0.1, 0.5],
            theta: [0.8, 0.2],
            a: 0.4,
            p_lo: 1.0,
            p_hi: 2.0,
            m: None,
        }
    }
}

/// Validated market parameters. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketParams {
    alpha: [f64; 2],
    beta: [f64; 2],
    delta: [f64; 2],
    gamma: [f64; 2],
    theta: [f64; 2],
    a: f64,
    p_lo: f64,
    p_hi: f64,
    m: f64,
}

fn finite(field: &str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::invalid(field, "must be finite"))
    }
}

impl TryFrom<&MarketSpec> for MarketParams {
    type Error = Error;

    fn try_from(s: &MarketSpec) -> Result<Self> {
        for i in 0..2 {
            let n = i + 1;
            if !(finite(&format!("alpha_{n}"), s.alpha[i])? > 0.0) {
                return Err(Error::invalid(format!("alpha_{n}"), "alpha_i > 0"));
            }
            if !(finite(&format!("delta_{n}"), s.delta[i])? > 0.0) {
                return Err(Error::invalid(format!("delta_{n}"), "delta_i > 0"));
            }
            if !(finite(&format!("gamma_{n}"), s.gamma[i])? > 0.0) {
                return Err(Error::invalid(format!("gamma_{n}"), "gamma_i > 0"));
            }
            if !(finite(&format!("beta_{n}"), s.beta[i])? > 0.0) {
                return Err(Error::invalid(format!("beta_{n}"), "beta_i > 0"));
            }
            let th = finite(&format!("theta_{n}"), s.theta[i])?;
            if !(th > 0.0 && th < 1.0) {
                return Err(Error::invalid(format!("theta_{n}"), "theta_i ∈ (0,1)"));
            }
        }
        if (s.theta[0] + s.theta[1] - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("theta", "theta_1 + theta_2 = 1"));
        }
        let a = finite("a", s.a)?;
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::invalid("a", "a ∈ (0,1)"));
        }
        let (lo, hi) = (finite("p_lo", s.p_lo)?, finite("p_hi", s.p_hi)?);
        if !(lo > 0.0) {
            return Err(Error::invalid("p_lo", "0 < p_lo"));
        }
        if !(lo < hi) {
            return Err(Error::invalid("p_hi", "p_lo < p_hi"));
        }

        let derived_m = (0..2)
            .map(|i| s.beta[i] / (s.delta[i] + s.gamma[i]))
            .fold(f64::INFINITY, f64::min);
        let m = match s.m {
            None => derived_m,
            Some(m) => {
                let m = finite("m", m)?;
                if !(m > 0.0) {
                    return Err(Error::invalid("m", "m > 0"));
                }
                if m > derived_m * (1.0 + 1e-12) {
                    return Err(Error::invalid(
                        "m",
                        format!("beta_i ≥ m·(delta_i + gamma_i) (largest valid m is {derived_m})"),
                    ));
                }
                m
            }
        };

        for i in 0..2 {
            // Linear demand is smallest at own price high, rival and reference low.
            let corner = s.alpha[i] - s.beta[i] * hi + (s.delta[i] + s.gamma[i]) * lo;
            if corner < 0.0 {
                return Err(Error::invalid(
                    format!("alpha_{}", i + 1),
                    "alpha_i − beta_i·p_hi + delta_i·p_lo + gamma_i·p_lo ≥ 0 (demand nonnegative on the box)",
                ));
            }
        }

        Ok(MarketParams {
            alpha: s.alpha,
            beta: s.beta,
            delta: s.delta,
            gamma: s.gamma,
            theta: s.theta,
            a,
            p_lo: lo,
            p_hi: hi,
            m,
        })
    }
}

impl TryFrom<MarketSpec> for MarketParams {
    type Error = Error;
    fn try_from(s: MarketSpec) -> Result<Self> {
        MarketParams::try_from(&s)
    }
}

impl MarketParams {
    pub fn new(spec: &MarketSpec) -> Result<Self> {
        Self::try_from(spec)
    }

    pub fn example() -> Self {
        Self::try_from(MarketSpec::example()).expect("example market is valid")
    }

    pub fn spec(&self) -> MarketSpec {
        MarketSpec {
            alpha: self.alpha,
            beta: self.beta,
            delta: self.delta,
            gamma: self.gamma,
            theta: self.theta,
            a: self.a,
            p_lo: self.p_lo,
            p_hi: self.p_hi,
            m: Some(self.m),
        }
    }

    #[inline]
    pub fn alpha(&self, i: Firm) -> f64 {
        self.alpha[i.index()]
    }
    #[inline]
    pub fn beta(&self, i: Firm) -> f64 {
        self.beta[i.index()]
    }
    #[inline]
    pub fn delta(&self, i: Firm) -> f64 {
        self.delta[i.index()]
    }
    #[inline]
    pub fn gamma(&self, i: Firm) -> f64 {
        self.gamma[i.index()]
    }
    #[inline]
    pub fn theta(&self, i: Firm) -> f64 {
        self.theta[i.index()]
    }
    #[inline]
    pub fn theta_max(&self) -> f64 {
        self.theta[0].max(self.theta[1])
    }
    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }
    #[inline]
    pub fn p_lo(&self) -> f64 {
        self.p_lo
    }
    #[inline]
    pub fn p_hi(&self) -> f64 {
        self.p_hi
    }
    /// Width of the price box.
    #[inline]
    pub fn width(&self) -> f64 {
        self.p_hi - self.p_lo
    }
    /// Sensitivity margin `m`.
    #[inline]
    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn in_box(&self, x: f64) -> bool {
        let slack = BOX_SLACK * self.p_hi.max(1.0);
        x >= self.p_lo - slack && x <= self.p_hi + slack
    }

    pub(crate) fn check_price(&self, what: &str, x: f64) -> Result<()> {
        if self.in_box(x) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "{what} = {x} outside price box [{}, {}]",
                self.p_lo, self.p_hi
            )))
        }
    }

    fn check_state(&self, p1: f64, p2: f64, r: f64) -> Result<()> {
        self.check_price("p1", p1)?;
        self.check_price("p2", p2)?;
        self.check_price("r", r)
    }

    // Unchecked kernels used by the simulators.

    #[inline]
    pub(crate) fn demand_raw(&self, i: Firm, own: f64, rival: f64, r: f64) -> f64 {
        let k = i.index();
        self.alpha[k] - self.beta[k] * own + self.delta[k] * rival + self.gamma[k] * r
    }

    #[inline]
    pub(crate) fn gradient_raw(&self, i: Firm, own: f64, rival: f64, r: f64) -> f64 {
        let k = i.index();
        2.0 * self.beta[k] * own - (self.alpha[k] + self.delta[k] * rival + self.gamma[k] * r)
    }

    #[inline]
    pub(crate) fn weighted_price(&self, p1: f64, p2: f64) -> f64 {
        self.theta[0] * p1 + self.theta[1] * p2
    }

    #[inline]
    pub(crate) fn reference_update_raw(&self, r: f64, p1: f64, p2: f64) -> f64 {
        self.a * r + (1.0 - self.a) * self.weighted_price(p1, p2)
    }

    /// Firm `i`'s demand at the profile `(p1, p2, r)`.
    pub fn demand(&self, i: Firm, p1: f64, p2: f64, r: f64) -> Result<f64> {
        self.check_state(p1, p2, r)?;
        let (own, rival) = own_rival(i, p1, p2);
        Ok(self.demand_raw(i, own, rival, r))
    }

    /// Demand written as a base linear demand plus the reaction to the
    /// perceived surcharge `p_i - r`. Algebraically identical to [`demand`](Self::demand).
    pub fn surcharge_form_demand(&self, i: Firm, p1: f64, p2: f64, r: f64) -> Result<f64> {
        self.check_state(p1, p2, r)?;
        let k = i.index();
        let (own, rival) = own_rival(i, p1, p2);
        Ok(self.alpha[k] - (self.beta[k] - self.gamma[k]) * own + self.delta[k] * rival - self.gamma[k] * (own - r))
    }

    /// Single-period revenue `p_i · d_i`.
    pub fn revenue(&self, i: Firm, p1: f64, p2: f64, r: f64) -> Result<f64> {
        let d = self.demand(i, p1, p2, r)?;
        let (own, _) = own_rival(i, p1, p2);
        Ok(own * d)
    }

    /// Derivative of the firm's cost (negated revenue) with respect to its own price.
    pub fn gradient(&self, i: Firm, p1: f64, p2: f64, r: f64) -> Result<f64> {
        self.check_state(p1, p2, r)?;
        let (own, rival) = own_rival(i, p1, p2);
        Ok(self.gradient_raw(i, own, rival, r))
    }

    /// Gradient of the virtual "nature" player whose price is the reference price.
    pub fn nature_gradient(&self, p1: f64, p2: f64, r: f64) -> Result<f64> {
        self.check_state(p1, p2, r)?;
        Ok(r - self.weighted_price(p1, p2))
    }

    pub fn reference_update(&self, r: f64, p1: f64, p2: f64) -> Result<f64> {
        self.check_state(p1, p2, r)?;
        Ok(self.reference_update_raw(r, p1, p2))
    }

    /// Euclidean projection onto the price box.
    #[inline]
    pub fn project(&self, x: f64) -> f64 {
        x.clamp(self.p_lo, self.p_hi)
    }
}

#[inline]
pub(crate) fn own_rival(i: Firm, p1: f64, p2: f64) -> (f64, f64) {
    match i {
        Firm::One => (p1, p2),
        Firm::Two => (p2, p1),
    }
}

/// Prices and reference price at one period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceState {
    pub p1: f64,
    pub p2: f64,
    pub r: f64,
    #[serde(default = "first_period")]
    pub t: u64,
}

fn first_period() -> u64 {
    1
}

impl PriceState {
    pub fn new(p1: f64, p2: f64, r: f64) -> Self {
        PriceState { p1, p2, r, t: 1 }
    }

    pub fn price(&self, i: Firm) -> f64 {
        match i {
            Firm::One => self.p1,
            Firm::Two => self.p2,
        }
    }

    pub fn validate(&self, params: &MarketParams) -> Result<()> {
        if self.t == 0 {
            return Err(Error::Domain("period index starts at 1".into()));
        }
        params.check_state(self.p1, self.p2, self.r)
    }
}
