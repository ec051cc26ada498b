#![allow(dead_code)]

use proptest::prelude::*;
use rand::Rng;
use refprice::market::{Firm, MarketParams, MarketSpec, PriceState};
use refprice::omd::{Init, Learner, StepSchedule};

pub fn ex_init() -> Init {
    Init::Prices(PriceState::new(1.0, 1.0, 1.5))
}

pub fn quadratic_pair(scale: f64, s: StepSchedule) -> [Learner; 2] {
    [
        Learner::quadratic(scale, s.clone()).unwrap(),
        Learner::quadratic(scale, s).unwrap(),
    ]
}

pub fn pair(s1: StepSchedule, s2: StepSchedule) -> [Learner; 2] {
    [
        Learner::quadratic(1.0, s1).unwrap(),
        Learner::quadratic(1.0, s2).unwrap(),
    ]
}

/// The four step-size regimes on the worked example.
pub fn regime_schedules() -> Vec<(&'static str, [Learner; 2])> {
    let p = MarketParams::example();
    vec![
        ("0.1/t^2", quadratic_pair(1.0, StepSchedule::power(0.1, 2.0, 0.0))),
        ("1/t", quadratic_pair(1.0, StepSchedule::harmonic(1.0))),
        ("0.6", quadratic_pair(1.0, StepSchedule::constant(0.6))),
        (
            "(1-a)/beta",
            pair(
                StepSchedule::constant(0.6 / p.beta(Firm::One)),
                StepSchedule::constant(0.6 / p.beta(Firm::Two)),
            ),
        ),
    ]
}

fn spec_from(u: [f64; 12]) -> MarketSpec {
    let beta = [1.0 + 3.0 * u[0], 1.0 + 3.0 * u[1]];
    let delta = [0.05 + 0.3 * beta[0] * u[2], 0.05 + 0.3 * beta[1] * u[3]];
    let gamma = [0.05 + 0.3 * beta[0] * u[4], 0.05 + 0.3 * beta[1] * u[5]];
    let theta1 = 0.05 + 0.9 * u[6];
    let p_lo = 0.5 + u[7];
    let p_hi = p_lo + 0.3 + 1.7 * u[8];
    let alpha = [beta[0] * p_hi + 5.0 * u[9], beta[1] * p_hi + 5.0 * u[10]];
    MarketSpec {
        alpha,
        beta,
        delta,
        gamma,
        theta: [theta1, 1.0 - theta1],
        a: 0.05 + 0.9 * u[11],
        p_lo,
        p_hi,
        m: None,
    }
}

/// A valid market drawn from `rng`.
pub fn random_params(rng: &mut impl Rng) -> MarketParams {
    loop {
        let u: [f64; 12] = std::array::from_fn(|_| rng.gen::<f64>());
        if let Ok(p) = MarketParams::new(&spec_from(u)) {
            return p;
        }
    }
}

pub fn valid_params() -> impl Strategy<Value = MarketParams> {
    proptest::array::uniform12(0.0f64..1.0).prop_filter_map("invalid market", |u| MarketParams::new(&spec_from(u)).ok())
}

/// Gaussian elimination with partial pivoting.
pub fn solve<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> Option<[f64; N]> {
    for col in 0..N {
        let piv = (col..N).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..N {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (dst, src) in a[row].iter_mut().zip(pivot_row).skip(col) {
                *dst -= f * src;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; N];
    for row in (0..N).rev() {
        let s: f64 = (row + 1..N).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Equilibrium from the stacked first-order and stationarity conditions.
pub fn sne_oracle(p: &MarketParams) -> Option<[f64; 3]> {
    let (o, t) = (Firm::One, Firm::Two);
    solve(
        [
            [2.0 * p.beta(o), -p.delta(o), -p.gamma(o)],
            [-p.delta(t), 2.0 * p.beta(t), -p.gamma(t)],
            [-p.theta(o), -p.theta(t), 1.0],
        ],
        [p.alpha(o), p.alpha(t), 0.0],
    )
}

/// Unconstrained joint best response at reference price `r`.
pub fn interior_profile_oracle(p: &MarketParams, r: f64) -> Option<[f64; 2]> {
    let (o, t) = (Firm::One, Firm::Two);
    solve(
        [[2.0 * p.beta(o), -p.delta(o)], [-p.delta(t), 2.0 * p.beta(t)]],
        [p.alpha(o) + p.gamma(o) * r, p.alpha(t) + p.gamma(t) * r],
    )
}

pub fn clamped_best_response(p: &MarketParams, i: Firm, other: f64, r: f64) -> f64 {
    ((p.alpha(i) + p.delta(i) * other + p.gamma(i) * r) / (2.0 * p.beta(i))).clamp(p.p_lo(), p.p_hi())
}
