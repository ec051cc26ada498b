//! Online mirror descent pricing.
//!
//! Each period both firms project their proxy onto the price box, read their
//! gradient at the common state, move the proxy in the mirror space, and then
//! the reference price updates. [`simulate_induced`] runs the same market as a
//! three-player game where the reference price is set by a virtual "nature"
//! player doing its own mirror descent.

mod regularizer;
mod schedule;
mod trajectory;

pub use regularizer::{mirror_step, CustomMap, Regularizer};
pub use schedule::{ScheduleClassification, ScheduleRegime, StepSchedule, Trinary};
pub use trajectory::{Period, Trajectory};

use crate::error::{Error, Result};
use crate::market::{Firm, MarketParams, PriceState};

/// A mirror map paired with a step schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Learner {
    pub regularizer: Regularizer,
    pub schedule: StepSchedule,
}

impl Learner {
    pub fn new(regularizer: Regularizer, schedule: StepSchedule) -> Self {
        Learner { regularizer, schedule }
    }

    /// `R(z) = scale·z²/2` with the given schedule.
    pub fn quadratic(scale: f64, schedule: StepSchedule) -> Result<Self> {
        Ok(Learner::new(Regularizer::quadratic(scale)?, schedule))
    }

    /// Nature's learner that reproduces the reference-price recursion:
    /// `R_n(z) = z²/2` with constant step `1 - a`.
    pub fn nature_default(params: &MarketParams) -> Self {
        Learner {
            regularizer: Regularizer::quadratic(1.0).expect("unit scale"),
            schedule: StepSchedule::constant(1.0 - params.a()),
        }
    }

    fn describe(&self) -> String {
        format!("{} / {}", self.regularizer.describe(), self.schedule.describe())
    }
}

/// How the proxies start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Init {
    /// Start from given prices; the initial proxies equal the prices.
    Prices(PriceState),
    /// Start each proxy at the minimizer of its regularizer over the box, with initial reference `r1`.
    RegularizerArgmin { r1: f64 },
}

fn initial_proxies(params: &MarketParams, firms: &[Learner; 2], init: Init) -> Result<([f64; 2], f64)> {
    match init {
        Init::Prices(s) => {
            s.validate(params)?;
            Ok(([s.p1, s.p2], s.r))
        }
        Init::RegularizerArgmin { r1 } => {
            params.check_price("r1", r1)?;
            let y1 = firms[0].regularizer.argmin_on(params.p_lo(), params.p_hi())?;
            let y2 = firms[1].regularizer.argmin_on(params.p_lo(), params.p_hi())?;
            Ok(([y1, y2], r1))
        }
    }
}

fn validate_run(firms: &[Learner; 2], horizon: usize) -> Result<()> {
    if horizon == 0 {
        return Err(Error::Domain("horizon must be at least 1".into()));
    }
    for f in firms {
        f.schedule.validate()?;
    }
    Ok(())
}

/// Two-firm mirror-descent pricing with reference-price updates.
pub fn simulate(params: &MarketParams, firms: &[Learner; 2], init: Init, horizon: usize) -> Result<Trajectory> {
    validate_run(firms, horizon)?;
    let (mut y, mut r) = initial_proxies(params, firms, init)?;
    let mut periods = Vec::with_capacity(horizon);

    for t in 1..=horizon as u64 {
        let p = [params.project(y[0]), params.project(y[1])];
        let row = Period::observe(params, t, p, r, y);
        let g = [row.g1, row.g2];
        periods.push(row);
        for i in Firm::BOTH {
            let k = i.index();
            let eps = firms[k].schedule.step(t);
            y[k] = mirror_step(&firms[k].regularizer, p[k], eps, g[k])?;
        }
        r = params.reference_update_raw(r, p[0], p[1]);
    }

    let descriptors = firms.iter().map(Learner::describe).collect();
    Ok(Trajectory::new(params.clone(), descriptors, periods))
}

/// The induced three-player game: both firms plus nature, who posts the reference
/// price and descends on `½r² − (θ₁p₁ + θ₂p₂)r`.
pub fn simulate_induced(
    params: &MarketParams,
    firms: &[Learner; 2],
    nature: &Learner,
    init: Init,
    horizon: usize,
) -> Result<Trajectory> {
    validate_run(firms, horizon)?;
    nature.schedule.validate()?;
    let (mut y, r1) = initial_proxies(params, firms, init)?;
    let mut y_n = r1;
    let nature_scale = nature.regularizer.quadratic_scale();
    let memory = params.a();
    let mut periods = Vec::with_capacity(horizon);

    for t in 1..=horizon as u64 {
        let p = [params.project(y[0]), params.project(y[1])];
        let p_n = params.project(y_n);
        let row = Period::observe(params, t, p, p_n, y);
        let g = [row.g1, row.g2];
        periods.push(row);
        for i in Firm::BOTH {
            let k = i.index();
            let eps = firms[k].schedule.step(t);
            y[k] = mirror_step(&firms[k].regularizer, p[k], eps, g[k])?;
        }

        let eps_n = nature.schedule.step(t);
        let target = params.weighted_price(p[0], p[1]);
        y_n = match nature_scale {
            // Quadratic nature: p_n − k(p_n − s) written as a convex combination,
            // which is the reference recursion itself when k = 1 − a.
            Some(scale) => {
                let k = eps_n / scale;
                if k == 1.0 - memory {
                    memory * p_n + (1.0 - memory) * target
                } else {
                    (1.0 - k) * p_n + k * target
                }
            }
            None => mirror_step(&nature.regularizer, p_n, eps_n, p_n - target)?,
        };
    }

    let mut descriptors: Vec<String> = firms.iter().map(Learner::describe).collect();
    descriptors.push(format!("nature: {}", nature.describe()));
    Ok(Trajectory::new(params.clone(), descriptors, periods))
}
