use crate::market::{Firm, MarketParams, PriceState};

/// Everything observed in one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Period {
    pub t: u64,
    pub p1: f64,
    pub p2: f64,
    pub r: f64,
    /// Proxy variables before projection.
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

impl Period {
    pub(crate) fn observe(params: &MarketParams, t: u64, p: [f64; 2], r: f64, y: [f64; 2]) -> Self {
        let [p1, p2] = p;
        let d1 = params.demand_raw(Firm::One, p1, p2, r);
        let d2 = params.demand_raw(Firm::Two, p2, p1, r);
        Period {
            t,
            p1,
            p2,
            r,
            y1: y[0],
            y2: y[1],
            g1: params.gradient_raw(Firm::One, p1, p2, r),
            g2: params.gradient_raw(Firm::Two, p2, p1, r),
            gn: r - params.weighted_price(p1, p2),
            d1,
            d2,
            rev1: p1 * d1,
            rev2: p2 * d2,
        }
    }

    pub fn state(&self) -> PriceState {
        PriceState {
            p1: self.p1,
            p2: self.p2,
            r: self.r,
            t: self.t,
        }
    }

    pub fn components(&self) -> [f64; 3] {
        [self.p1, self.p2, self.r]
    }
}

/// A time-indexed record of a pricing run, with the inputs that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    params: MarketParams,
    descriptors: Vec<String>,
    periods: Vec<Period>,
}

impl Trajectory {
    pub(crate) fn new(params: MarketParams, descriptors: Vec<String>, periods: Vec<Period>) -> Self {
        Trajectory {
            params,
            descriptors,
            periods,
        }
    }

    pub fn params(&self) -> &MarketParams {
        &self.params
    }

    /// Human-readable description of the learners (or dynamics) used.
    pub fn descriptors(&self) -> &[String] {
        &self.descriptors
    }

    pub fn periods(&self) -> &[Period] {
        &self.periods
    }

    pub fn len(&self) -> usize {
        self.periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }

    pub fn first(&self) -> Option<&Period> {
        self.periods.first()
    }

    pub fn last(&self) -> Option<&Period> {
        self.periods.last()
    }

    /// Period `t` (1-based), if recorded.
    pub fn at(&self, t: u64) -> Option<&Period> {
        let first = self.periods.first()?.t;
        t.checked_sub(first).and_then(|k| self.periods.get(k as usize))
    }

    pub fn column(&self, f: impl Fn(&Period) -> f64) -> Vec<f64> {
        self.periods.iter().map(f).collect()
    }
}
