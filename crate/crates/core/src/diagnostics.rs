//! Post-processing of trajectories: distances to the equilibrium, convergence
//! and oscillation detection, rate fits and bound checks.

use serde::{Deserialize, Serialize};

use crate::equilibrium::{sne_closed_form, Sne};
use crate::error::{Error, Result};
use crate::omd::{Regularizer, Trajectory};

/// Bregman divergence `R(x) − R(y) − R'(y)(x − y)`.
pub fn bregman(reg: &Regularizer, x: f64, y: f64) -> f64 {
    reg.value(x) - reg.value(y) - reg.derivative(y) * (x - y)
}

/// Squared distances to the equilibrium, indexed by period.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSeries {
    /// Period of the first entry.
    pub first_period: u64,
    /// `‖p* − p_t‖²`.
    pub x: Vec<f64>,
    /// `(r* − r_t)²`.
    pub x_n: Vec<f64>,
}

impl DistanceSeries {
    /// First period at which `x_t ≤ level`.
    pub fn first_below(&self, level: f64) -> Option<u64> {
        self.x
            .iter()
            .position(|&v| v <= level)
            .map(|k| self.first_period + k as u64)
    }

    pub fn x_at(&self, t: u64) -> Option<f64> {
        t.checked_sub(self.first_period)
            .and_then(|k| self.x.get(k as usize).copied())
    }
}

pub fn dist_to_sne(traj: &Trajectory, sne: &Sne) -> Result<DistanceSeries> {
    let own = sne_closed_form(traj.params())?;
    let mismatch = own
        .components()
        .iter()
        .zip(sne.components())
        .any(|(a, b)| (a - b).abs() > 1e-9 * a.abs().max(1.0));
    if mismatch {
        return Err(Error::Domain(
            "equilibrium does not belong to the trajectory's market parameters".into(),
        ));
    }
    let first_period = traj.first().map_or(1, |p| p.t);
    let (x, x_n) = traj
        .periods()
        .iter()
        .map(|row| {
            let d1 = sne.p1_star - row.p1;
            let d2 = sne.p2_star - row.p2;
            let dn = sne.r_star - row.r;
            (d1 * d1 + d2 * d2, dn * dn)
        })
        .unzip();
    Ok(DistanceSeries { first_period, x, x_n })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceOptions {
    /// Largest successive change, per component, counted as settled.
    pub tol: f64,
    pub window: usize,
    /// Amplitude over the window above which an unsettled run counts as oscillating.
    pub osc_tol: f64,
    /// Max-norm distance to the equilibrium for a limit to count as the equilibrium.
    pub sne_tol: f64,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        ConvergenceOptions {
            tol: 1e-6,
            window: 50,
            osc_tol: 1e-3,
            sne_tol: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundViolation {
    pub bound: String,
    pub period: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceVerdict {
    pub converged: bool,
    /// First period after which every successive change stays below `tol`.
    pub t_converged: Option<u64>,
    pub limit_point: Option<[f64; 3]>,
    pub at_sne: bool,
    pub oscillating: bool,
    pub rate_slope: Option<f64>,
    pub bound_violations: Vec<BoundViolation>,
}

fn max_step(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn detect_convergence(traj: &Trajectory, opts: &ConvergenceOptions) -> Result<ConvergenceVerdict> {
    if opts.window < 2 {
        return Err(Error::Domain(format!("window must be at least 2, got {}", opts.window)));
    }
    let rows = traj.periods();
    if rows.len() < opts.window {
        return Err(Error::Domain(format!(
            "trajectory of length {} is shorter than the window {}",
            rows.len(),
            opts.window
        )));
    }
    let states: Vec<[f64; 3]> = rows.iter().map(|r| r.components()).collect();
    let tail = &states[states.len() - opts.window..];
    let converged = tail.windows(2).all(|w| max_step(&w[0], &w[1]) < opts.tol);

    let mut verdict = ConvergenceVerdict {
        converged,
        t_converged: None,
        limit_point: None,
        at_sne: false,
        oscillating: false,
        rate_slope: None,
        bound_violations: Vec::new(),
    };

    if converged {
        // walk back to the last unsettled step
        let last_big = states.windows(2).rposition(|w| max_step(&w[0], &w[1]) >= opts.tol);
        let k = last_big.map_or(0, |i| i + 1);
        verdict.t_converged = Some(rows[k].t);
        let limit = *states.last().expect("nonempty");
        verdict.limit_point = Some(limit);
        if let Ok(sne) = sne_closed_form(traj.params()) {
            verdict.at_sne = max_step(&limit, &sne.components()) <= opts.sne_tol;
        }
    } else {
        let amplitude = (0..3)
            .map(|c| {
                let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                    (lo.min(s[c]), hi.max(s[c]))
                });
                hi - lo
            })
            .fold(0.0, f64::max);
        verdict.oscillating = amplitude > opts.osc_tol;
    }
    Ok(verdict)
}

/// Outcome of comparing a series against a pointwise bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub holds: bool,
    pub first_violation: Option<u64>,
}

/// Checks `series[k] ≤ bound(first_period + k)` for every entry.
pub fn check_rate_bound(series: &[f64], first_period: u64, bound: impl Fn(u64) -> f64) -> BoundCheck {
    let first_violation = series
        .iter()
        .enumerate()
        .map(|(k, &v)| (first_period + k as u64, v))
        .find(|&(t, v)| !(v <= bound(t)))
        .map(|(t, _)| t);
    BoundCheck {
        holds: first_violation.is_none(),
        first_violation,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateModel {
    /// `log x_t` against `log t`.
    Power,
    /// `log x_t` against `t`.
    Geometric,
}

/// Least-squares fit of a log-series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub model: RateModel,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Fits `model` to `series[range]`, where `series[k]` belongs to period
/// `first_period + k`. Defaults to the last half of the series.
pub fn fit_rate(
    series: &[f64],
    first_period: u64,
    model: RateModel,
    range: Option<std::ops::Range<usize>>,
) -> Result<RateFit> {
    let range = range.unwrap_or(series.len() / 2..series.len());
    if range.end > series.len() || range.len() < 2 {
        return Err(Error::Domain(format!(
            "fit range {range:?} invalid for a series of length {}",
            series.len()
        )));
    }
    let mut xs = Vec::with_capacity(range.len());
    let mut ys = Vec::with_capacity(range.len());
    for k in range {
        let v = series[k];
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Domain(format!(
                "nonpositive value {v} at period {} in the fit range",
                first_period + k as u64
            )));
        }
        let t = (first_period + k as u64) as f64;
        xs.push(match model {
            RateModel::Power => t.ln(),
            RateModel::Geometric => t,
        });
        ys.push(v.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(RateFit {
        model,
        slope,
        intercept: my - slope * mx,
        r_squared,
        points: xs.len(),
    })
}

/// Values at or below this are treated as numerically zero by [`classify_rate`].
pub const NUMERICAL_FLOOR: f64 = 1e-24;

/// Picks the better-fitting of the power and geometric models over the last
/// half of the series before it first reaches [`NUMERICAL_FLOOR`]. A series
/// that hits the floor within four periods is reported as geometric.
pub fn classify_rate(series: &[f64], first_period: u64) -> Option<RateFit> {
    let usable = series
        .iter()
        .position(|&v| !(v > NUMERICAL_FLOOR))
        .unwrap_or(series.len());
    let hit_floor = usable < series.len();
    if usable < 4 {
        if !hit_floor || usable < 2 {
            return None;
        }
        return fit_rate(series, first_period, RateModel::Geometric, Some(0..usable)).ok();
    }
    let range = usable / 2..usable;
    let power = fit_rate(series, first_period, RateModel::Power, Some(range.clone())).ok()?;
    let geo = fit_rate(series, first_period, RateModel::Geometric, Some(range)).ok()?;
    Some(if geo.r_squared > power.r_squared { geo } else { power })
}
