use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Step-size sequence `eps_t`, `t = 1, 2, ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepSchedule {
    /// `eps_t = c`.
    Constant { c: f64 },
    /// `eps_t = c / (t + offset)^eta`.
    Power {
        c: f64,
        eta: f64,
        #[serde(default)]
        offset: f64,
    },
    /// Tabulated values for `t = 1..=len`; the last value repeats afterwards.
    Table { values: Vec<f64> },
}

/// Yes / no / cannot tell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trinary {
    Yes,
    No,
    Unknown,
}

impl Trinary {
    fn from_bool(b: bool) -> Self {
        if b {
            Trinary::Yes
        } else {
            Trinary::No
        }
    }
}

/// Summability facts about a schedule, used to place it against the
/// decreasing-step convergence conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleClassification {
    pub sum_diverges: Trinary,
    pub sum_sq_converges: Trinary,
    pub limit_zero: Trinary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleRegime {
    /// Vanishing, non-summable, square-summable: converges to the stable equilibrium.
    SneConvergent,
    /// Vanishing but summable: prices settle, possibly away from the equilibrium.
    MayConvergeOffSne,
    /// Steps do not vanish.
    NonVanishing,
    Unknown,
}

impl ScheduleClassification {
    pub fn regime(&self) -> ScheduleRegime {
        use Trinary::*;
        match (self.limit_zero, self.sum_diverges, self.sum_sq_converges) {
            (No, _, _) => ScheduleRegime::NonVanishing,
            (Yes, Yes, Yes) => ScheduleRegime::SneConvergent,
            (Yes, No, _) => ScheduleRegime::MayConvergeOffSne,
            _ => ScheduleRegime::Unknown,
        }
    }
}

impl StepSchedule {
    pub fn constant(c: f64) -> Self {
        StepSchedule::Constant { c }
    }

    pub fn power(c: f64, eta: f64, offset: f64) -> Self {
        StepSchedule::Power { c, eta, offset }
    }

    /// `c / t`.
    pub fn harmonic(c: f64) -> Self {
        StepSchedule::power(c, 1.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Configuration(msg));
        match self {
            StepSchedule::Constant { c } => {
                if !(c.is_finite() && *c >= 0.0) {
                    return bad(format!("constant step must be finite and ≥ 0, got {c}"));
                }
            }
            StepSchedule::Power { c, eta, offset } => {
                if !(c.is_finite() && *c >= 0.0) {
                    return bad(format!("power schedule c must be finite and ≥ 0, got {c}"));
                }
                if !(eta.is_finite() && *eta >= 0.0) {
                    return bad(format!("power schedule eta must be ≥ 0, got {eta}"));
                }
                if !(offset.is_finite() && 1.0 + offset > 0.0) {
                    return bad(format!("power schedule offset must exceed -1, got {offset}"));
                }
            }
            StepSchedule::Table { values } => {
                if values.is_empty() {
                    return bad("step table is empty".into());
                }
                if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                    return bad(format!("step table entry {v} is not finite and ≥ 0"));
                }
            }
        }
        Ok(())
    }

    /// Step at period `t ≥ 1`.
    pub fn step(&self, t: u64) -> f64 {
        debug_assert!(t >= 1);
        match self {
            StepSchedule::Constant { c } => *c,
            StepSchedule::Power { c, eta, offset } => {
                let base = t as f64 + offset;
                if *eta == 1.0 {
                    c / base
                } else if *eta == 2.0 {
                    c / (base * base)
                } else {
                    c / base.powf(*eta)
                }
            }
            StepSchedule::Table { values } => {
                let k = (t as usize).saturating_sub(1).min(values.len() - 1);
                values[k]
            }
        }
    }

    pub fn classify(&self) -> ScheduleClassification {
        use Trinary::*;
        match self {
            StepSchedule::Constant { c } => {
                let zero = *c == 0.0;
                ScheduleClassification {
                    sum_diverges: Trinary::from_bool(!zero),
                    sum_sq_converges: Trinary::from_bool(zero),
                    limit_zero: Trinary::from_bool(zero),
                }
            }
            StepSchedule::Power { c, eta, .. } => {
                if *c == 0.0 {
                    return ScheduleClassification {
                        sum_diverges: No,
                        sum_sq_converges: Yes,
                        limit_zero: Yes,
                    };
                }
                ScheduleClassification {
                    sum_diverges: Trinary::from_bool(*eta <= 1.0),
                    sum_sq_converges: Trinary::from_bool(*eta > 0.5),
                    limit_zero: Trinary::from_bool(*eta > 0.0),
                }
            }
            StepSchedule::Table { values } => ScheduleClassification {
                sum_diverges: Unknown,
                sum_sq_converges: Unknown,
                limit_zero: if values.last() == Some(&0.0) { Yes } else { Unknown },
            },
        }
    }

    pub fn describe(&self) -> String {
        match self {
            StepSchedule::Constant { c } => format!("constant({c})"),
            StepSchedule::Power { c, eta, offset } if *offset == 0.0 => format!("{c}/t^{eta}"),
            StepSchedule::Power { c, eta, offset } => format!("{c}/(t+{offset})^{eta}"),
            StepSchedule::Table { values } => format!("table(len={})", values.len()),
        }
    }
}
