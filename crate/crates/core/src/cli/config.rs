//! Experiment configuration files (JSON).

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{ConvergenceOptions, RateModel};
use crate::error::Error;
use crate::market::{Firm, MarketParams, MarketSpec, PriceState};
use crate::omd::{Init, Learner, Regularizer, StepSchedule};
use crate::stepsize::{const_step_region, decreasing_step_schedules};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Simulate,
    SimulateInduced,
    BestResponse,
    Sne,
    ConstRegion,
    RateConstant,
    Sweep,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::SimulateInduced => "simulate-induced",
            Mode::BestResponse => "best-response",
            Mode::Sne => "sne",
            Mode::ConstRegion => "const-region",
            Mode::RateConstant => "rate-constant",
            Mode::Sweep => "sweep",
        }
    }

    fn needs_schedules(self) -> bool {
        matches!(self, Mode::Simulate | Mode::SimulateInduced)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Either one value for both firms or one per firm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerFirm<T> {
    Each([T; 2]),
    Same(T),
}

impl<T: Clone> PerFirm<T> {
    pub fn get(&self, i: Firm) -> &T {
        match self {
            PerFirm::Same(v) => v,
            PerFirm::Each(v) => &v[i.index()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegularizerSpec {
    /// `scale·z²/2`.
    Quadratic { scale: f64 },
    /// `z ln z`.
    Entropic,
}

impl Default for RegularizerSpec {
    fn default() -> Self {
        RegularizerSpec::Quadratic { scale: 1.0 }
    }
}

impl RegularizerSpec {
    pub fn build(&self, params: &MarketParams) -> Result<Regularizer, Error> {
        match self {
            RegularizerSpec::Quadratic { scale } => Regularizer::quadratic(*scale),
            RegularizerSpec::Entropic => Regularizer::entropic(params.p_hi()),
        }
    }
}

/// Step schedule as written in a config. Market-dependent kinds are resolved
/// against the parameters and regularizers when the config is loaded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    Constant {
        c: f64,
    },
    Power {
        c: f64,
        eta: f64,
        #[serde(default)]
        offset: f64,
    },
    Table {
        values: Vec<f64>,
    },
    /// Constant `c / beta_i`.
    OverBeta {
        c: f64,
    },
    /// Constant `s̃·sigma_i·(1−a)/beta_i` from the constant-step region of the
    /// configured (quadratic) regularizers.
    CertifiedConstant,
    /// `c_i/(t+1)` at relative `position` inside the decreasing-step band.
    Band {
        position: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NatureSpec {
    #[serde(default)]
    pub regularizer: RegularizerSpec,
    /// Defaults to the constant `1 − a`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<StepSchedule>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSpec {
    /// Initial prices; when absent the proxies start at the regularizer minimizers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p2: Option<f64>,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSpec {
    #[serde(default = "d_tol")]
    pub tol: f64,
    #[serde(default = "d_window")]
    pub window: usize,
    #[serde(default = "d_osc")]
    pub osc_tol: f64,
    #[serde(default = "d_sne")]
    pub sne_tol: f64,
    /// Rate model to fit; chosen by goodness of fit when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<RateModel>,
}

fn d_tol() -> f64 {
    ConvergenceOptions::default().tol
}
fn d_window() -> usize {
    ConvergenceOptions::default().window
}
fn d_osc() -> f64 {
    ConvergenceOptions::default().osc_tol
}
fn d_sne() -> f64 {
    ConvergenceOptions::default().sne_tol
}

impl Default for DiagnosticsSpec {
    fn default() -> Self {
        DiagnosticsSpec {
            tol: d_tol(),
            window: d_window(),
            osc_tol: d_osc(),
            sne_tol: d_sne(),
            fit: None,
        }
    }
}

impl DiagnosticsSpec {
    pub fn options(&self) -> ConvergenceOptions {
        ConvergenceOptions {
            tol: self.tol,
            window: self.window,
            osc_tol: self.osc_tol,
            sne_tol: self.sne_tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    /// Strong-convexity moduli for the constant-step region. Defaults to the regularizers' moduli.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_bar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon_guard: Option<u64>,
    /// Initial reference price for best-response dynamics. Defaults to `init.r`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r1: Option<f64>,
}

pub const DEFAULT_HORIZON_GUARD: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "quantity", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepSpec {
    /// Rate constant `c` over a grid of memory `a` and `max θ` (θ₁ = max θ).
    RateConstant {
        a: Vec<f64>,
        theta_max: Vec<f64>,
        /// Fixed `θ̄`; defaults to `(1 + max θ)/2` per cell.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta_bar: Option<f64>,
    },
    /// Strong-convexity threshold over a grid of margins.
    Sigma0 { m: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default = "o_traj")]
    pub trajectory: String,
    #[serde(default = "o_report")]
    pub report: String,
    #[serde(default = "o_sweep")]
    pub sweep: String,
}

fn o_traj() -> String {
    "trajectory.csv".into()
}
fn o_report() -> String {
    "report.json".into()
}
fn o_sweep() -> String {
    "sweep.csv".into()
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: None,
            trajectory: o_traj(),
            report: o_report(),
            sweep: o_sweep(),
        }
    }
}

fn default_horizon() -> usize {
    10_000
}

fn default_regularizers() -> PerFirm<RegularizerSpec> {
    PerFirm::Same(RegularizerSpec::default())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub market: MarketSpec,
    #[serde(default = "default_regularizers")]
    pub regularizers: PerFirm<RegularizerSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedules: Option<PerFirm<ScheduleSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nature: Option<NatureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<InitSpec>,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default)]
    pub diagnostics: DiagnosticsSpec,
    #[serde(default)]
    pub analysis: AnalysisSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Io(String),
    Parse(String),
    Invalid { field: String, rule: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(m) => write!(f, "cannot read config: {m}"),
            ConfigError::Parse(m) => write!(f, "cannot parse config: {m}"),
            ConfigError::Invalid { field, rule } => write!(f, "invalid config field `{field}`: {rule}"),
        }
    }
}

impl std::error::Error for ConfigError {}

fn invalid(field: impl Into<String>, rule: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        rule: rule.into(),
    }
}

fn from_model(prefix: &str, e: Error) -> ConfigError {
    match e {
        Error::InvalidParams { field, rule } => invalid(format!("{prefix}.{field}"), rule),
        other => invalid(prefix, other.to_string()),
    }
}

/// Everything a run needs, with schedules and regularizers resolved against the market.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: MarketParams,
    pub firms: Option<[Learner; 2]>,
    pub nature: Learner,
    pub init: Init,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn params(&self) -> Result<MarketParams, ConfigError> {
        MarketParams::new(&self.market).map_err(|e| from_model("market", e))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.resolve().map(|_| ())
    }

    fn regularizer(&self, params: &MarketParams, i: Firm) -> Result<Regularizer, ConfigError> {
        self.regularizers
            .get(i)
            .build(params)
            .map_err(|e| invalid(format!("regularizers[{}]", i.index()), e.to_string()))
    }

    fn schedule(&self, params: &MarketParams, spec: &ScheduleSpec, i: Firm) -> Result<StepSchedule, ConfigError> {
        let field = format!("schedules[{}]", i.index());
        let sched = match spec {
            ScheduleSpec::Constant { c } => StepSchedule::constant(*c),
            ScheduleSpec::Power { c, eta, offset } => StepSchedule::power(*c, *eta, *offset),
            ScheduleSpec::Table { values } => StepSchedule::Table { values: values.clone() },
            ScheduleSpec::OverBeta { c } => StepSchedule::constant(c / params.beta(i)),
            ScheduleSpec::CertifiedConstant => {
                let sigma = self.region_sigmas(params)?;
                let report =
                    const_step_region(params, sigma[0], sigma[1]).map_err(|e| invalid(&field, e.to_string()))?;
                let eps = report.recommended_eps.ok_or_else(|| {
                    invalid(
                        &field,
                        format!("constant-step region infeasible: {}", report.reasons.join("; ")),
                    )
                })?;
                StepSchedule::constant(eps[i.index()])
            }
            ScheduleSpec::Band { position } => decreasing_step_schedules(params, *position)
                .map_err(|e| invalid(&field, e.to_string()))?[i.index()]
            .clone(),
        };
        sched.validate().map_err(|e| invalid(&field, e.to_string()))?;
        Ok(sched)
    }

    /// Moduli used by the constant-step analysis.
    pub fn region_sigmas(&self, params: &MarketParams) -> Result<[f64; 2], ConfigError> {
        if let Some(s) = self.analysis.sigma {
            if !(s[0] > 0.0 && s[1] > 0.0) {
                return Err(invalid("analysis.sigma", "sigma_i > 0"));
            }
            return Ok(s);
        }
        Ok([
            self.regularizer(params, Firm::One)?.sigma(),
            self.regularizer(params, Firm::Two)?.sigma(),
        ])
    }

    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let params = self.params()?;
        if self.horizon == 0 {
            return Err(invalid("horizon", "horizon ≥ 1"));
        }
        if self.diagnostics.window < 2 {
            return Err(invalid("diagnostics.window", "window ≥ 2"));
        }

        let regs = [
            self.regularizer(&params, Firm::One)?,
            self.regularizer(&params, Firm::Two)?,
        ];
        let firms = match &self.schedules {
            Some(s) => Some([
                Learner::new(regs[0].clone(), self.schedule(&params, s.get(Firm::One), Firm::One)?),
                Learner::new(regs[1].clone(), self.schedule(&params, s.get(Firm::Two), Firm::Two)?),
            ]),
            None if self.mode.needs_schedules() => {
                return Err(invalid(
                    "schedules",
                    format!("mode `{}` requires step schedules", self.mode),
                ));
            }
            None => None,
        };

        let nature = match &self.nature {
            None => Learner::nature_default(&params),
            Some(n) => {
                let reg = n
                    .regularizer
                    .build(&params)
                    .map_err(|e| invalid("nature.regularizer", e.to_string()))?;
                let sched = n.schedule.clone().unwrap_or(StepSchedule::constant(1.0 - params.a()));
                sched
                    .validate()
                    .map_err(|e| invalid("nature.schedule", e.to_string()))?;
                Learner::new(reg, sched)
            }
        };

        let init = match self.init {
            None => Init::Prices(PriceState::new(params.p_lo(), params.p_lo(), params.p_lo())),
            Some(InitSpec {
                p1: Some(p1),
                p2: Some(p2),
                r,
            }) => {
                let s = PriceState::new(p1, p2, r);
                s.validate(&params).map_err(|e| invalid("init", e.to_string()))?;
                Init::Prices(s)
            }
            Some(InitSpec { p1: None, p2: None, r }) => {
                if !params.in_box(r) {
                    return Err(invalid("init.r", "r ∈ [p_lo, p_hi]"));
                }
                Init::RegularizerArgmin { r1: r }
            }
            Some(_) => return Err(invalid("init", "give both p1 and p2, or neither")),
        };

        if let Some(r1) = self.analysis.r1 {
            if !params.in_box(r1) {
                return Err(invalid("analysis.r1", "r1 ∈ [p_lo, p_hi]"));
            }
        }
        if let Some(tb) = self.analysis.theta_bar {
            if !(tb > params.theta_max() && tb < 1.0) {
                return Err(invalid("analysis.theta_bar", "max θ < theta_bar < 1"));
            }
        }

        match (&self.sweep, self.mode) {
            (None, Mode::Sweep) => return Err(invalid("sweep", "mode `sweep` requires a sweep block")),
            (
                Some(SweepSpec::RateConstant {
                    a,
                    theta_max,
                    theta_bar,
                }),
                _,
            ) => {
                if a.is_empty() || theta_max.is_empty() {
                    return Err(invalid("sweep", "grid axes must be nonempty"));
                }
                if let Some(x) = a.iter().find(|x| !(**x > 0.0 && **x < 1.0)) {
                    return Err(invalid("sweep.a", format!("a ∈ (0,1), got {x}")));
                }
                if let Some(x) = theta_max.iter().find(|x| !(**x >= 0.5 && **x < 1.0)) {
                    return Err(invalid("sweep.theta_max", format!("max θ ∈ [0.5, 1), got {x}")));
                }
                if let Some(tb) = theta_bar {
                    if theta_max.iter().any(|t| !(tb > t && *tb < 1.0)) {
                        return Err(invalid("sweep.theta_bar", "max θ < theta_bar < 1 for every grid value"));
                    }
                }
            }
            (Some(SweepSpec::Sigma0 { m }), _) => {
                if m.is_empty() {
                    return Err(invalid("sweep.m", "grid must be nonempty"));
                }
                if let Some(x) = m.iter().find(|x| !(**x > 2.0)) {
                    return Err(invalid("sweep.m", format!("m > 2, got {x}")));
                }
            }
            _ => {}
        }

        Ok(Resolved {
            params,
            firms,
            nature,
            init,
        })
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
    ExperimentConfig::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"{
        "mode": "sne",
        "market": {"alpha": [5, 6], "beta": [2, 3], "delta": [0.4, 0.7], "gamma": [0.1, 0.5],
                   "theta": [0.8, 0.2], "a": 0.4, "p_lo": 1, "p_hi": 2},
        "init": {"p1": 1, "p2": 1, "r": 1.5}
    }"#;

    #[test]
    fn loads_example_and_derives_margin() {
        let cfg = ExperimentConfig::from_json(EXAMPLE).unwrap();
        assert!((cfg.params().unwrap().m() - 2.5).abs() < 1e-15);
        assert_eq!(cfg.horizon, 10_000);
    }

    #[test]
    fn rejects_memory_at_one() {
        let text = EXAMPLE.replace("\"a\": 0.4", "\"a\": 1.0");
        let err = ExperimentConfig::from_json(&text).unwrap_err();
        assert_eq!(err, invalid("market.a", "a ∈ (0,1)"));
        assert!(err.to_string().contains("a ∈ (0,1)"));
    }

    #[test]
    fn rejects_visibility_not_summing_to_one() {
        let text = EXAMPLE.replace("[0.8, 0.2]", "[0.8, 0.3]");
        let err = ExperimentConfig::from_json(&text).unwrap_err();
        assert!(err.to_string().contains("theta_1 + theta_2 = 1"), "{err}");
    }

    #[test]
    fn simulate_needs_schedules() {
        let text = EXAMPLE.replace("\"sne\"", "\"simulate\"");
        assert!(matches!(
            ExperimentConfig::from_json(&text),
            Err(ConfigError::Invalid { ref field, .. }) if field == "schedules"
        ));
    }

    #[test]
    fn parse_errors_are_reported() {
        assert!(matches!(ExperimentConfig::from_json("{"), Err(ConfigError::Parse(_))));
        let text = EXAMPLE.replace("\"mode\"", "\"mood\"");
        assert!(matches!(ExperimentConfig::from_json(&text), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn per_firm_schedules_resolve() {
        let text = EXAMPLE.replace("\"sne\"", "\"simulate\"").replace(
            "\"init\"",
            r#""schedules": [{"kind": "over_beta", "c": 0.6}, {"kind": "power", "c": 1, "eta": 1}], "init""#,
        );
        let cfg = ExperimentConfig::from_json(&text).unwrap();
        let firms = cfg.resolve().unwrap().firms.unwrap();
        assert_eq!(firms[0].schedule, StepSchedule::constant(0.3));
        assert_eq!(firms[1].schedule, StepSchedule::harmonic(1.0));
    }

    #[test]
    fn certified_schedule_needs_feasible_region() {
        let text = EXAMPLE
            .replace("\"sne\"", "\"simulate\"")
            .replace("\"init\"", r#""schedules": {"kind": "certified_constant"}, "init""#);
        // unit-scale maps are far below the threshold
        assert!(ExperimentConfig::from_json(&text).is_err());
        let ok = text.replace(
            "\"schedules\"",
            r#""regularizers": {"kind": "quadratic", "scale": 9}, "schedules""#,
        );
        ExperimentConfig::from_json(&ok).unwrap();
    }

    #[test]
    fn round_trip() {
        let cfg = ExperimentConfig::from_json(EXAMPLE).unwrap();
        let again = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again);
    }
}
