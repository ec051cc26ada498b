//! Executes an [`ExperimentConfig`] and writes its artifacts.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use super::config::{ConfigError, ExperimentConfig, Mode, ScheduleSpec, SweepSpec, DEFAULT_HORIZON_GUARD};
use crate::diagnostics::{
    check_rate_bound, classify_rate, detect_convergence, dist_to_sne, fit_rate, BoundViolation, DistanceSeries, RateFit,
};
use crate::equilibrium::{best_response_dynamics, sne_closed_form, Sne};
use crate::error::Error;
use crate::market::{Firm, MarketParams};
use crate::omd::{simulate, simulate_induced, Trajectory};
use crate::stepsize::{const_step_region, geometric_bound, memory_rate_bound, rate_constant, sigma0};

pub const TRAJECTORY_HEADER: &str = "t,p1,p2,r,y1,y2,g1,g2,gn,d1,d2,rev1,rev2,x_t,x_n_t";

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Model(Error),
    Io(String),
}

impl RunError {
    /// Process exit code: 2 for invalid configs, 3 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Model(_) | RunError::Io(_) => 3,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => e.fmt(f),
            RunError::Model(e) => write!(f, "run failed: {e}"),
            RunError::Io(m) => write!(f, "cannot write output: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Model(e)
    }
}

fn io_err(path: &Path, e: std::io::Error) -> RunError {
    RunError::Io(format!("{}: {e}", path.display()))
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub mode: Mode,
    pub files: Vec<PathBuf>,
    pub report: Value,
    /// One-line result for the terminal.
    pub headline: String,
}

/// Fixed four-decimal rendering used for the display fields of reports.
pub fn display4(x: f64) -> String {
    format!("{x:.4}")
}

fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_display(x: Option<f64>) -> Value {
    x.map_or(Value::Null, |v| Value::String(display4(v)))
}

fn sne_json(s: &Sne) -> Value {
    json!({
        "p1_star": s.p1_star,
        "p2_star": s.p2_star,
        "r_star": s.r_star,
        "interior": s.interior,
        "display": {
            "p1_star": display4(s.p1_star),
            "p2_star": display4(s.p2_star),
            "r_star": display4(s.r_star),
        },
    })
}

fn market_json(params: &MarketParams) -> Value {
    let mut v = serde_json::to_value(params.spec()).expect("spec serializes");
    v["m"] = json!(params.m());
    v
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory, dist: Option<&DistanceSeries>) -> Result<(), RunError> {
    let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let mut body = || -> std::io::Result<()> {
        writeln!(w, "{TRAJECTORY_HEADER}")?;
        for (k, row) in traj.periods().iter().enumerate() {
            write!(w, "{}", row.t)?;
            for v in [
                row.p1, row.p2, row.r, row.y1, row.y2, row.g1, row.g2, row.gn, row.d1, row.d2, row.rev1, row.rev2,
            ] {
                write!(w, ",{}", fmt_num(v))?;
            }
            match dist {
                Some(d) => writeln!(w, ",{},{}", fmt_num(d.x[k]), fmt_num(d.x_n[k]))?,
                None => writeln!(w, ",,")?,
            }
        }
        w.flush()
    };
    body().map_err(|e| io_err(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), RunError> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Runs `cfg`, writing artifacts into `out_dir` (created if needed).
pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary, RunError> {
    let resolved = cfg.resolve()?;
    fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    let params = &resolved.params;

    let mut files = Vec::new();
    let (body, headline) = match cfg.mode {
        Mode::Sne => sne_mode(params)?,
        Mode::Simulate | Mode::SimulateInduced => {
            let firms = resolved.firms.as_ref().expect("validated: schedules present");
            let traj = if cfg.mode == Mode::Simulate {
                simulate(params, firms, resolved.init, cfg.horizon)?
            } else {
                simulate_induced(params, firms, &resolved.nature, resolved.init, cfg.horizon)?
            };
            let (body, headline, dist) = simulate_report(cfg, params, &traj)?;
            let path = out_dir.join(&cfg.output.trajectory);
            write_trajectory_csv(&path, &traj, dist.as_ref())?;
            files.push(path);
            (body, headline)
        }
        Mode::BestResponse => {
            let r1 = cfg.analysis.r1.or(cfg.init.map(|i| i.r)).unwrap_or(params.p_lo());
            let traj = best_response_dynamics(params, r1, cfg.horizon)?;
            let (body, headline, dist) = best_response_report(params, r1, &traj)?;
            let path = out_dir.join(&cfg.output.trajectory);
            write_trajectory_csv(&path, &traj, dist.as_ref())?;
            files.push(path);
            (body, headline)
        }
        Mode::ConstRegion => {
            let sigma = cfg.region_sigmas(params)?;
            let rep = const_step_region(params, sigma[0], sigma[1])?;
            let headline = match (rep.feasible, rep.s_tilde, rep.h) {
                (true, Some(s), Some(h)) => format!("feasible: s̃ = {}, H = {h:.4e}", display4(s)),
                _ => format!("infeasible: {}", rep.reasons.join("; ")),
            };
            let body = json!({
                "region": rep,
                "display": {
                    "sigma0": opt_display(rep.sigma0),
                    "z1": opt_display(rep.z1),
                    "z2": opt_display(rep.z2),
                    "s_tilde": opt_display(rep.s_tilde),
                },
            });
            (body, headline)
        }
        Mode::RateConstant => {
            let guard = cfg.analysis.horizon_guard.unwrap_or(DEFAULT_HORIZON_GUARD);
            let rep = rate_constant(params, cfg.analysis.theta_bar, guard)?;
            let headline = format!("c = {:.6e} (t̃ = {}, u = {})", rep.c, rep.t_tilde, display4(rep.u));
            (json!({ "rate_constant": rep }), headline)
        }
        Mode::Sweep => {
            let spec = cfg.sweep.as_ref().expect("validated: sweep present");
            let path = out_dir.join(&cfg.output.sweep);
            let (body, headline) = sweep(params, spec, cfg.analysis.horizon_guard, &path)?;
            files.push(path);
            (body, headline)
        }
    };

    let mut report = Map::new();
    report.insert("mode".into(), json!(cfg.mode.name()));
    report.insert("market".into(), market_json(params));
    if let Value::Object(extra) = body {
        report.extend(extra);
    }
    let report = Value::Object(report);

    let report_path = out_dir.join(&cfg.output.report);
    write_text(
        &report_path,
        &serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    files.push(report_path);
    let cfg_path = out_dir.join("config.json");
    write_text(&cfg_path, &cfg.to_json())?;
    files.push(cfg_path);

    Ok(RunSummary {
        mode: cfg.mode,
        files,
        report,
        headline,
    })
}

fn sne_mode(params: &MarketParams) -> Result<(Value, String), RunError> {
    let s = sne_closed_form(params)?;
    let residual = [
        params.gradient(Firm::One, s.p1_star, s.p2_star, s.r_star)?,
        params.gradient(Firm::Two, s.p1_star, s.p2_star, s.r_star)?,
        params.nature_gradient(s.p1_star, s.p2_star, s.r_star)?,
    ];
    let headline = format!(
        "SNE (p1*, p2*, r*) = ({}, {}, {})",
        display4(s.p1_star),
        display4(s.p2_star),
        display4(s.r_star)
    );
    Ok((json!({ "sne": sne_json(&s), "gradient_residual": residual }), headline))
}

fn rate_class(fit: Option<&RateFit>) -> Value {
    fit.map_or(Value::Null, |f| {
        serde_json::to_value(f.model).expect("model serializes")
    })
}

fn bound_json(name: &str, holds: bool, first_violation: Option<u64>, extra: Value) -> Value {
    let mut v = json!({ "name": name, "holds": holds, "first_violation": first_violation });
    if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
        m.extend(e);
    }
    v
}

fn simulate_report(
    cfg: &ExperimentConfig,
    params: &MarketParams,
    traj: &Trajectory,
) -> Result<(Value, String, Option<DistanceSeries>), RunError> {
    let mut verdict = detect_convergence(traj, &cfg.diagnostics.options()).ok();
    let sne = sne_closed_form(params).ok();
    let dist = match &sne {
        Some(s) => Some(dist_to_sne(traj, s)?),
        None => None,
    };

    let mut body = Map::new();
    body.insert("learners".into(), json!(traj.descriptors()));
    if let Some(s) = &cfg.schedules {
        let classes: Vec<Value> = Firm::BOTH
            .iter()
            .map(|&i| {
                let c = cfg
                    .resolve()
                    .ok()
                    .and_then(|r| r.firms)
                    .map(|f| f[i.index()].schedule.classify());
                json!({ "spec": s.get(i), "classification": c, "regime": c.map(|c| c.regime()) })
            })
            .collect();
        body.insert("schedules".into(), json!(classes));
    }
    if let Some(s) = &sne {
        body.insert("sne".into(), sne_json(s));
    }

    let mut bounds = Vec::new();
    let mut fit = None;
    if let Some(d) = &dist {
        let at_sne = verdict.as_ref().is_some_and(|v| v.at_sne);
        fit = match cfg.diagnostics.fit {
            Some(model) => fit_rate(&d.x, d.first_period, model, None).ok(),
            None if at_sne => classify_rate(&d.x, d.first_period),
            None => None,
        };

        let specs: Vec<&ScheduleSpec> = cfg
            .schedules
            .iter()
            .flat_map(|s| Firm::BOTH.map(|i| s.get(i)))
            .collect();
        if !specs.is_empty() && specs.iter().all(|s| matches!(s, ScheduleSpec::Band { .. })) {
            let guard = cfg.analysis.horizon_guard.unwrap_or(DEFAULT_HORIZON_GUARD);
            match rate_constant(params, cfg.analysis.theta_bar, guard) {
                Ok(rc) => {
                    let chk = check_rate_bound(&d.x, d.first_period, |t| rc.bound(t));
                    bounds.push(bound_json(
                        "c_over_t",
                        chk.holds,
                        chk.first_violation,
                        json!({ "c": rc.c }),
                    ));
                }
                Err(e) => bounds.push(json!({ "name": "c_over_t", "error": e.to_string() })),
            }
        }
        if !specs.is_empty() && specs.iter().all(|s| matches!(s, ScheduleSpec::CertifiedConstant)) {
            let sigma = cfg.region_sigmas(params)?;
            if sigma[0] == sigma[1] {
                let rep = const_step_region(params, sigma[0], sigma[1])?;
                let chk = check_rate_bound(&d.x, d.first_period, |t| memory_rate_bound(params, sigma[0], t));
                bounds.push(bound_json(
                    "geometric_half_memory",
                    chk.holds,
                    chk.first_violation,
                    json!({ "factor": 0.5 * (1.0 + params.a()) }),
                ));
                if let Some(q) = rep.contraction_factor {
                    let chk = check_rate_bound(&d.x, d.first_period, |t| geometric_bound(params, sigma[0], q, t));
                    bounds.push(bound_json(
                        "geometric_certified",
                        chk.holds,
                        chk.first_violation,
                        json!({ "factor": q }),
                    ));
                }
            }
        }

        let x0 = d.x.first().copied();
        let x_end = d.x.last().copied();
        body.insert(
            "distance".into(),
            json!({
                "initial_x": x0,
                "final_x": x_end,
                "final_x_n": d.x_n.last(),
                "first_period_x_below_1e-3": d.first_below(1e-3),
                "display": { "initial_x": opt_display(x0), "final_x": opt_display(x_end) },
            }),
        );
    }

    if let Some(v) = verdict.as_mut() {
        v.rate_slope = fit.map(|f| f.slope);
        for b in &bounds {
            if let (Some(name), Some(t)) = (b["name"].as_str(), b["first_violation"].as_u64()) {
                v.bound_violations.push(BoundViolation {
                    bound: name.into(),
                    period: t,
                });
            }
        }
    }
    let last = traj.last().expect("horizon ≥ 1");
    body.insert(
        "final_state".into(),
        json!({
            "t": last.t, "p1": last.p1, "p2": last.p2, "r": last.r,
            "display": { "p1": display4(last.p1), "p2": display4(last.p2), "r": display4(last.r) },
        }),
    );
    body.insert("verdict".into(), json!(verdict));
    body.insert("rate_fit".into(), json!(fit));
    body.insert("rate_class".into(), rate_class(fit.as_ref()));
    body.insert("bounds".into(), json!(bounds));

    let headline = match &verdict {
        Some(v) if v.converged && v.at_sne => format!(
            "converged to the SNE by t = {}",
            v.t_converged.map_or("?".into(), |t| t.to_string())
        ),
        Some(v) if v.converged => {
            let l = v.limit_point.unwrap_or([f64::NAN; 3]);
            format!(
                "converged off the SNE to ({}, {}, {})",
                display4(l[0]),
                display4(l[1]),
                display4(l[2])
            )
        }
        Some(v) if v.oscillating => "oscillating".into(),
        Some(_) => "not converged within the horizon".into(),
        None => format!("{} periods simulated", traj.len()),
    };
    Ok((Value::Object(body), headline, dist))
}

fn best_response_report(
    params: &MarketParams,
    r1: f64,
    traj: &Trajectory,
) -> Result<(Value, String, Option<DistanceSeries>), RunError> {
    let rs = traj.column(|p| p.r);
    let nondecreasing = rs.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    let nonincreasing = rs.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let direction = match (nondecreasing, nonincreasing) {
        (true, true) => "constant",
        (true, false) => "nondecreasing",
        (false, true) => "nonincreasing",
        (false, false) => "non-monotone",
    };
    let sne = sne_closed_form(params).ok();
    let dist = match &sne {
        Some(s) => Some(dist_to_sne(traj, s)?),
        None => None,
    };
    let last = traj.last().expect("horizon ≥ 1");
    let mut body = json!({
        "r1": r1,
        "reference_direction": direction,
        "final_state": {
            "t": last.t, "p1": last.p1, "p2": last.p2, "r": last.r,
            "display": { "p1": display4(last.p1), "p2": display4(last.p2), "r": display4(last.r) },
        },
    });
    if let Some(s) = &sne {
        body["sne"] = sne_json(s);
        let err = (last.p1 - s.p1_star)
            .abs()
            .max((last.p2 - s.p2_star).abs())
            .max((last.r - s.r_star).abs());
        body["final_max_error"] = json!(err);
    }
    let headline = format!(
        "best response from r1 = {}: r is {direction}, final ({}, {}, {})",
        display4(r1),
        display4(last.p1),
        display4(last.p2),
        display4(last.r)
    );
    Ok((body, headline, dist))
}

fn sweep(base: &MarketParams, spec: &SweepSpec, guard: Option<u64>, path: &Path) -> Result<(Value, String), RunError> {
    let mut csv = String::new();
    let mut failures = Vec::new();
    let mut cell_reports = Vec::new();
    let headline;
    match spec {
        SweepSpec::RateConstant {
            a,
            theta_max,
            theta_bar,
        } => {
            let guard = guard.unwrap_or(DEFAULT_HORIZON_GUARD);
            let cells: Vec<(f64, f64)> = a.iter().flat_map(|&x| theta_max.iter().map(move |&t| (x, t))).collect();
            let results: Vec<_> = cells
                .par_iter()
                .map(|&(a, tm)| {
                    let mut s = base.spec().clone();
                    s.a = a;
                    s.theta = [tm, 1.0 - tm];
                    s.m = None;
                    MarketParams::new(&s).and_then(|p| rate_constant(&p, *theta_bar, guard))
                })
                .collect();
            // rows: a, columns: max θ
            csv.push_str("a");
            for tm in theta_max {
                csv.push_str(&format!(",{}", fmt_num(*tm)));
            }
            csv.push('\n');
            let mut n_ok = 0;
            let mut details = Vec::with_capacity(cells.len());
            for (row, a_val) in a.iter().enumerate() {
                csv.push_str(&fmt_num(*a_val));
                for (col, tm) in theta_max.iter().enumerate() {
                    match &results[row * theta_max.len() + col] {
                        Ok(r) => {
                            n_ok += 1;
                            csv.push_str(&format!(",{}", fmt_num(r.c)));
                            details.push(json!({ "a": a_val, "theta_max": tm, "report": r }));
                        }
                        Err(e) => {
                            csv.push(',');
                            failures.push(json!({ "a": a_val, "theta_max": tm, "error": e.to_string() }));
                        }
                    }
                }
                csv.push('\n');
            }
            cell_reports = details;
            headline = format!(
                "rate constant over {} cells ({} failed)",
                cells.len(),
                cells.len() - n_ok
            );
        }
        SweepSpec::Sigma0 { m } => {
            let results: Vec<_> = m.par_iter().map(|&x| sigma0(x)).collect();
            csv.push_str("m,sigma0\n");
            for (&x, res) in m.iter().zip(&results) {
                match res {
                    Ok(s) => csv.push_str(&format!("{},{}\n", fmt_num(x), fmt_num(*s))),
                    Err(e) => {
                        csv.push_str(&format!("{},\n", fmt_num(x)));
                        failures.push(json!({ "m": x, "error": e.to_string() }));
                    }
                }
            }
            headline = format!("sigma0 over {} margins", m.len());
        }
    }
    write_text(path, &csv)?;
    Ok((
        json!({ "sweep": spec, "cells": cell_reports, "failures": failures }),
        headline,
    ))
}
