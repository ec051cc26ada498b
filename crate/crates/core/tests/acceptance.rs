//! Acceptance checks. Prints one line per criterion and exits nonzero if any fails.

mod common;

use std::time::Instant;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use refprice::diagnostics::{
    bregman, check_rate_bound, detect_convergence, dist_to_sne, fit_rate, ConvergenceOptions, RateModel,
    NUMERICAL_FLOOR,
};
use refprice::equilibrium::{best_response, best_response_dynamics, largest_best_response_profile, sne_closed_form};
use refprice::market::{Firm, MarketParams};
use refprice::omd::{simulate, simulate_induced, Learner, Regularizer, ScheduleRegime, StepSchedule};
use refprice::stepsize::{
    const_step_region, const_step_region_for, decreasing_step_schedules, memory_rate_bound, rate_constant, sigma0,
};

type Check = (u32, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn c1_equilibrium() -> Outcome {
    let p = MarketParams::example();
    let s = sne_closed_form(&p).unwrap();
    let rounded = [round2(s.p1_star), round2(s.p2_star), round2(s.r_star)];
    let g = [
        p.gradient(Firm::One, s.p1_star, s.p2_star, s.r_star).unwrap(),
        p.gradient(Firm::Two, s.p1_star, s.p2_star, s.r_star).unwrap(),
    ];
    let gmax = g[0].abs().max(g[1].abs());
    outcome(
        rounded == [1.41, 1.28, 1.39] && gmax < 1e-10,
        format!("SNE {rounded:?}, max |gradient| {gmax:.1e}"),
    )
}

fn first_below_harmonic() -> Option<u64> {
    let p = MarketParams::example();
    let tr = simulate(&p, &quadratic_pair(1.0, StepSchedule::harmonic(1.0)), ex_init(), 10_000).unwrap();
    dist_to_sne(&tr, &sne_closed_form(&p).unwrap())
        .unwrap()
        .first_below(1e-3)
}

fn c2_harmonic() -> Outcome {
    let p = MarketParams::example();
    let start = Instant::now();
    let tr = simulate(&p, &quadratic_pair(1.0, StepSchedule::harmonic(1.0)), ex_init(), 10_000).unwrap();
    let d = dist_to_sne(&tr, &sne_closed_form(&p).unwrap()).unwrap();
    let v = detect_convergence(&tr, &ConvergenceOptions::default()).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let last = *d.x.last().unwrap();
    let at100 = d.x_at(100).unwrap();
    outcome(
        v.at_sne && last <= 1e-3 && at100 <= 0.05 && elapsed < 1.0,
        format!("at_sne={}, x_T={last:.2e}, x_100={at100:.2e}, {elapsed:.3}s", v.at_sne),
    )
}

fn c3_summable() -> Outcome {
    let p = MarketParams::example();
    let tr = simulate(
        &p,
        &quadratic_pair(1.0, StepSchedule::power(0.1, 2.0, 0.0)),
        ex_init(),
        100_000,
    )
    .unwrap();
    let v = detect_convergence(&tr, &ConvergenceOptions::default()).unwrap();
    let l = v.limit_point.unwrap();
    let near = l.iter().zip([1.21, 1.18, 1.20]).all(|(a, b)| (a - b).abs() <= 0.02);
    let br = best_response(&p, Firm::One, l[1], l[2]).unwrap();
    outcome(
        v.converged && near && !v.at_sne && (br - 1.40).abs() <= 0.01 && (br - l[0]).abs() > 0.01,
        format!(
            "limit ({:.4}, {:.4}, {:.4}), at_sne={}, firm-1 best response {br:.4}",
            l[0], l[1], l[2], v.at_sne
        ),
    )
}

fn c4_oscillation() -> Outcome {
    let p = MarketParams::example();
    let tr = simulate(&p, &quadratic_pair(1.0, StepSchedule::constant(0.6)), ex_init(), 10_000).unwrap();
    let v = detect_convergence(&tr, &ConvergenceOptions::default()).unwrap();
    let amp = (900..1000u64)
        .map(|t| (tr.at(t + 1).unwrap().p1 - tr.at(t).unwrap().p1).abs())
        .fold(0.0, f64::max);
    outcome(
        v.oscillating && amp >= 0.01,
        format!("oscillating={}, max |Δp1| on [900,1000] = {amp:.3}", v.oscillating),
    )
}

fn c5_scaled_constant() -> Outcome {
    let p = MarketParams::example();
    let firms = pair(
        StepSchedule::constant(0.6 / p.beta(Firm::One)),
        StepSchedule::constant(0.6 / p.beta(Firm::Two)),
    );
    let tr = simulate(&p, &firms, ex_init(), 10_000).unwrap();
    let v = detect_convergence(&tr, &ConvergenceOptions::default()).unwrap();
    let fast = dist_to_sne(&tr, &sne_closed_form(&p).unwrap())
        .unwrap()
        .first_below(1e-3);
    let slow = first_below_harmonic();
    let earlier = matches!((fast, slow), (Some(a), Some(b)) if a < b);
    outcome(
        v.at_sne && earlier,
        format!("at_sne={}, first x ≤ 1e-3 at {fast:?} vs {slow:?} for 1/t", v.at_sne),
    )
}

fn c6_induced() -> Outcome {
    let p = MarketParams::example();
    let nature = Learner::nature_default(&p);
    let mut worst: f64 = 0.0;
    for (_, firms) in regime_schedules() {
        let a = simulate(&p, &firms, ex_init(), 10_000).unwrap();
        let b = simulate_induced(&p, &firms, &nature, ex_init(), 10_000).unwrap();
        for (x, y) in a.periods().iter().zip(b.periods()) {
            for (u, v) in x.components().iter().zip(y.components()) {
                worst = worst.max((u - v).abs());
            }
        }
    }
    outcome(
        worst <= 1e-9,
        format!("max component gap over four schedules {worst:.1e}"),
    )
}

fn c7_best_response() -> Outcome {
    let p = MarketParams::example();
    let s = sne_closed_form(&p).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for (r1, up) in [(1.0, true), (2.0, false)] {
        let tr = best_response_dynamics(&p, r1, 200).unwrap();
        let rs = tr.column(|x| x.r);
        let mono = rs.windows(2).all(|w| if up { w[1] >= w[0] } else { w[1] <= w[0] });
        let l = tr.last().unwrap();
        let err = (l.p1 - s.p1_star)
            .abs()
            .max((l.p2 - s.p2_star).abs())
            .max((l.r - s.r_star).abs());
        ok &= mono && err <= 1e-6;
        parts.push(format!("r1={r1}: monotone={mono}, error {err:.1e}"));
    }
    outcome(ok, parts.join("; "))
}

fn c8_region_algebra() -> Outcome {
    let s0 = sigma0(5.0).unwrap();
    let rep = const_step_region_for(5.0, 4.0, 4.0).unwrap();
    let (z1, z2, h) = (
        rep.z1.unwrap_or(f64::NAN),
        rep.z2.unwrap_or(f64::NAN),
        rep.h.unwrap_or(f64::NAN),
    );
    outcome(
        s0 > 3.92
            && s0 < 3.93
            && rep.feasible
            && (z1 - 0.1686).abs() <= 1e-3
            && (z2 - 0.2589).abs() <= 1e-3
            && (-0.25..0.0).contains(&h),
        format!("sigma0(5)={s0:.4}, z1={z1:.4}, z2={z2:.4}, H={h:.3e}"),
    )
}

fn c9_geometric_certificate() -> Outcome {
    let p = MarketParams::example();
    let sigma = 9.0;
    let rep = const_step_region(&p, sigma, sigma).unwrap();
    let Some(eps) = rep.recommended_eps else {
        return outcome(false, "region infeasible at sigma = 9");
    };
    let firms = [
        Learner::quadratic(sigma, StepSchedule::constant(eps[0])).unwrap(),
        Learner::quadratic(sigma, StepSchedule::constant(eps[1])).unwrap(),
    ];
    let tr = simulate(&p, &firms, ex_init(), 500).unwrap();
    let d = dist_to_sne(&tr, &sne_closed_form(&p).unwrap()).unwrap();
    let chk = check_rate_bound(&d.x, d.first_period, |t| memory_rate_bound(&p, sigma, t));
    let usable = d.x.iter().position(|&v| v <= NUMERICAL_FLOOR).unwrap_or(d.x.len());
    let fit = fit_rate(&d.x, d.first_period, RateModel::Geometric, Some(usable / 2..usable)).unwrap();
    let ceiling = (0.5 * (1.0 + p.a())).ln() + 0.05;
    outcome(
        chk.holds && fit.slope <= ceiling,
        format!(
            "bound holds={} (first violation {:?}), geometric slope {:.3} vs ceiling {ceiling:.3}",
            chk.holds, chk.first_violation, fit.slope
        ),
    )
}

fn c10_decreasing_rate() -> Outcome {
    let p = MarketParams::example();
    let rc = match rate_constant(&p, Some(0.9), 10_000_000) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("rate_constant failed: {e}")),
    };
    let delta2 = p.width().powi(2);
    let identities = rc.rho_a == 2
        && rc.t_a == 2
        && (rc.u - 5.2).abs() <= 1e-9
        && rc.identity_residual <= 1e-9 * rc.c
        && rc.c > 2.0 * rc.t_tilde as f64 * delta2
        && rc.t_tilde_tail_verified;

    let sched = decreasing_step_schedules(&p, 0.5).unwrap();
    let firms = [
        Learner::quadratic(2.0, sched[0].clone()).unwrap(),
        Learner::quadratic(2.0, sched[1].clone()).unwrap(),
    ];
    let tr = simulate(&p, &firms, ex_init(), 10_000).unwrap();
    let d = dist_to_sne(&tr, &sne_closed_form(&p).unwrap()).unwrap();
    let chk = check_rate_bound(&d.x, d.first_period, |t| rc.bound(t));
    let usable = d.x.iter().position(|&v| v <= NUMERICAL_FLOOR).unwrap_or(d.x.len());
    let slope = fit_rate(&d.x, d.first_period, RateModel::Power, Some(usable / 2..usable)).map(|f| f.slope);
    let slope_ok = matches!(slope, Ok(s) if (-1.3..=-0.7).contains(&s));
    outcome(
        identities && chk.holds && slope_ok,
        format!(
            "rho_a={}, t_a={}, u={:.4}, c={:.1}, identities={identities}, x_t ≤ c/t: {}, power slope {} over t ≤ {}",
            rc.rho_a,
            rc.t_a,
            rc.u,
            rc.c,
            chk.holds,
            slope.map_or_else(|e| e.to_string(), |s| format!("{s:.2}")),
            d.first_period + usable as u64 - 1
        ),
    )
}

fn c11_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    let (mut sets, mut sne_err, mut br_err): (usize, f64, f64) = (0, 0.0, 0.0);
    while sets < 100 {
        let p = random_params(&mut rng);
        let s = match sne_closed_form(&p) {
            Ok(s) if s.interior => s,
            _ => continue,
        };
        sets += 1;
        let o = sne_oracle(&p).unwrap();
        for (a, b) in s.components().iter().zip(o) {
            sne_err = sne_err.max((a - b).abs());
        }
        for _ in 0..20 {
            let r = p.p_lo() + rng.gen::<f64>() * p.width();
            let (p1, p2) = largest_best_response_profile(&p, r).unwrap();
            let e = match interior_profile_oracle(&p, r) {
                Some([q1, q2]) if p.in_box(q1) && p.in_box(q2) => (p1 - q1).abs().max((p2 - q2).abs()),
                _ => (p1 - clamped_best_response(&p, Firm::One, p2, r))
                    .abs()
                    .max((p2 - clamped_best_response(&p, Firm::Two, p1, r)).abs()),
            };
            br_err = br_err.max(e);
        }
    }
    outcome(
        sne_err <= 1e-10 && br_err <= 1e-8,
        format!("{sets} markets: SNE gap {sne_err:.1e}, best-response gap {br_err:.1e}"),
    )
}

fn c12_invariants(suite_start: Instant) -> Outcome {
    let p = MarketParams::example();
    let mut failures = Vec::new();

    for (name, firms) in regime_schedules() {
        let a = simulate(&p, &firms, ex_init(), 3000).unwrap();
        let b = simulate(&p, &firms, ex_init(), 3000).unwrap();
        let same = a.periods().iter().zip(b.periods()).all(|(x, y)| {
            x.components().map(f64::to_bits) == y.components().map(f64::to_bits) && x.y1.to_bits() == y.y1.to_bits()
        });
        if !same {
            failures.push(format!("rerun differs for {name}"));
        }
        if !a
            .periods()
            .iter()
            .all(|r| p.in_box(r.p1) && p.in_box(r.p2) && p.in_box(r.r))
        {
            failures.push(format!("box left for {name}"));
        }
    }

    let x = |k: usize, n: usize| p.p_lo() + p.width() * k as f64 / (n - 1) as f64;
    let n = 11;
    let mut grid = 0;
    for i in 0..n {
        for j in 0..n {
            let s = p.theta(Firm::One) * x(i, n) + p.theta(Firm::Two) * x(j, n);
            if (p.reference_update(s, x(i, n), x(j, n)).unwrap() - s).abs() > 1e-15 {
                failures.push("reference fixed point".into());
            }
            for k in 0..n {
                for f in Firm::BOTH {
                    let d = p.demand(f, x(i, n), x(j, n), x(k, n)).unwrap();
                    let sf = p.surcharge_form_demand(f, x(i, n), x(j, n), x(k, n)).unwrap();
                    if (d - sf).abs() > 1e-12 {
                        failures.push("surcharge identity".into());
                    }
                    grid += 1;
                }
            }
        }
    }

    let regs = [
        Regularizer::quadratic(1.0).unwrap(),
        Regularizer::entropic(p.p_hi()).unwrap(),
    ];
    let m = 41;
    for reg in &regs {
        for i in 0..m {
            for j in 0..m {
                let d = bregman(reg, x(i, m), x(j, m));
                if d < 0.0 || (i != j && d <= 0.0) {
                    failures.push(format!("bregman {} at ({i},{j})", reg.describe()));
                }
            }
        }
    }

    let table = [
        (StepSchedule::harmonic(1.0), ScheduleRegime::SneConvergent),
        (StepSchedule::power(0.1, 2.0, 0.0), ScheduleRegime::MayConvergeOffSne),
        (StepSchedule::constant(0.6), ScheduleRegime::NonVanishing),
    ];
    for (s, want) in &table {
        if s.classify().regime() != *want {
            failures.push(format!("classifier {}", s.describe()));
        }
    }

    let elapsed = suite_start.elapsed().as_secs_f64();
    if elapsed >= 30.0 {
        failures.push(format!("suite took {elapsed:.1}s"));
    }
    failures.dedup();
    let detail = if failures.is_empty() {
        format!("determinism, box, fixed point, surcharge ({grid} points), Bregman, classifier all hold; {elapsed:.1}s")
    } else {
        failures.join("; ")
    };
    outcome(failures.is_empty(), detail)
}

fn main() {
    let start = Instant::now();
    let checks: Vec<Check> = vec![
        (1, "equilibrium reproduction", c1_equilibrium),
        (2, "harmonic steps reach the equilibrium", c2_harmonic),
        (3, "summable steps settle off the equilibrium", c3_summable),
        (4, "large constant steps oscillate", c4_oscillation),
        (5, "scaled constant steps are faster", c5_scaled_constant),
        (6, "induced game equivalence", c6_induced),
        (7, "best-response dynamics", c7_best_response),
        (8, "constant-step region algebra", c8_region_algebra),
        (9, "geometric certificate", c9_geometric_certificate),
        (10, "decreasing-step rate constant", c10_decreasing_rate),
        (11, "oracle equivalence", c11_oracles),
    ];
    let mut results = Vec::new();
    for (id, name, f) in checks {
        results.push((id, name, f()));
    }
    results.push((12, "invariant suites", c12_invariants(start)));

    let mut failed = 0;
    for (id, name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("criterion {id:>2} {tag}  {name}: {}", o.detail);
    }
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
