use hoelder_core::counterexample::sim::{chain_with, TowerSystem};
use hoelder_core::counterexample::{
    f_l_main_part, f_l_simple, kappa_prime, main_part_closed_form, main_part_weak_pow_exact, validate_schedule,
    Exactness, McConfig, Mode, Schedule,
};
use hoelder_core::process::ScheduleRef;
use hoelder_core::stats::binomial_se;
use hoelder_core::weak_lp::weak_norm_exact;

use super::stream;
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::report::{ExperimentReport, RowMaker, Status};

pub const DESK_LEVELS: usize = 3;

pub(crate) fn resolve_schedule(cfg: &ExperimentConfig) -> Result<Schedule> {
    let r = cfg.schedule.clone().unwrap_or(ScheduleRef::Built {
        p: cfg.p,
        mode: Mode::Desk,
        levels: DESK_LEVELS,
    });
    Ok(r.resolve()?)
}

/// Condition rows. Proxy and limit conditions are reported without a
/// verdict; the simulated chain is what tests them.
pub fn validation_rows(s: &Schedule, mk: &RowMaker) -> ExperimentReport {
    let mut out = ExperimentReport::default();
    for r in validate_schedule(s).rows {
        let n = s.levels.get(r.level - 1).and_then(|lv| lv.n_u64()).unwrap_or(0);
        let status = match r.kind {
            Exactness::Exact | Exactness::Numeric => Status::from_bool(r.pass),
            Exactness::Proxy | Exactness::Limit => Status::NotApplicable,
        };
        out.push(mk.row(
            format!("condition_{}", r.condition),
            n,
            format!("level={} kind={}", r.level, r.kind.as_str()),
            r.value,
            0.0,
            r.threshold,
            status,
        ));
    }
    out
}

/// Exact weak norms of every tabulable `f_l` with floor mass `1/n_l`.
pub fn weak_norm_rows(s: &Schedule, mk: &RowMaker) -> Result<ExperimentReport> {
    let mut out = ExperimentReport::default();
    let kp = kappa_prime(s.p)?;
    for (idx, lv) in s.levels.iter().enumerate() {
        let l = idx + 1;
        let index = format!("level={l}");
        let (Some(n), Some(j)) = (lv.n_u64(), lv.j_u64()) else {
            out.push(mk.info("f_weak_norm", 0, index, f64::NAN, 0.0));
            continue;
        };
        if j > 62 || lv.i + j > 62 {
            out.push(mk.info("f_weak_norm", n, index, f64::NAN, 0.0));
            continue;
        }
        let mass = 1.0 / n as f64;
        let full = weak_norm_exact(&f_l_simple(s, l, mass)?, s.p)?;
        let cap = kp / lv.big_l;
        out.push(mk.row(
            "f_weak_norm",
            n,
            index.clone(),
            full,
            0.0,
            cap,
            Status::from_bool(full <= cap),
        ));
        let main = weak_norm_exact(&f_l_main_part(s, l, mass)?, s.p)?;
        let cap = (2.0 / lv.big_l.powf(s.p)).powf(1.0 / s.p);
        out.push(mk.row(
            "main_part_weak_norm",
            n,
            index.clone(),
            main,
            0.0,
            cap,
            Status::from_bool(main <= cap),
        ));
        let same = main_part_weak_pow_exact(lv).is_some_and(|v| v == main_part_closed_form(j));
        out.push(mk.row(
            "main_part_closed_form",
            n,
            index,
            main,
            0.0,
            f64::NAN,
            Status::from_bool(same),
        ));
    }
    Ok(out)
}

/// Schedule checks, exact `f_l` norms, and the simulated chain with its
/// Gaussian control at every level.
pub fn run_counterexample(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let s = resolve_schedule(cfg)?;
    let mk = RowMaker {
        experiment: "counterexample",
        seed: cfg.seed,
    };
    let mut out = validation_rows(&s, &mk);
    out.extend(weak_norm_rows(&s, &mk)?);

    let sys = TowerSystem::new(&s)?;
    let mc = McConfig {
        replicas: cfg.replicas,
        seed: stream(cfg.seed, 5, 0),
        ..McConfig::default()
    };
    let mut control = Vec::new();
    for l in 1..=s.levels.len() {
        let r = chain_with(&sys, l, &mc)?;
        let n = r.n;
        let index = format!("level={l}");
        for c in &r.checks {
            out.push(mk.row(
                c.name.clone(),
                n,
                index.clone(),
                c.lhs,
                c.se,
                c.rhs,
                Status::from_bool(c.pass),
            ));
        }
        let reps = r.replicas;
        out.push(mk.info("p_l", n, index.clone(), r.p_l, binomial_se(r.p_l, reps)));
        out.push(mk.info("p_prime", n, index.clone(), r.p_prime, binomial_se(r.p_prime, reps)));
        out.push(mk.info(
            "window_event",
            n,
            index.clone(),
            r.window_event,
            binomial_se(r.window_event, reps),
        ));
        let se = binomial_se(r.modulus_event, reps);
        match cfg.floors.get(l - 1) {
            Some(&floor) => out.push(mk.row(
                "modulus_event",
                n,
                index.clone(),
                r.modulus_event,
                se,
                floor,
                Status::from_bool(r.modulus_event > floor),
            )),
            None => out.push(mk.info("modulus_event", n, index.clone(), r.modulus_event, se)),
        }
        let cse = binomial_se(r.control_modulus_event, reps);
        out.push(mk.info(
            "control_window_event",
            n,
            index.clone(),
            r.control_window_event,
            binomial_se(r.control_window_event, reps),
        ));
        out.push(mk.info("control_modulus_event", n, index, r.control_modulus_event, cse));
        control.push((n, r.control_modulus_event, cse));
    }
    if control.len() >= 2 {
        let (first, last) = (control[0], control[control.len() - 1]);
        let ratio = if last.1 > 0.0 { first.1 / last.1 } else { f64::INFINITY };
        out.push(mk.row(
            "control_decay",
            last.0,
            format!("level=1->{}", control.len()),
            ratio,
            f64::NAN,
            2.0,
            Status::from_bool(first.1 >= 2.0 * last.1 && first.1 > 0.0),
        ));
    }
    Ok(out)
}
