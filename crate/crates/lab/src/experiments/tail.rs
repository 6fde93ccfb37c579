use hoelder_core::holder::vertex_norm;
use hoelder_core::paths::PolygonalPath;
use hoelder_core::process::{Generator, GeneratorKind, GeneratorSpec};
use hoelder_core::stats::{binomial_se, run_replicas};

use super::{alpha_of, diff_se, stream};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::report::{ExperimentReport, RowMaker, Status};

const MC_SLACK: f64 = 2.0;

fn norms(gen: &Generator, n: usize, alpha: f64, replicas: usize, base: u64) -> Result<Vec<f64>> {
    let v: Vec<Result<f64>> = run_replicas(base, replicas, |_, rng| {
        let path = PolygonalPath::donsker(gen.sample(n, rng)?)?;
        Ok(vertex_norm(&path, alpha)?)
    });
    let mut v = v.into_iter().collect::<Result<Vec<f64>>>()?;
    v.sort_by(f64::total_cmp);
    Ok(v)
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    sorted[((sorted.len() - 1) as f64 * q).round() as usize]
}

fn pareto(beta: f64, seed: u64) -> Result<Generator> {
    Ok(Generator::new(&GeneratorSpec {
        kind: GeneratorKind::IidPareto { beta, symmetric: true },
        seed,
    })?)
}

/// Median of the vertex norm at the smallest `n` for the first tail
/// exponent, on a stream disjoint from the main run.
pub fn pilot_threshold(cfg: &ExperimentConfig) -> Result<f64> {
    let alpha = alpha_of(cfg.p)?;
    let beta = cfg.betas.first().copied().unwrap_or(cfg.p);
    let n = *cfg.n_grid.iter().min().expect("validated");
    let reps = cfg.pilot_replicas.unwrap_or(cfg.replicas);
    let v = norms(&pareto(beta, cfg.seed)?, n, alpha, reps, stream(cfg.seed, 3, 0))?;
    Ok(quantile(&v, 0.5))
}

/// `μ̂{vertex_norm > M}` across `n` for symmetric Pareto innovations. Tail
/// exponents at most `p` are expected to give a non-decreasing sequence,
/// larger ones a decreasing one. A configured generator replaces the
/// Pareto family.
pub fn run_tail_boundary(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let alpha = alpha_of(cfg.p)?;
    let mk = RowMaker {
        experiment: "tail_boundary",
        seed: cfg.seed,
    };
    let mut out = ExperimentReport::default();
    let m = match cfg.threshold {
        Some(m) => {
            out.push(mk.info("threshold", 0, "fixed", m, 0.0));
            m
        }
        None => {
            let m = pilot_threshold(cfg)?;
            out.push(mk.info("threshold", 0, "pilot", m, 0.0));
            m
        }
    };

    let cases: Vec<(String, Option<f64>, Generator)> = match &cfg.generator {
        Some(spec) => vec![("generator".to_string(), None, Generator::new(spec)?)],
        None => {
            let betas = if cfg.betas.is_empty() {
                vec![cfg.p, 2.0 * cfg.p]
            } else {
                cfg.betas.clone()
            };
            betas
                .into_iter()
                .map(|b| Ok((format!("beta={b}"), Some(b), pareto(b, cfg.seed)?)))
                .collect::<Result<_>>()?
        }
    };

    for (ci, (label, beta, gen)) in cases.iter().enumerate() {
        let mut est = Vec::with_capacity(cfg.n_grid.len());
        for (ni, &n) in cfg.n_grid.iter().enumerate() {
            let v = norms(
                gen,
                n,
                alpha,
                cfg.replicas,
                stream(cfg.seed, 4, (ci * 1000 + ni) as u64),
            )?;
            let frac = (v.len() - v.partition_point(|x| *x <= m)) as f64 / v.len() as f64;
            let se = binomial_se(frac, v.len());
            est.push((frac, se));
            out.push(mk.info("exceed", n as u64, label.clone(), frac, se));
            out.push(mk.info("median", n as u64, label.clone(), quantile(&v, 0.5), f64::NAN));
            out.push(mk.info("q90", n as u64, label.clone(), quantile(&v, 0.9), f64::NAN));
        }
        let Some(beta) = beta else { continue };
        if est.len() < 2 {
            continue;
        }
        let (first, last) = (est[0], est[est.len() - 1]);
        let total = last.0 - first.0;
        let total_se = diff_se(first.1, last.1);
        let n_last = *cfg.n_grid.last().expect("validated") as u64;
        if *beta <= cfg.p {
            // No step may drop by more than its noise.
            let ok = est
                .windows(2)
                .all(|w| w[1].0 - w[0].0 >= -MC_SLACK * diff_se(w[0].1, w[1].1));
            out.push(mk.row(
                "trend_nondecreasing",
                n_last,
                label.clone(),
                total,
                total_se,
                0.0,
                Status::from_bool(ok),
            ));
        } else {
            let steps_ok = est
                .windows(2)
                .all(|w| w[1].0 - w[0].0 <= MC_SLACK * diff_se(w[0].1, w[1].1));
            let ok = steps_ok && total < -MC_SLACK * total_se;
            out.push(mk.row(
                "trend_decreasing",
                n_last,
                label.clone(),
                total,
                total_se,
                0.0,
                Status::from_bool(ok),
            ));
        }
    }
    Ok(out)
}
