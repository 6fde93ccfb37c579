use hoelder_core::holder::tightness_profile;
use hoelder_core::paths::PolygonalPath;
use hoelder_core::process::{Generator, GeneratorKind, GeneratorSpec, Innovation};
use hoelder_core::stats::{binomial_se, ks_two_sample, mean_se, replica_rng, run_replicas};

use super::{alpha_of, stream, DEFAULT_J_GRID};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::report::{ExperimentReport, RowMaker, Status};

/// Per-replica output: the statistic at each `J` and the endpoint.
struct Replica {
    stats: Vec<f64>,
    endpoint: f64,
}

/// `μ̂{sup_{j≥J} 2^{jα} max |λ_r| > ε}` on the Donsker path for each `(n, J)`,
/// with paired steps between consecutive `J`, and an endpoint KS test
/// against `N(0, η̂)`.
pub fn run_donsker(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let spec = cfg.generator.clone().unwrap_or(GeneratorSpec {
        kind: GeneratorKind::IidGaussian,
        seed: cfg.seed,
    });
    let gen = Generator::new(&spec)?;
    let alpha = alpha_of(cfg.p)?;
    let js: Vec<u32> = if cfg.j_grid.is_empty() {
        DEFAULT_J_GRID.to_vec()
    } else {
        cfg.j_grid.clone()
    };
    let mk = RowMaker {
        experiment: "donsker",
        seed: cfg.seed,
    };
    let mut out = ExperimentReport::default();

    for (ni, &n) in cfg.n_grid.iter().enumerate() {
        let base = stream(cfg.seed, 1, ni as u64);
        let reps: Vec<Result<Replica>> = run_replicas(base, cfg.replicas, |_, rng| {
            let values = gen.sample(n, rng)?;
            let endpoint = values.iter().sum::<f64>() / (n as f64).sqrt();
            let path = PolygonalPath::donsker(values)?;
            let stats = tightness_profile(&path, alpha, &js)?;
            Ok(Replica { stats, endpoint })
        });
        let reps = reps.into_iter().collect::<Result<Vec<Replica>>>()?;
        let r = reps.len();
        let nn = n as u64;

        let exceed: Vec<Vec<bool>> = reps
            .iter()
            .map(|x| x.stats.iter().map(|s| *s > cfg.epsilon).collect())
            .collect();
        let mut prev: Option<f64> = None;
        for (ji, &j) in js.iter().enumerate() {
            let hits = exceed.iter().filter(|e| e[ji]).count();
            let est = hits as f64 / r as f64;
            out.push(mk.info("tightness", nn, format!("J={j}"), est, binomial_se(est, r)));
            if let Some(pv) = prev {
                // The statistic is non-increasing in J, so the paired step is
                // the frequency of exceeding at the previous J only.
                let step = exceed.iter().filter(|e| e[ji - 1] && !e[ji]).count() as f64 / r as f64;
                let se = binomial_se(step, r);
                let ok = est < pv && step > se;
                out.push(mk.row(
                    "tightness_step",
                    nn,
                    format!("J={}->{j}", js[ji - 1]),
                    step,
                    se,
                    se,
                    Status::from_bool(ok),
                ));
            }
            prev = Some(est);
        }

        let ends: Vec<f64> = reps.iter().map(|x| x.endpoint).collect();
        let squares: Vec<f64> = ends.iter().map(|e| e * e).collect();
        let (eta, eta_se) = mean_se(&squares);
        out.push(mk.info("eta", nn, "", eta, eta_se));

        if eta > 0.0 {
            let mut rng = replica_rng(stream(cfg.seed, 2, ni as u64), 0);
            let sd = eta.sqrt();
            let reference: Vec<f64> = (0..cfg.ks_reference)
                .map(|_| sd * Innovation::Gaussian.sample(&mut rng))
                .collect();
            let ks = ks_two_sample(&ends, &reference)?;
            out.push(mk.info("endpoint_ks_distance", nn, "", ks.statistic, 0.0));
            out.push(mk.row(
                "endpoint_ks",
                nn,
                "",
                ks.p_value,
                0.0,
                0.01,
                Status::from_bool(ks.p_value > 0.01),
            ));
        } else {
            let degenerate = ends.iter().all(|e| *e == 0.0);
            out.push(mk.row(
                "endpoint_ks",
                nn,
                "degenerate",
                0.0,
                0.0,
                0.0,
                Status::from_bool(degenerate),
            ));
        }
    }
    Ok(out)
}
