use hoelder_core::holder::{max_vertex_ratio, tightness_statistic};
use hoelder_core::paths::PolygonalPath;
use hoelder_core::process::{hannan_projections, linear_filter, martingale_coboundary_split, Coefficients, Innovation};
use hoelder_core::stats::{kendall_tau, mean_se, run_replicas};

use super::{alpha_of, stream, DEFAULT_K_GRID};
use crate::config::ExperimentConfig;
use crate::error::{LabError, Result};
use crate::report::{ExperimentReport, RowMaker, Status};

/// Coefficients beyond this many terms are dropped for closed-form families.
pub const MAX_TERMS: usize = 1024;

fn truncated(a: &Coefficients) -> Vec<f64> {
    match a {
        Coefficients::Finite { values } => values.clone(),
        _ => {
            let total = a.abs_tail(0) + a.get(0).abs();
            let mut t = 1;
            while t < MAX_TERMS && a.abs_tail(t - 1) > 1e-17 * total {
                t += 1;
            }
            (0..t).map(|i| a.get(i)).collect()
        }
    }
}

struct Replica {
    /// Residual statistic per `K`.
    residual: Vec<f64>,
    /// Violations of the coboundary bound, and the largest ratio to it.
    violations: usize,
    worst: f64,
    identity_err: f64,
}

/// Residual tightness of `f - f_K` against the projection tail sums, and
/// the coboundary bound `||n^{-1/2} Σ (g - g∘T)||_α ≤ 2 n^{-1/p} max |g|` on
/// every replica.
pub fn run_hannan(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let alpha = alpha_of(cfg.p)?;
    let a_spec = cfg
        .coefficients
        .clone()
        .unwrap_or(Coefficients::Geometric { scale: 1.0, ratio: 0.5 });
    let inn = cfg.innovation.unwrap_or(Innovation::Gaussian);
    let ks: Vec<usize> = if cfg.k_grid.is_empty() {
        DEFAULT_K_GRID.to_vec()
    } else {
        cfg.k_grid.clone()
    };
    let first_level = cfg.j_grid.first().copied().unwrap_or(1);
    let a = truncated(&a_spec);
    if a.iter().any(|v| !v.is_finite()) {
        return Err(LabError::Config("coefficients must be finite".into()));
    }
    let terms = a.len();
    let mk = RowMaker {
        experiment: "hannan",
        seed: cfg.seed,
    };
    let mut out = ExperimentReport::default();

    let report = hannan_projections(
        &a_spec,
        inn.lp_norm(cfg.p)?,
        terms.max(ks.iter().max().copied().unwrap_or(0) + 1),
    )?;
    out.push(mk.row(
        "summable",
        0,
        format!("terms={terms}"),
        if report.summable { 1.0 } else { 0.0 },
        0.0,
        f64::NAN,
        Status::NotApplicable,
    ));
    for &k in &ks {
        out.push(mk.info("projection_tail", 0, format!("K={k}"), report.tail_sums[k], 0.0));
    }

    let splits = ks
        .iter()
        .map(|&k| martingale_coboundary_split(&a, k))
        .collect::<hoelder_core::Result<Vec<_>>>()?;
    let burn = (terms - 1).max(ks.iter().copied().max().unwrap_or(0));

    for (ni, &n) in cfg.n_grid.iter().enumerate() {
        let nn = n as u64;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut violations = 0usize;
        let mut worst = 0.0f64;
        let mut identity_err = 0.0f64;
        for seed in 0..cfg.seeds {
            let base = stream(cfg.seed, 6, (ni * 100_000 + seed) as u64);
            let reps: Vec<Result<Replica>> = run_replicas(base, cfg.replicas, |_, rng| {
                let mut eps = Vec::new();
                inn.fill(rng, burn + n, &mut eps);
                let mut residual = Vec::with_capacity(ks.len());
                let (mut violations, mut worst, mut identity_err) = (0, 0.0f64, 0.0f64);
                for (k, split) in ks.iter().zip(&splits) {
                    let r: Vec<f64> = (0..=burn)
                        .map(|i| if i > *k { a.get(i).copied().unwrap_or(0.0) } else { 0.0 })
                        .collect();
                    let x = linear_filter(&r, &eps, n);
                    residual.push(tightness_statistic(&PolygonalPath::donsker(x)?, alpha, first_level)?);

                    let sp = split.paths(&a, &eps[burn - k..])?;
                    for t in 0..n {
                        identity_err = identity_err.max((sp.f[t] - (sp.m[t] + sp.g[t] - sp.g[t + 1])).abs());
                    }
                    // Vertices of Σ (g_t - g_{t+1}) up to the constant g_0;
                    // the raw ratio uses unnormalised gaps, each at least 1.
                    let y: Vec<f64> = sp.g.iter().map(|v| -v).collect();
                    let lhs = max_vertex_ratio(&y, alpha, 1, n);
                    let gmax = sp.g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    if lhs > 2.0 * gmax {
                        violations += 1;
                    }
                    if gmax > 0.0 {
                        worst = worst.max(lhs / (2.0 * gmax));
                    }
                }
                Ok(Replica {
                    residual,
                    violations,
                    worst,
                    identity_err,
                })
            });
            let reps = reps.into_iter().collect::<Result<Vec<Replica>>>()?;
            for (ki, &k) in ks.iter().enumerate() {
                let v: Vec<f64> = reps.iter().map(|r| r.residual[ki]).collect();
                let (mean, se) = mean_se(&v);
                out.push(mk.info("residual_tightness", nn, format!("seed={seed} K={k}"), mean, se));
                xs.push(report.tail_sums[k]);
                ys.push(mean);
            }
            for r in &reps {
                violations += r.violations;
                worst = worst.max(r.worst);
                identity_err = identity_err.max(r.identity_err);
            }
        }
        let evaluations = cfg.seeds * cfg.replicas * ks.len();
        out.push(mk.row(
            "coboundary_bound",
            nn,
            format!("evaluations={evaluations}"),
            violations as f64,
            0.0,
            0.0,
            Status::from_bool(violations == 0),
        ));
        out.push(mk.info("coboundary_max_ratio", nn, "", worst, 0.0));
        out.push(mk.info("coboundary_identity_error", nn, "", identity_err, 0.0));
        if !report.summable {
            out.push(mk.info("residual_kendall_tau", nn, "non-summable", f64::NAN, f64::NAN));
            continue;
        }
        match kendall_tau(&xs, &ys) {
            Ok(kt) => {
                out.push(mk.row(
                    "residual_kendall_tau",
                    nn,
                    "",
                    kt.tau_b,
                    0.0,
                    0.0,
                    Status::from_bool(kt.tau_b > 0.0),
                ));
                out.push(mk.row(
                    "residual_kendall_p",
                    nn,
                    "",
                    kt.p_value,
                    0.0,
                    0.05,
                    Status::from_bool(kt.tau_b > 0.0 && kt.p_value < 0.05),
                ));
            }
            Err(_) => out.push(mk.info("residual_kendall_tau", nn, "degenerate", f64::NAN, f64::NAN)),
        }
    }
    Ok(out)
}
