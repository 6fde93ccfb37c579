use hoelder_core::bounds::{
    doob_type_check, dyadic_tail_sum, geometric_dyadic_sum, increment_split, log_grid, moment_maximal_statistic,
    nagaev_check, summarize, BoundRow, MartingaleSummary, NagaevParams, TruncationModel,
};
use hoelder_core::counterexample::{f_distribution, Mode};
use hoelder_core::paths::PolygonalPath;
use hoelder_core::process::{Generator, GeneratorKind, GeneratorSpec, ScheduleRef};
use hoelder_core::stats::{binomial_se, replica_rng, run_replicas};
use hoelder_core::weak_lp::{weak_norm_sample, SimpleFunction};
use rand::Rng;

use super::counterexample::{resolve_schedule, DESK_LEVELS};
use super::{alpha_of, stream};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::report::{ExperimentReport, RowMaker, Status};

pub const Y_GRID_POINTS: usize = 32;
pub const GEOMETRIC_P_POINTS: usize = 100;
pub const GEOMETRIC_N_MAX: u64 = 1001;
pub const RANDOM_SIMPLE: usize = 10_000;
pub const TRANSFER_R_POINTS: usize = 100;
pub const TRANSFER_T_POINTS: usize = 50;
pub const SHADOW_T_POINTS: usize = 16;

/// Summary, high-level increment norm, vertex norm and the path itself.
type Sample = (MartingaleSummary, f64, f64, Vec<f64>);

#[derive(Default)]
struct Tally {
    evaluations: usize,
    violations: usize,
}

impl Tally {
    fn add(&mut self, ok: bool) {
        self.evaluations += 1;
        if !ok {
            self.violations += 1;
        }
    }

    fn absorb(&mut self, other: &Tally) {
        self.evaluations += other.evaluations;
        self.violations += other.violations;
    }

    fn row(&self, mk: &RowMaker, statistic: &str, n: u64, index: String) -> crate::report::ReportRow {
        mk.row(
            statistic,
            n,
            format!("{index} evaluations={}", self.evaluations).trim().to_string(),
            self.violations as f64,
            0.0,
            0.0,
            Status::from_bool(self.violations == 0),
        )
    }
}

fn bound_rows(rows: &[BoundRow], tally: &mut Tally) -> f64 {
    let mut worst = 0.0f64;
    for r in rows {
        tally.add(r.pass);
        if r.rhs > 0.0 {
            worst = worst.max(r.lhs / r.rhs);
        }
    }
    worst
}

fn generators(cfg: &ExperimentConfig) -> Vec<(String, GeneratorKind)> {
    let schedule = cfg.schedule.clone().unwrap_or(ScheduleRef::Built {
        p: cfg.p,
        mode: Mode::Desk,
        levels: DESK_LEVELS,
    });
    let mut v = vec![
        ("iid_rademacher".to_string(), GeneratorKind::IidRademacher),
        ("iid_gaussian".to_string(), GeneratorKind::IidGaussian),
        (
            format!("iid_pareto_beta={}", 2.0 * cfg.p),
            GeneratorKind::IidPareto {
                beta: 2.0 * cfg.p,
                symmetric: true,
            },
        ),
        (
            "gf_martingale".to_string(),
            GeneratorKind::GfMartingale {
                schedule: schedule.clone(),
                levels: vec![],
            },
        ),
        (
            "bounded_martingale_R=1".to_string(),
            GeneratorKind::BoundedMartingale {
                schedule,
                levels: vec![],
                truncation: 1.0,
            },
        ),
    ];
    if let Some(spec) = &cfg.generator {
        v.push(("configured".to_string(), spec.kind.clone()));
    }
    v
}

/// The seeded inequality suite: Nagaev and Doob-type bounds on martingale
/// generators, the geometric and dyadic tail sums, the conditional
/// transfer step of the truncation argument and the high-level increment
/// shadow. Every family reports its evaluation and violation counts.
pub fn run_inequalities(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let p = cfg.p;
    let alpha = alpha_of(p)?;
    let mk = RowMaker {
        experiment: "inequalities",
        seed: cfg.seed,
    };
    let mut out = ExperimentReport::default();
    let mut total = Tally::default();
    let np = NagaevParams::new(p, 1.0)?;

    for (gi, (label, kind)) in generators(cfg).into_iter().enumerate() {
        let gen = Generator::new(&GeneratorSpec { kind, seed: cfg.seed })?;
        for (ni, &n) in cfg.n_grid.iter().enumerate() {
            let base = stream(cfg.seed, 7, (gi * 1000 + ni) as u64);
            let reps: Vec<Result<Sample>> = run_replicas(base, cfg.replicas, |_, rng| {
                let (m, v) = gen.martingale_sample(n, rng)?;
                let path = PolygonalPath::donsker(m.clone())?;
                let (_, high, _) = increment_split(&path, alpha)?;
                let vn = hoelder_core::holder::vertex_norm(&path, alpha)?;
                Ok((summarize(&m, &v)?, high, vn, m))
            });
            let reps = reps.into_iter().collect::<Result<Vec<_>>>()?;
            let summaries: Vec<MartingaleSummary> = reps.iter().map(|r| r.0).collect();
            let nn = n as u64;

            let ys = log_grid(0.25, 4.0 * (n as f64).sqrt(), Y_GRID_POINTS)?;
            let mut t = Tally::default();
            let worst = bound_rows(&nagaev_check(&summaries, &ys, &np)?, &mut t);
            out.push(t.row(&mk, "nagaev", nn, format!("gen={label}")));
            out.push(mk.info("nagaev_max_ratio", nn, format!("gen={label}"), worst, 0.0));
            total.absorb(&t);

            let d = doob_type_check(&summaries)?;
            total.add(d.pass);
            out.push(mk.row(
                "doob",
                nn,
                format!("gen={label}"),
                d.lhs,
                d.se,
                d.rhs,
                Status::from_bool(d.pass),
            ));

            // μ̂{high > t} t^p ≤ 2^p sup_x x^p μ̂{|m| > x}.
            let all_m: Vec<f64> = reps.iter().flat_map(|r| r.3.iter().copied()).collect();
            let weak = weak_norm_sample(&all_m, p)?.powf(p);
            let highs: Vec<f64> = reps.iter().map(|r| r.1).collect();
            let mut t = Tally::default();
            let top = highs.iter().cloned().fold(0.0, f64::max);
            if top > 0.0 {
                for x in log_grid(top * 1e-3, top, SHADOW_T_POINTS)? {
                    let frac = highs.iter().filter(|h| **h > x).count() as f64 / highs.len() as f64;
                    let se = binomial_se(frac, highs.len()) * x.powf(p);
                    let row = BoundRow::le("high_levels", n, "", frac * x.powf(p), 2f64.powf(p) * weak, se);
                    t.add(row.pass);
                }
            }
            out.push(t.row(&mk, "high_level_shadow", nn, format!("gen={label}")));
            total.absorb(&t);

            let pairs: Vec<(Vec<f64>, Vec<f64>)> = if n <= 4096 {
                let rng_base = stream(cfg.seed, 8, (gi * 1000 + ni) as u64);
                let k = cfg.replicas.min(200);
                (0..k as u64)
                    .map(|r| gen.martingale_sample(n, &mut replica_rng(rng_base, r)))
                    .collect::<hoelder_core::Result<_>>()?
            } else {
                Vec::new()
            };
            if !pairs.is_empty() {
                let mrow = moment_maximal_statistic(&pairs, p)?;
                out.push(mk.info("moment_maximal_ratio", nn, format!("gen={label}"), mrow.ratio, 0.0));
            }
            let vn: Vec<f64> = reps.iter().map(|r| r.2).collect();
            out.push(mk.info(
                "vertex_norm_weak",
                nn,
                format!("gen={label}"),
                weak_norm_sample(&vn, p)?,
                0.0,
            ));
        }
    }

    // Deterministic families.
    let mut t = Tally::default();
    for i in 0..GEOMETRIC_P_POINTS {
        let q = 2.05 + 8.0 * i as f64 / (GEOMETRIC_P_POINTS - 1) as f64;
        for n in 2..=GEOMETRIC_N_MAX {
            let (s, b) = geometric_dyadic_sum(q, n)?;
            t.add(s <= b);
        }
    }
    out.push(t.row(&mk, "geometric_dyadic_sum", 0, String::new()));
    total.absorb(&t);

    let mut t = Tally::default();
    let mut rng = replica_rng(stream(cfg.seed, 9, 0), 0);
    for _ in 0..RANDOM_SIMPLE {
        let k = rng.random_range(1..=8);
        let mut left = 1.0;
        let mut cells = Vec::with_capacity(k);
        for _ in 0..k {
            let m = rng.random::<f64>() * left;
            left -= m;
            cells.push(((rng.random::<f64>() * 24.0 - 4.0).exp2(), m));
        }
        let g = SimpleFunction::from_cells(&cells)?;
        let q = 2.0 + 0.05 + rng.random::<f64>() * 8.0;
        let (l, r) = dyadic_tail_sum(&g, q)?;
        t.add(l <= r);
    }
    out.push(t.row(&mk, "dyadic_tail_sum", 0, String::new()));
    total.absorb(&t);

    let s = resolve_schedule(cfg)?;
    let active: Vec<usize> = (1..=s.levels.len()).collect();
    let law = f_distribution(&s, &active)?;
    let tm = TruncationModel::new(law.clone(), p)?;
    let top = law.atoms().first().map(|a| a.0).unwrap_or(0.0);
    let mut t = Tally::default();
    let mut prev = f64::INFINITY;
    let mut monotone = true;
    for i in 1..=TRANSFER_R_POINTS {
        let r = top * i as f64 / TRANSFER_R_POINTS as f64;
        let terms = tm.terms(r)?;
        monotone &= terms.conditional_moment <= prev;
        prev = terms.conditional_moment;
        for j in 1..=TRANSFER_T_POINTS {
            let row = tm.check_conditional_transfer(r * j as f64 / (TRANSFER_T_POINTS + 1) as f64, r)?;
            t.add(row.pass);
        }
    }
    out.push(t.row(&mk, "conditional_transfer", 0, String::new()));
    total.absorb(&t);
    total.add(monotone);
    out.push(mk.row(
        "truncation_monotone",
        0,
        "",
        if monotone { 1.0 } else { 0.0 },
        0.0,
        1.0,
        Status::from_bool(monotone),
    ));

    out.push(total.row(&mk, "all_inequalities", 0, String::new()));
    Ok(out)
}
