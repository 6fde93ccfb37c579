//! Acceptance run: one line per criterion, exit status 1 on any failure not
//! listed in `KNOWN_FAILURES`.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use hoelder_core::counterexample::{build_schedule, Mode};
use hoelder_core::holder::{
    holder_modulus, increment_seq_bound, schauder_coefficients, sequential_norm, tightness_statistic, vertex_norm,
};
use hoelder_core::weak_lp::{kappa_p, np_norm, triangle_pair, weak_norm_exact, SimpleFunction};
use hoelder_core::PolygonalPath;
use hoelder_lab::experiments::{self, weak_norm_rows};
use hoelder_lab::report::RowMaker;
use hoelder_lab::{ExperimentConfig, ExperimentReport, Status};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria that fail on the recorded run and are documented as such in the
/// README. They still print FAIL.
const KNOWN_FAILURES: &[u32] = &[8];

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

fn config(name: &str) -> ExperimentConfig {
    let path = format!("{}/data/{name}.toml", env!("CARGO_MANIFEST_DIR"));
    ExperimentConfig::load(std::path::Path::new(&path)).expect("data config")
}

fn failed_rows(r: &ExperimentReport) -> String {
    r.failures()
        .map(|f| format!("{}[{} n={}]={}", f.statistic, f.index, f.n, f.estimate))
        .collect::<Vec<_>>()
        .join("; ")
}

fn random_path(rng: &mut ChaCha8Rng, n: usize) -> PolygonalPath {
    let kind = rng.random_range(0..4);
    let x = (0..n)
        .map(|_| match kind {
            0 => rng.random_range(-2.0..2.0),
            1 => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            2 => rng.random_range(-1.0f64..1.0) / (1.0 - rng.random::<f64>()).powf(0.4),
            _ => {
                if rng.random::<f64>() < 0.7 {
                    0.0
                } else {
                    rng.random_range(-3.0..3.0)
                }
            }
        })
        .collect();
    PolygonalPath::donsker(x).unwrap()
}

fn coefficient(path: &PolygonalPath, j: u32, l: u128) -> f64 {
    let k = 2 * l - 1;
    let a = path.eval_dyadic(k, j) - path.eval_dyadic(k - 1, j);
    let b = path.eval_dyadic(k + 1, j) - path.eval_dyadic(k, j);
    (a - b) / 2.0
}

/// `max_{j≤24} 2^{jα} max_{r∈D_j} |λ_r|` from the definition. Up to level 12
/// every coefficient is evaluated; above it, only those whose support holds
/// a vertex in its interior, the others vanish because the path is affine
/// there.
fn brute_level_scan(path: &PolygonalPath, alpha: f64) -> f64 {
    let n = path.n() as u128;
    let mut best = path.eval_dyadic(1, 0).abs().max(path.eval_dyadic(0, 0).abs());
    for j in 1..=24u32 {
        let half = 1u128 << (j - 1);
        let level_max = if j <= 12 {
            (1..=half).map(|l| coefficient(path, j, l).abs()).fold(0.0, f64::max)
        } else {
            let ls: BTreeSet<u128> = (1..n).map(|i| (i * half / n + 1).min(half)).collect();
            ls.into_iter()
                .map(|l| coefficient(path, j, l).abs())
                .fold(0.0, f64::max)
        };
        best = best.max((j as f64 * alpha).exp2() * level_max);
    }
    best
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut seq_err, mut mod_err) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let n = rng.random_range(1..=256);
        let p = [2.5, 3.0, 4.0, 6.0, 10.0][rng.random_range(0..5)];
        let alpha = 0.5 - 1.0 / p;
        let path = random_path(&mut rng, n);
        let c = schauder_coefficients(&path, alpha).unwrap();
        seq_err = seq_err.max((sequential_norm(&c) - brute_level_scan(&path, alpha)).abs());
        let v = vertex_norm(&path, alpha).unwrap();
        mod_err = mod_err.max((v - holder_modulus(&path, alpha, 1.0).unwrap()).abs());
    }
    let t = start.elapsed();
    outcome(
        seq_err <= 1e-12 && mod_err <= 1e-12 && t < Duration::from_secs(10),
        format!("max |seq - brute| = {seq_err:.1e}, max |vertex - modulus| = {mod_err:.1e}, {t:.2?}"),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut evaluations, mut violations) = (0u64, 0u64);
    for _ in 0..2000 {
        let n = rng.random_range(1..=512);
        let scale = (rng.random_range(-20.0..20.0f64)).exp2();
        let x: Vec<f64> = random_path(&mut rng, n)
            .increments()
            .iter()
            .map(|v| v * scale)
            .collect();
        let path = PolygonalPath::donsker(x).unwrap();
        let alpha = rng.random_range(0.01..0.49);
        for j in 1..=12u32 {
            for l in 1..=1u128 << (j - 1) {
                let k = 2 * l - 1;
                let a = path.eval_dyadic(k, j) - path.eval_dyadic(k - 1, j);
                let b = path.eval_dyadic(k + 1, j) - path.eval_dyadic(k, j);
                evaluations += 1;
                if ((a - b) / 2.0).abs() > a.abs().max(b.abs()) {
                    violations += 1;
                }
            }
        }
        evaluations += 1;
        if tightness_statistic(&path, alpha, 1).unwrap() > increment_seq_bound(&path, alpha).unwrap() {
            violations += 1;
        }
    }
    outcome(
        violations == 0,
        format!("{violations} violations in {evaluations} evaluations"),
    )
}

fn criterion_3() -> Outcome {
    let p = 3.0;
    let (f, g, h) = triangle_pair(p, 1_000_000).unwrap();
    let sum = weak_norm_exact(&f, p).unwrap() + weak_norm_exact(&g, p).unwrap();
    let joint = weak_norm_exact(&h, p).unwrap();
    let floor = 2f64.powf(1.0 + 1.0 / p) * (1.0 - 1e-3);
    let pair_ok = (sum - 2.0).abs() <= 1e-3 && joint >= floor;

    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut bad = 0;
    for _ in 0..10_000 {
        let k = rng.random_range(1..=8);
        let mut left = 1.0;
        let cells: Vec<(f64, f64)> = (0..k)
            .map(|_| {
                let m = rng.random::<f64>() * left;
                left -= m;
                ((rng.random::<f64>() * 8.0 - 3.0).exp2(), m)
            })
            .collect();
        let f = SimpleFunction::from_cells(&cells).unwrap();
        let q = 2.0 + rng.random::<f64>() * 6.0;
        let w = weak_norm_exact(&f, q).unwrap();
        let n = np_norm(&f, q).unwrap();
        if !(w <= n * (1.0 + 1e-12) && n <= kappa_p(q).unwrap() * w * (1.0 + 1e-12)) {
            bad += 1;
        }
    }
    outcome(
        pair_ok && bad == 0,
        format!("||f||+||g|| = {sum:.6}, ||f+g|| = {joint:.6} >= {floor:.6}, sandwich failures {bad}/10000"),
    )
}

fn criterion_4() -> Outcome {
    let mk = RowMaker {
        experiment: "acceptance",
        seed: 0,
    };
    let (mut checked, mut skipped) = (0, 0);
    let mut bad = Vec::new();
    for s in [
        build_schedule(3.0, Mode::Desk, 3).unwrap(),
        build_schedule(3.0, Mode::Faithful, 2).unwrap(),
    ] {
        let rows = weak_norm_rows(&s, &mk).unwrap();
        for r in &rows.rows {
            // Levels too large to tabulate carry no verdict.
            if r.status == Status::NotApplicable {
                skipped += 1;
                continue;
            }
            checked += 1;
            if r.status != Status::Pass {
                bad.push(format!("{:?} {} {}", s.mode, r.statistic, r.index));
            }
        }
    }
    outcome(
        bad.is_empty() && checked > 0,
        format!(
            "{checked} exact rows, {skipped} untabulable, failing: [{}]",
            bad.join(", ")
        ),
    )
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let cfg = config("counterexample");
    let r = experiments::run(&cfg).unwrap();
    let t = start.elapsed();
    let events: Vec<String> = r
        .select("modulus_event")
        .map(|x| format!("{:.4}>{}", x.estimate, x.threshold))
        .collect();
    let decay = r.select("control_decay").all(|x| x.status == Status::Pass) && r.select("control_decay").count() == 1;
    let floors = r.select("modulus_event").all(|x| x.status == Status::Pass) && events.len() == 3;
    outcome(
        r.all_pass() && decay && floors && t < Duration::from_secs(600),
        format!(
            "modulus events [{}], {t:.1?}; failing: [{}]",
            events.join(", "),
            failed_rows(&r)
        ),
    )
}

fn criterion_6() -> Outcome {
    let r = experiments::run(&config("inequalities")).unwrap();
    let total = r.select("all_inequalities").next().unwrap();
    let evaluations: u64 = total.index.trim_start_matches("evaluations=").parse().unwrap();
    outcome(
        r.all_pass() && total.estimate == 0.0 && evaluations >= 100_000,
        format!(
            "{} violations in {evaluations} evaluations; failing: [{}]",
            total.estimate,
            failed_rows(&r)
        ),
    )
}

fn criterion_7() -> Outcome {
    let r = experiments::run(&config("donsker")).unwrap();
    let tight: Vec<String> = r.select("tightness").map(|x| format!("{:.4}", x.estimate)).collect();
    let steps = r.select("tightness_step").count();
    let ks = r.select("endpoint_ks").next().unwrap();
    outcome(
        r.all_pass() && steps == 3 && ks.status == Status::Pass,
        format!(
            "tightness [{}], KS p = {:.3}; failing: [{}]",
            tight.join(", "),
            ks.estimate,
            failed_rows(&r)
        ),
    )
}

fn criterion_8() -> Outcome {
    let r = experiments::run(&config("tail_boundary")).unwrap();
    let m = r.select("threshold").next().unwrap().estimate;
    let series = |label: &str| {
        r.rows
            .iter()
            .filter(|x| x.statistic == "exceed" && x.index == label)
            .map(|x| format!("{:.4}", x.estimate))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let up = r.select("trend_nondecreasing").count() == 1;
    let down = r.select("trend_decreasing").count() == 1;
    outcome(
        r.all_pass() && up && down,
        format!(
            "M = {m:.4}; beta=4 [{}]; beta=8 [{}]; failing: [{}]",
            series("beta=4"),
            series("beta=8"),
            failed_rows(&r)
        ),
    )
}

fn criterion_9() -> Outcome {
    let cfg = config("hannan");
    let r = experiments::run(&cfg).unwrap();
    let ks = cfg.k_grid.clone();
    let means: Vec<f64> = ks
        .iter()
        .map(|k| {
            let suffix = format!(" K={k}");
            let v: Vec<f64> = r
                .select("residual_tightness")
                .filter(|x| x.index.ends_with(&suffix))
                .map(|x| x.estimate)
                .collect();
            v.iter().sum::<f64>() / v.len() as f64
        })
        .collect();
    let tails: Vec<f64> = ks
        .iter()
        .map(|k| r.find("projection_tail", &format!("K={k}")).unwrap().estimate)
        .collect();
    let ordered = means
        .windows(2)
        .zip(tails.windows(2))
        .all(|(m, t)| (m[1] < m[0]) == (t[1] < t[0]));
    let tau = r.select("residual_kendall_tau").next().unwrap();
    let p = r.select("residual_kendall_p").next().unwrap();
    let cob = r.select("coboundary_bound").next().unwrap();
    outcome(
        r.all_pass() && ordered && tau.estimate > 0.0 && p.estimate < 0.05 && cob.estimate == 0.0,
        format!(
            "mean residual by K {:?}, tau = {:.3}, p = {:.1e}, coboundary violations {} ({})",
            means.iter().map(|m| (m * 1e4).round() / 1e4).collect::<Vec<_>>(),
            tau.estimate,
            p.estimate,
            cob.estimate,
            cob.index
        ),
    )
}

fn criterion_10() -> Outcome {
    let dir = std::env::temp_dir().join(format!("hoelder-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let configs = [
        (
            "donsker",
            "experiment = \"donsker\"\np = 4.0\nn_grid = [1024]\nreplicas = 300\nseed = 9\nks_reference = 2000\n",
        ),
        (
            "tail_boundary",
            "experiment = \"tail_boundary\"\np = 4.0\nn_grid = [256, 1024]\nreplicas = 300\nseed = 9\n",
        ),
        (
            "hannan",
            "experiment = \"hannan\"\np = 4.0\nn_grid = [512]\nreplicas = 10\nseeds = 4\nseed = 9\n",
        ),
        (
            "counterexample",
            "experiment = \"counterexample\"\np = 3.0\nn_grid = [2]\nreplicas = 200\nseed = 9\n",
        ),
        (
            "inequalities",
            "experiment = \"inequalities\"\np = 4.0\nn_grid = [128]\nreplicas = 100\nseed = 9\n",
        ),
    ];
    let mut differing = Vec::new();
    let mut bytes = 0;
    for (name, text) in configs {
        let cfg = dir.join(format!("{name}.toml"));
        std::fs::write(&cfg, text).unwrap();
        let outputs: Vec<Vec<u8>> = ["1", "4", "8"]
            .iter()
            .map(|t| {
                let o = Command::new(env!("CARGO_BIN_EXE_hoelder"))
                    .args(["--threads", t, "experiment"])
                    .arg(&cfg)
                    .output()
                    .unwrap();
                assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
                o.stdout
            })
            .collect();
        bytes += outputs[0].len();
        if outputs.iter().any(|o| o != &outputs[0] || o.is_empty()) {
            differing.push(name);
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    outcome(
        differing.is_empty(),
        format!("{bytes} CSV bytes per thread count, differing: {differing:?}"),
    )
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "norm engine", criterion_1),
        (2, "increment inequalities", criterion_2),
        (3, "weak-Lp quasi-norm", criterion_3),
        (4, "exact tower weak norms", criterion_4),
        (5, "counterexample chain", criterion_5),
        (6, "inequality oracles", criterion_6),
        (7, "donsker tightness", criterion_7),
        (8, "tail boundary", criterion_8),
        (9, "hannan residuals", criterion_9),
        (10, "thread determinism", criterion_10),
    ];
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|v| v.trim().parse().ok()).collect());
    let mut unexpected = 0;
    for (id, name, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        let note = if !o.pass && KNOWN_FAILURES.contains(&id) {
            " (known)"
        } else {
            ""
        };
        println!(
            "criterion {id:>2} {name}: {verdict}{note} [{:.1?}] {}",
            start.elapsed(),
            o.detail
        );
        if !o.pass && !KNOWN_FAILURES.contains(&id) {
            unexpected += 1;
        }
    }
    if unexpected > 0 {
        std::process::exit(1);
    }
}
