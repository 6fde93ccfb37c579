//! Monte Carlo for the lower-bound chain at a single level.

use std::cell::Cell;

use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::schedule::{annulus_events, LevelParams, Schedule};
use super::tower::{build_tower, RotationTower};
use super::{lower_levels_bound, upper_levels_rate, TowerFunction};
use crate::error::{invalid, Error, Result};
use crate::stats::{binomial_se, normal_two_sided, replica_rng, run_replicas_with};

/// Replicas on which the lower-level statistic is computed exactly rather
/// than only tested against its bound.
pub const EXACT_LOWER_REPLICAS: u64 = 256;

/// Slack, in standard errors, allowed on every Monte Carlo bound check.
pub const MC_SLACK: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub replicas: usize,
    pub seed: u64,
    /// Upper bound on `n · replicas` per level.
    pub budget: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            replicas: 10_000,
            seed: 0,
            budget: 4_000_000_000,
        }
    }
}

/// `n^{-1/p} max_{1≤u≤n-k, 1≤v≤k} |S_{u+v} - S_u| / v^α` for increments
/// `x_0, …, x_{n-1}` with `S_u = x_0 + … + x_{u-1}` and `α = 1/2 - 1/p`.
pub fn window_statistic(x: &[f64], alpha: f64, k: usize) -> f64 {
    let mut s = Vec::new();
    prefix_sums(x, &mut s);
    window_and_modulus(&s, alpha, k).0
}

pub fn prefix_sums(x: &[f64], out: &mut Vec<f64>) {
    out.clear();
    out.reserve(x.len() + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for &v in x {
        acc += v;
        out.push(acc);
    }
}

const BLOCK: usize = 32;

/// From unscaled partial sums `S_0, …, S_n`: the windowed statistic above
/// and the Hölder modulus `w_α` of the Donsker line at `δ = k/n`.
///
/// Left endpoints are visited in blocks; a block is skipped when the range
/// of `S` it can reach, at the largest gap weight, cannot beat both
/// incumbents.
pub fn window_and_modulus(s: &[f64], alpha: f64, k: usize) -> (f64, f64) {
    let best = Cell::new((0.0f64, 0.0f64));
    scan_pairs(
        s,
        alpha,
        k,
        |bound| {
            let (w, m) = best.get();
            bound > w.min(m)
        },
        |r, valid| {
            let (mut w, mut m) = best.get();
            if valid && r > w {
                w = r;
            }
            if r > m {
                m = r;
            }
            best.set((w, m));
            false
        },
    );
    best.get()
}

/// Whether the windowed statistic and the modulus of [`window_and_modulus`]
/// reach `thr`, stopping as soon as both are settled.
pub fn window_and_modulus_reach(s: &[f64], alpha: f64, k: usize, thr: f64) -> (bool, bool) {
    let mut hit = (false, false);
    scan_pairs(
        s,
        alpha,
        k,
        |bound| bound >= thr,
        |r, valid| {
            if r >= thr {
                hit.1 = true;
                hit.0 |= valid;
            }
            hit.0 && hit.1
        },
    );
    hit
}

/// Visits pairs `(u, u+v)`, `v ≤ k`, block by block. `keep(bound)` decides
/// whether a block is scanned; `visit(ratio, in_window)` returns true to
/// stop.
fn scan_pairs(
    s: &[f64],
    alpha: f64,
    k: usize,
    mut keep: impl FnMut(f64) -> bool,
    mut visit: impl FnMut(f64, bool) -> bool,
) {
    let n = s.len() - 1;
    if k == 0 || n == 0 {
        return;
    }
    let k = k.min(n);
    let norm = (n as f64).powf(alpha - 0.5);
    let w: Vec<f64> = (0..=k)
        .map(|v| if v == 0 { 0.0 } else { norm / (v as f64).powf(alpha) })
        .collect();
    let u_hi = n.saturating_sub(k);
    let mut start = 0;
    while start < n {
        let end = (start + BLOCK).min(n);
        let reach = (end - 1 + k).min(n);
        let (mut lo, mut hi) = (s[start], s[start]);
        for &v in &s[start..=reach] {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if keep((hi - lo) * w[1]) {
            for u in start..end {
                let valid = u >= 1 && u <= u_hi;
                let top = k.min(n - u);
                for v in 1..=top {
                    let r = (s[u + v] - s[u]).abs() * w[v];
                    if visit(r, valid) {
                        return;
                    }
                }
            }
        }
        start = end;
    }
}

/// Towers and tower functions for every level of a schedule prefix.
#[derive(Debug, Clone)]
pub struct TowerSystem {
    pub schedule: Schedule,
    pub towers: Vec<RotationTower>,
    pub funcs: Vec<TowerFunction>,
}

impl TowerSystem {
    pub fn new(s: &Schedule) -> Result<Self> {
        let mut towers = Vec::with_capacity(s.levels.len());
        let mut funcs = Vec::with_capacity(s.levels.len());
        for lv in &s.levels {
            let n =
                lv.n.to_u64()
                    .ok_or_else(|| Error::Budget(format!("height {} is not simulable", lv.n)))?;
            towers.push(build_tower(n)?);
            funcs.push(TowerFunction::new(s.p, lv)?);
        }
        Ok(Self {
            schedule: s.clone(),
            towers,
            funcs,
        })
    }

    /// Adds `f_i ∘ T^t` to `dst[t]` for the level-`i` coordinate started at
    /// `x0`. The support is reached only from base visits: at a visit time
    /// `w` the orbit sat on floor `w - t` at time `t`.
    pub fn add_level(&self, i: usize, x0: f64, dst: &mut [f64], bases: &mut Vec<u64>) {
        let f = &self.funcs[i];
        let len = dst.len() as u64;
        if len == 0 {
            return;
        }
        self.towers[i].base_times(x0, len + f.k - 1, bases);
        for &w in bases.iter() {
            // Floors [lo, hi) carry a common value.
            let mut lo = 0u64;
            for (a, &v) in f.values.iter().enumerate() {
                let hi = 1u64 << (f.i as usize + a + 1);
                // Times t with w - t in [lo, hi), clipped to [0, len).
                if w >= lo {
                    let t_hi = (w - lo).min(len - 1);
                    let t_lo = (w + 1).saturating_sub(hi);
                    if t_lo <= t_hi {
                        for x in &mut dst[t_lo as usize..=t_hi as usize] {
                            *x += v;
                        }
                    }
                }
                lo = hi;
            }
        }
    }

    /// `f_i ∘ T^t` for `t < len`.
    pub fn level_values(&self, i: usize, x0: f64, len: usize, out: &mut Vec<f64>) {
        out.clear();
        out.resize(len, 0.0);
        self.add_level(i, x0, out, &mut Vec::new());
    }
}

/// Fills `out` with `len` Rademacher signs.
pub fn rademacher_stream(rng: &mut impl RngCore, len: usize, out: &mut Vec<f64>) {
    out.clear();
    out.reserve(len);
    while out.len() < len {
        let bits = rng.next_u64();
        let take = (len - out.len()).min(64);
        for b in 0..take {
            out.push(if (bits >> b) & 1 == 1 { 1.0 } else { -1.0 });
        }
    }
}

/// `m ∘ T^t = g_t Σ_{l ∈ active} f_l ∘ T^t` for `t = 0, …, n-1`, one
/// independent rotation coordinate per level and Rademacher `g`.
pub fn eval_m_path(s: &Schedule, active: &[usize], n: usize, seed: u64) -> Result<Vec<f64>> {
    let sys = TowerSystem::new(s)?;
    for &l in active {
        s.level(l)?;
    }
    let mut rng = replica_rng(seed, 0);
    Ok(m_path_with(&sys, active, n, &mut rng))
}

pub(crate) fn m_path_with(sys: &TowerSystem, active: &[usize], n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let x0: Vec<f64> = (0..sys.towers.len()).map(|_| rng.random::<f64>()).collect();
    let mut g = Vec::new();
    rademacher_stream(rng, n, &mut g);
    let mut f = vec![0.0; n];
    let mut bases = Vec::new();
    for &l in active {
        sys.add_level(l - 1, x0[l - 1], &mut f, &mut bases);
    }
    f.iter().zip(&g).map(|(a, b)| a * b).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub name: String,
    pub level: usize,
    /// The side that must not exceed `rhs` (up to `slack`).
    pub lhs: f64,
    pub rhs: f64,
    pub se: f64,
    pub pass: bool,
}

impl BoundCheck {
    fn le(name: impl Into<String>, level: usize, lhs: f64, rhs: f64, se: f64) -> Self {
        Self {
            name: name.into(),
            level,
            lhs,
            rhs,
            se,
            pass: lhs <= rhs + MC_SLACK * se,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainReport {
    pub level: usize,
    pub n: u64,
    pub k: u64,
    pub replicas: usize,
    /// `P_l`: the windowed statistic of `g f_l` reaches 1.
    pub p_l: f64,
    /// `P'_l`: some annulus event `E_j` occurs.
    pub p_prime: f64,
    pub e_hat: Vec<f64>,
    pub e_exact: Vec<f64>,
    pub c: Vec<f64>,
    pub none_hat: f64,
    pub none_product: f64,
    /// The windowed statistic of `m` reaches 1/2.
    pub window_event: f64,
    /// `w_α(m, k/n) ≥ 1/2`.
    pub modulus_event: f64,
    pub control_window_event: f64,
    pub control_modulus_event: f64,
    pub lower_bound: f64,
    pub lower_max: f64,
    pub lower_violations: usize,
    pub upper_rate: f64,
    pub upper_active: f64,
    pub checks: Vec<BoundCheck>,
}

impl ChainReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Per-thread buffers reused across replicas.
#[derive(Default)]
struct Scratch {
    g: Vec<f64>,
    own: Vec<f64>,
    lower: Vec<f64>,
    full: Vec<f64>,
    sums: Vec<f64>,
    bases: Vec<u64>,
}

#[derive(Debug, Clone, Default)]
struct Replica {
    p_l: bool,
    events: u64,
    window: bool,
    modulus: bool,
    control_window: bool,
    control_modulus: bool,
    lower: f64,
    lower_exceeds: bool,
    upper: bool,
}

/// Runs the chain at level `l` of the schedule.
pub fn lower_bound_chain(s: &Schedule, l: usize, mc: &McConfig) -> Result<ChainReport> {
    let sys = TowerSystem::new(s)?;
    chain_with(&sys, l, mc)
}

/// Only the modulus events of [`lower_bound_chain`]: `(m, control)`.
pub fn modulus_event_prob(s: &Schedule, l: usize, mc: &McConfig) -> Result<(f64, f64)> {
    let r = lower_bound_chain(s, l, mc)?;
    Ok((r.modulus_event, r.control_modulus_event))
}

pub fn chain_with(sys: &TowerSystem, l: usize, mc: &McConfig) -> Result<ChainReport> {
    let s = &sys.schedule;
    let lv: &LevelParams = s.level(l)?;
    if mc.replicas == 0 {
        return Err(invalid("replicas", "must be at least 1"));
    }
    let n = sys.towers[l - 1].n as usize;
    let k = sys.funcs[l - 1].k as usize;
    if (n as u64).saturating_mul(mc.replicas as u64) > mc.budget {
        return Err(Error::Budget(format!(
            "level {l}: n · replicas = {} exceeds {}",
            n as u128 * mc.replicas as u128,
            mc.budget
        )));
    }
    let jj = lv.j_u64().ok_or_else(|| invalid("J", "too large"))? as usize;
    if jj > 60 {
        return Err(invalid("J", "too many annuli to simulate"));
    }
    let p = s.p;
    let alpha = s.alpha();
    let big_l = lv.big_l;
    let levels = sys.towers.len();
    let thresholds: Vec<(usize, usize, f64)> = (1..=jj)
        .map(|j| {
            let kj = 1usize << (lv.i as usize + jj - j);
            let kjm = 2 * kj;
            let thr = big_l * ((kj - 1) as f64).powf(alpha) * (kjm as f64).powf(1.0 / p);
            (kj, kj - 1, thr)
        })
        .collect();
    let lower_bound = lower_levels_bound(s, l)?;

    let base_seed = mc.seed ^ (l as u64).wrapping_mul(0xA24B_AED4_963E_E407);
    let results = run_replicas_with(base_seed, mc.replicas, Scratch::default, |sc, idx, rng| {
        let x0: Vec<f64> = (0..levels).map(|_| rng.random::<f64>()).collect();
        rademacher_stream(rng, n, &mut sc.g);
        for buf in [&mut sc.own, &mut sc.lower, &mut sc.full] {
            buf.clear();
            buf.resize(n, 0.0);
        }
        for (i, &x) in x0.iter().enumerate() {
            let dst = match (i + 1).cmp(&l) {
                std::cmp::Ordering::Less => &mut sc.lower,
                std::cmp::Ordering::Equal => &mut sc.own,
                std::cmp::Ordering::Greater => &mut sc.full,
            };
            sys.add_level(i, x, dst, &mut sc.bases);
        }
        let mut rep = Replica {
            // The windows cover the increments with index 1..n-1.
            upper: sc.full[1..n - 1].iter().any(|v| *v != 0.0),
            ..Replica::default()
        };
        let g = &sc.g;
        for (t, &gt) in g.iter().enumerate().take(n) {
            sc.own[t] *= gt;
            sc.lower[t] *= gt;
            sc.full[t] = gt * sc.full[t] + sc.lower[t] + sc.own[t];
        }
        prefix_sums(&sc.own, &mut sc.sums);
        rep.p_l = window_and_modulus_reach(&sc.sums, alpha, k, 1.0).0;
        if l > 1 {
            prefix_sums(&sc.lower, &mut sc.sums);
            rep.lower_exceeds = window_and_modulus_reach(&sc.sums, alpha, k, lower_bound * (1.0 + 1e-12)).0;
            // The exact maximum is only worth its cost on a prefix of replicas.
            if idx < EXACT_LOWER_REPLICAS {
                rep.lower = window_and_modulus(&sc.sums, alpha, k).0;
            }
        }
        prefix_sums(&sc.full, &mut sc.sums);
        (rep.window, rep.modulus) = window_and_modulus_reach(&sc.sums, alpha, k, 0.5);
        for (j, &(start, len, thr)) in thresholds.iter().enumerate() {
            let sum: f64 = g[start..start + len].iter().sum();
            if sum.abs() >= thr {
                rep.events |= 1 << j;
            }
        }
        sc.own.clear();
        sc.own.extend((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
        prefix_sums(&sc.own, &mut sc.sums);
        (rep.control_window, rep.control_modulus) = window_and_modulus_reach(&sc.sums, alpha, k, 0.5);
        rep
    });

    let reps = mc.replicas;
    let freq = |f: &dyn Fn(&Replica) -> bool| results.iter().filter(|r| f(r)).count() as f64 / reps as f64;
    let p_l = freq(&|r| r.p_l);
    let p_prime = freq(&|r| r.events != 0);
    let e_hat: Vec<f64> = (0..jj).map(|j| freq(&|r| r.events >> j & 1 == 1)).collect();
    let none_hat = 1.0 - p_prime;
    let none_product: f64 = e_hat.iter().map(|e| 1.0 - e).product();
    let ev = annulus_events(p, lv).ok_or_else(|| invalid("J", "too large"))?;
    let e_exact: Vec<f64> = ev.iter().map(|e| e.0).collect();
    let c: Vec<f64> = ev.iter().map(|e| e.1).collect();
    let lower_max = results.iter().fold(0.0f64, |a, r| a.max(r.lower));
    let lower_violations = results.iter().filter(|r| r.lower_exceeds).count();
    let upper_rate = upper_levels_rate(s, l)?;
    let upper_active = freq(&|r| r.upper);

    let se = |q: f64| binomial_se(q, reps);
    let kn = k as f64 / n as f64;
    let be = std::f64::consts::SQRT_2 * (-(lv.i as f64) / 2.0).exp2();
    let mut checks = Vec::new();
    let factor = 0.5 * (1.0 - 2.0 * kn);
    checks.push(BoundCheck::le(
        "own_vs_events",
        l,
        factor * p_prime,
        p_l,
        (se(p_l).powi(2) + (factor * se(p_prime)).powi(2)).sqrt(),
    ));
    for j in 0..jj {
        checks.push(BoundCheck::le(
            format!("annulus_clt j={}", j + 1),
            l,
            (e_hat[j] - c[j]).abs(),
            be,
            se(e_hat[j]),
        ));
        let kjm = thresholds[j].0 * 2;
        checks.push(BoundCheck::le(
            format!("annulus_clt_exact j={}", j + 1),
            l,
            (e_exact[j] - c[j]).abs(),
            1.0 / ((kjm - 1) as f64).sqrt(),
            0.0,
        ));
    }
    let c0 = normal_two_sided(4f64.powf(1.0 / p) * big_l);
    let jf = jj as f64;
    checks.push(BoundCheck::le(
        "events_lower",
        l,
        1.0 - (1.0 - c0).powf(jf) - jf * be,
        p_prime,
        se(p_prime),
    ));
    checks.push(BoundCheck::le(
        "events_second_order",
        l,
        jf * c0 - jf * jf * c0 * c0 / 2.0 - jf * be,
        p_prime,
        se(p_prime),
    ));
    checks.push(BoundCheck::le(
        "independence",
        l,
        (none_hat - none_product).abs(),
        0.0,
        se(none_hat) + e_hat.iter().map(|e| se(*e)).sum::<f64>(),
    ));
    checks.push(BoundCheck::le("lower_levels", l, lower_violations as f64, 0.0, 0.0));
    checks.push(BoundCheck::le(
        "upper_levels",
        l,
        upper_active,
        upper_rate,
        se(upper_active),
    ));

    Ok(ChainReport {
        level: l,
        n: n as u64,
        k: k as u64,
        replicas: reps,
        p_l,
        p_prime,
        e_hat,
        e_exact,
        c,
        none_hat,
        none_product,
        window_event: freq(&|r| r.window),
        modulus_event: freq(&|r| r.modulus),
        control_window_event: freq(&|r| r.control_window),
        control_modulus_event: freq(&|r| r.control_modulus),
        lower_bound,
        lower_max,
        lower_violations,
        upper_rate,
        upper_active,
        checks,
    })
}
