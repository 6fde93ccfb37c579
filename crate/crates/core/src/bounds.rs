//! Numerical oracles for the martingale inequalities: Nagaev's tail bound,
//! the Doob-type maximal bound, Stein's maximal ergodic ratio, the dyadic
//! sums, the level split of the increment statistic and the truncation
//! terms.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::holder::{increment_level_maxima, vertex_norm, HolderParams};
use crate::paths::PolygonalPath;
use crate::stats::{binomial_se, mean_se};
use crate::weak_lp::{weak_norm_exact, weak_norm_sample, SimpleFunction};

/// Slack, in standard errors, on every Monte Carlo comparison.
pub const MC_SLACK: f64 = 4.0;

/// One bound evaluation, as written to CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub check: String,
    pub n: usize,
    pub param: String,
    pub lhs: f64,
    pub rhs: f64,
    pub se: f64,
    pub pass: bool,
}

impl BoundRow {
    pub fn le(check: impl Into<String>, n: usize, param: impl Into<String>, lhs: f64, rhs: f64, se: f64) -> Self {
        Self {
            check: check.into(),
            n,
            param: param.into(),
            lhs,
            rhs,
            se,
            pass: lhs <= rhs + MC_SLACK * se,
        }
    }
}

/// Per-replica summary of a martingale path `m_1, …, m_n` with conditional
/// variances `v_j = E[m_j² | past]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MartingaleSummary {
    pub n: usize,
    /// `|S_n|`.
    pub sum_abs: f64,
    /// `max_j |m_j|`.
    pub max_abs: f64,
    /// `(Σ_j v_j)^{1/2}`.
    pub quad_var: f64,
    /// `max_j S_j²`.
    pub max_partial_sq: f64,
    /// `Σ_j m_j²`.
    pub sum_sq: f64,
}

pub fn summarize(m: &[f64], cond_var: &[f64]) -> Result<MartingaleSummary> {
    if m.is_empty() {
        return Err(Error::EmptyInput("martingale path"));
    }
    if m.len() != cond_var.len() {
        return Err(invalid("cond_var", "length differs from the path"));
    }
    let mut s = 0.0f64;
    let mut max_partial_sq = 0.0f64;
    let mut max_abs = 0.0f64;
    let mut sum_sq = 0.0;
    for &x in m {
        s += x;
        max_partial_sq = max_partial_sq.max(s * s);
        max_abs = max_abs.max(x.abs());
        sum_sq += x * x;
    }
    Ok(MartingaleSummary {
        n: m.len(),
        sum_abs: s.abs(),
        max_abs,
        quad_var: cond_var.iter().sum::<f64>().sqrt(),
        max_partial_sq,
        sum_sq,
    })
}

/// Empirical `Q_{m,n}(u) = μ̂{max_j |m_j| > u} + μ̂{(Σ v_j)^{1/2} > u}`,
/// stored as the sorted samples of both statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct QFunction {
    pub n: usize,
    max_abs: Vec<f64>,
    quad_var: Vec<f64>,
}

fn tail_of_sorted(v: &[f64], u: f64) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    (v.len() - v.partition_point(|&x| x <= u)) as f64 / v.len() as f64
}

impl QFunction {
    pub fn from_summaries(s: &[MartingaleSummary]) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::EmptyInput("replicas"));
        }
        let n = s[0].n;
        let mut max_abs: Vec<f64> = s.iter().map(|r| r.max_abs).collect();
        let mut quad_var: Vec<f64> = s.iter().map(|r| r.quad_var).collect();
        max_abs.sort_by(f64::total_cmp);
        quad_var.sort_by(f64::total_cmp);
        Ok(Self { n, max_abs, quad_var })
    }

    pub fn max_increment_tail(&self, u: f64) -> f64 {
        tail_of_sorted(&self.max_abs, u)
    }

    pub fn quad_var_tail(&self, u: f64) -> f64 {
        tail_of_sorted(&self.quad_var, u)
    }

    pub fn q(&self, u: f64) -> f64 {
        self.max_increment_tail(u) + self.quad_var_tail(u)
    }

    /// `(u, max tail, quadratic variation tail)` on a grid.
    pub fn on_grid(&self, grid: &[f64]) -> Vec<(f64, f64, f64)> {
        grid.iter()
            .map(|&u| (u, self.max_increment_tail(u), self.quad_var_tail(u)))
            .collect()
    }
}

/// `points` values spaced evenly in log scale over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && points >= 2) {
        return Err(invalid("grid", "need 0 < lo < hi and at least two points"));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NagaevParams {
    pub q: f64,
    pub eta: f64,
}

impl NagaevParams {
    pub fn new(q: f64, eta: f64) -> Result<Self> {
        if !(q > 0.0 && q.is_finite() && eta > 0.0 && eta.is_finite()) {
            return Err(invalid("q, eta", "must be positive and finite"));
        }
        Ok(Self { q, eta })
    }

    pub fn eps_q(&self) -> f64 {
        self.eta / self.q
    }

    /// `c(q, η) = q exp(3η e^{η+1} - η - 1)/η`.
    pub fn c(&self) -> f64 {
        let e = self.eta;
        self.q * (3.0 * e * (e + 1.0).exp() - e - 1.0).exp() / e
    }
}

/// `c(q,η) ∫_0^1 Q(ε_q u y) u^{q-1} du`. Each sample point `x` of either
/// statistic contributes `min(1, x/(ε_q y))^q / q` over the replica count,
/// which integrates the step function exactly.
pub fn nagaev_bound(qf: &QFunction, y: f64, params: &NagaevParams) -> Result<f64> {
    if y.is_nan() || y <= 0.0 {
        return Err(invalid("y", "must be positive"));
    }
    let scale = params.eps_q() * y;
    let part = |v: &[f64]| -> f64 {
        if v.is_empty() {
            return 0.0;
        }
        v.iter().map(|&x| (x / scale).min(1.0).powf(params.q)).sum::<f64>() / v.len() as f64
    };
    Ok(params.c() * (part(&qf.max_abs) + part(&qf.quad_var)) / params.q)
}

/// `μ̂{|S_n| > y}` against the Nagaev bound for every `y`.
pub fn nagaev_check(s: &[MartingaleSummary], ys: &[f64], params: &NagaevParams) -> Result<Vec<BoundRow>> {
    let qf = QFunction::from_summaries(s)?;
    let mut sums: Vec<f64> = s.iter().map(|r| r.sum_abs).collect();
    sums.sort_by(f64::total_cmp);
    ys.iter()
        .map(|&y| {
            let lhs = tail_of_sorted(&sums, y);
            let rhs = nagaev_bound(&qf, y, params)?;
            Ok(BoundRow::le(
                "nagaev",
                qf.n,
                format!("q={} eta={} y={y}", params.q, params.eta),
                lhs,
                rhs,
                binomial_se(lhs, s.len()),
            ))
        })
        .collect()
}

/// `n^{-1} E max_j S_j² ≤ 2 E m²`.
pub fn doob_type_check(s: &[MartingaleSummary]) -> Result<BoundRow> {
    if s.is_empty() {
        return Err(Error::EmptyInput("replicas"));
    }
    let n = s[0].n;
    let lhs: Vec<f64> = s.iter().map(|r| r.max_partial_sq / r.n as f64).collect();
    let sq: Vec<f64> = s.iter().map(|r| r.sum_sq / r.n as f64).collect();
    let (l, lse) = mean_se(&lhs);
    let (e2, ese) = mean_se(&sq);
    let se = if s.len() > 1 { lse.hypot(2.0 * ese) } else { 0.0 };
    Ok(BoundRow::le("doob", n, "", l, 2.0 * e2, se))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteinRow {
    pub n_max: usize,
    /// `||sup_{N ≤ n_max} N^{-1} Σ_{j≤N} h_j||_{p/2}`.
    pub maximal_norm: f64,
    /// `||h||_{p/2}`.
    pub h_norm: f64,
    pub ratio: f64,
}

/// Empirical maximal ergodic ratio for nonnegative `h` paths.
pub fn stein_maximal_check(h_paths: &[Vec<f64>], p: f64, n_max: &[usize]) -> Result<Vec<SteinRow>> {
    if p.is_nan() || p <= 2.0 {
        return Err(invalid("p", "must exceed 2"));
    }
    if h_paths.is_empty() {
        return Err(Error::EmptyInput("paths"));
    }
    let r = p / 2.0;
    let mut rows = Vec::with_capacity(n_max.len());
    for &nm in n_max {
        if nm == 0 || h_paths.iter().any(|h| h.len() < nm) {
            return Err(invalid("n_max", "paths are shorter than n_max"));
        }
        if h_paths.iter().any(|h| h[..nm].iter().any(|v| *v < 0.0)) {
            return Err(invalid("h", "must be nonnegative"));
        }
        let mut stat = 0.0;
        let mut hsum = 0.0;
        for h in h_paths {
            let mut acc = 0.0;
            let mut best = 0.0f64;
            for (i, v) in h[..nm].iter().enumerate() {
                acc += v;
                best = best.max(acc / (i + 1) as f64);
                hsum += v.powf(r);
            }
            stat += best.powf(r);
        }
        let maximal_norm = (stat / h_paths.len() as f64).powf(1.0 / r);
        let h_norm = (hsum / (h_paths.len() * nm) as f64).powf(1.0 / r);
        let ratio = if h_norm > 0.0 { maximal_norm / h_norm } else { 0.0 };
        rows.push(SteinRow {
            n_max: nm,
            maximal_norm,
            h_norm,
            ratio,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentRow {
    pub n: usize,
    /// `||‖n^{-1/2} S^pl_n‖_H||^p_{p,∞}` over replicas.
    pub lhs: f64,
    /// `||m||^p_{p,∞} + E (E[m²|past])^{p/2}`.
    pub rhs: f64,
    pub ratio: f64,
}

/// The maximal moment statistic for one `n`: `paths` holds `(m, v)` pairs.
pub fn moment_maximal_statistic(paths: &[(Vec<f64>, Vec<f64>)], p: f64) -> Result<MomentRow> {
    let hp = HolderParams::from_p(p)?;
    if paths.is_empty() {
        return Err(Error::EmptyInput("paths"));
    }
    let n = paths[0].0.len();
    let mut norms = Vec::with_capacity(paths.len());
    let mut all_m = Vec::with_capacity(paths.len() * n);
    let mut cv = 0.0;
    for (m, v) in paths {
        norms.push(vertex_norm(&PolygonalPath::donsker(m.clone())?, hp.alpha())?);
        all_m.extend_from_slice(m);
        cv += v.iter().map(|x| x.powf(p / 2.0)).sum::<f64>();
    }
    let lhs = weak_norm_sample(&norms, p)?.powf(p);
    let rhs = weak_norm_sample(&all_m, p)?.powf(p) + cv / all_m.len() as f64;
    Ok(MomentRow {
        n,
        lhs,
        rhs,
        ratio: if rhs > 0.0 { lhs / rhs } else { 0.0 },
    })
}

/// The dyadic increment statistic of a Donsker path split at `log2 n`:
/// `(levels with 2^j ≤ n, levels beyond, all levels)`.
pub fn increment_split(path: &PolygonalPath, alpha: f64) -> Result<(f64, f64, f64)> {
    let per_level = increment_level_maxima(path, alpha)?;
    let n = path.n() as u64;
    let (mut low, mut high) = (0.0f64, 0.0f64);
    for (idx, v) in per_level.iter().enumerate() {
        let j = idx as u32 + 1;
        if 1u64.checked_shl(j).is_some_and(|c| c <= n) {
            low = low.max(*v);
        } else {
            high = high.max(*v);
        }
    }
    Ok((low, high, low.max(high)))
}

/// `Σ_{j=1}^{⌊log2 n⌋} 2^{j(p/2-1)} n^{1-p/2}` and `(1 - 2^{1-p/2})^{-1}`.
pub fn geometric_dyadic_sum(p: f64, n: u64) -> Result<(f64, f64)> {
    if !(p > 2.0 && p.is_finite()) {
        return Err(invalid("p", "must exceed 2"));
    }
    if n < 2 {
        return Err(invalid("n", "must be at least 2"));
    }
    let top = 63 - n.leading_zeros();
    let e = p / 2.0 - 1.0;
    let nf = (n as f64).powf(-e);
    let sum = (1..=top).map(|j| (j as f64 * e).exp2() * nf).sum();
    Ok((sum, 1.0 / (1.0 - (-e).exp2())))
}

/// `Σ_{j≥1} 2^j μ{g > 2^{2j/p}}` and `2 E g^{p/2}` for a nonnegative simple
/// `g`. An atom `a` counts the `j ≥ 1` with `2^{2j/p} < a`, contributing
/// `2^{J+1} - 2` for the largest such `J`.
pub fn dyadic_tail_sum(g: &SimpleFunction, p: f64) -> Result<(f64, f64)> {
    if !(p > 2.0 && p.is_finite()) {
        return Err(invalid("p", "must exceed 2"));
    }
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for &(a, m) in g.atoms() {
        rhs += 2.0 * m * a.powf(p / 2.0);
        if a <= 2f64.powf(2.0 / p) {
            continue;
        }
        let mut j = ((p / 2.0) * a.log2()).floor().max(1.0) as i32;
        while j > 0 && (2.0 * j as f64 / p).exp2() >= a {
            j -= 1;
        }
        while (2.0 * (j + 1) as f64 / p).exp2() < a {
            j += 1;
        }
        lhs += m * ((j as f64 + 1.0).exp2() - 2.0);
    }
    Ok((lhs, rhs))
}

/// Truncation terms for `m = g f` with `g` an independent sign, from the law
/// of `|f|`. Then `|m| = |f|`, `E[|m| | past] = |f|` and
/// `E[m² χ{|m|>R} | past] = f² χ{|f|>R}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationModel {
    pub abs_law: SimpleFunction,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationTerms {
    pub r: f64,
    /// `sup_t t^p μ{|m| χ{|m|>R} > t}`.
    pub tail: f64,
    /// `sup_t t^p μ{E[|m| χ{|m|>R} | past] > t}`.
    pub conditional_tail: f64,
    /// `E (E[m² χ{|m|>R} | past])^{p/2}`.
    pub conditional_moment: f64,
}

impl TruncationModel {
    pub fn new(abs_law: SimpleFunction, p: f64) -> Result<Self> {
        if !(p > 2.0 && p.is_finite()) {
            return Err(invalid("p", "must exceed 2"));
        }
        Ok(Self { abs_law, p })
    }

    fn above(&self, r: f64) -> Result<SimpleFunction> {
        SimpleFunction::new(self.abs_law.atoms().iter().copied().filter(|a| a.0 > r).collect())
    }

    pub fn terms(&self, r: f64) -> Result<TruncationTerms> {
        let above = self.above(r)?;
        let tail = weak_norm_exact(&above, self.p)?.powf(self.p);
        Ok(TruncationTerms {
            r,
            tail,
            // The conditional expectation is |f| χ{|f|>R} itself.
            conditional_tail: tail,
            conditional_moment: above.atoms().iter().map(|&(a, m)| m * a.powf(self.p)).sum(),
        })
    }

    /// `t^p μ{E[|m| χ{|m|>R} | past] > t} ≤ R^p μ{E[|m| | past] > R}` for
    /// `t < R`.
    pub fn check_conditional_transfer(&self, t: f64, r: f64) -> Result<BoundRow> {
        if !(t > 0.0 && t < r) {
            return Err(invalid("t", "need 0 < t < R"));
        }
        let lhs = t.powf(self.p) * self.above(r)?.tail(t);
        let rhs = r.powf(self.p) * self.abs_law.tail(r);
        Ok(BoundRow::le(
            "conditional_transfer",
            0,
            format!("R={r} t={t}"),
            lhs,
            rhs,
            0.0,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nagaev_constant() {
        let np = NagaevParams::new(4.0, 1.0).unwrap();
        let e2 = std::f64::consts::E.powi(2);
        assert!((np.c() - 4.0 * (3.0 * e2 - 2.0).exp()).abs() < 1e-6 * np.c());
    }

    #[test]
    fn nagaev_trivial_tail() {
        // Every sample above any scale: Q ≡ 2 over the integration range.
        let s = vec![
            MartingaleSummary {
                n: 1,
                sum_abs: 0.0,
                max_abs: 1e300,
                quad_var: 1e300,
                max_partial_sq: 0.0,
                sum_sq: 0.0,
            };
            3
        ];
        let qf = QFunction::from_summaries(&s).unwrap();
        let np = NagaevParams::new(2.5, 0.5).unwrap();
        let b = nagaev_bound(&qf, 1.0, &np).unwrap();
        assert!((b - 2.0 * np.c() / 2.5).abs() < 1e-12 * b);
    }

    #[test]
    fn geometric_example() {
        let (s, b) = geometric_dyadic_sum(4.0, 16).unwrap();
        assert_eq!(s, 30.0 / 16.0);
        assert_eq!(b, 2.0);
    }

    #[test]
    fn dyadic_tail_two_atoms() {
        // p = 4: 2^{j/2} < 5 for j ≤ 4, so 2 + 4 + 8 + 16 = 30; 2^{j/2} < 1.2
        // for no j ≥ 1.
        let g = SimpleFunction::new(vec![(5.0, 0.25), (1.2, 0.5)]).unwrap();
        let (l, r) = dyadic_tail_sum(&g, 4.0).unwrap();
        assert_eq!(l, 0.25 * 30.0);
        assert!((r - 2.0 * (0.25 * 25.0 + 0.5 * 1.44)).abs() < 1e-12);
    }
}
