//! Faber–Schauder coefficients, the sequential Hölder norm and the Hölder
//! modulus of polygonal paths.
//!
//! Dyadic levels: `D_0 = {0, 1}` and `D_j = {(2l-1) 2^{-j} : 1 ≤ l ≤ 2^{j-1}}`.
//! For `r ∈ D_j`, `j ≥ 1`, the coefficient is
//! `λ_r = x(r) - (x(r - 2^{-j}) + x(r + 2^{-j})) / 2`, and `λ_0 = x(0)`,
//! `λ_1 = x(1)`.
//!
//! For a polygonal path every `λ_r` is a finite sum of kink contributions:
//! a vertex `v` strictly inside the cell `(r - h, r + h)` with slope jump
//! `s_left - s_right` contributes `(s_left - s_right)(h - |r - v|) / 2`.
//! Vertices on cell boundaries contribute nothing, so affine cells give an
//! exact zero. Once cells are shorter than `1/n` every cell holds at most one
//! vertex and `|λ_r| ≤ K 2^{-j}` with `K = max |s_left - s_right| / 2`,
//! which certifies the supremum over the infinitely many remaining levels.

use crate::error::{invalid, Result};
use crate::paths::PolygonalPath;

/// Deepest level the exact integer cell arithmetic supports.
const LEVEL_CAP: u32 = 100;

/// `p > 2` and `α = 1/2 - 1/p`, always kept linked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderParams {
    p: f64,
    alpha: f64,
}

impl HolderParams {
    pub fn from_p(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 2.0) {
            return Err(invalid("p", format!("must exceed 2, got {p}")));
        }
        Ok(Self {
            p,
            alpha: 0.5 - 1.0 / p,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(invalid("alpha", format!("must lie in (0, 1), got {alpha}")))
    }
}

/// One dyadic level. Entries are `(l, λ)` with `r = (2l - 1) 2^{-j}` for
/// `j ≥ 1`; level 0 stores `(0, λ_0)` and `(1, λ_1)`. Zero coefficients are
/// omitted.
#[derive(Debug, Clone, PartialEq)]
pub struct SchauderLevel {
    pub level: u32,
    pub coeffs: Vec<(u128, f64)>,
}

impl SchauderLevel {
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, &(_, c)| m.max(c.abs()))
    }

    /// Dyadic abscissa of entry index `l`.
    pub fn abscissa(&self, l: u128) -> f64 {
        if self.level == 0 {
            l as f64
        } else {
            (2 * l - 1) as f64 * (-(self.level as f64)).exp2()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchauderCoeffs {
    pub alpha: f64,
    pub first_level: u32,
    pub levels: Vec<SchauderLevel>,
    /// Last level computed.
    pub truncation_level: u32,
    /// Majorant of `2^{jα} max_{r∈D_j} |λ_r|` for every `j > truncation_level`.
    pub truncation_bound: f64,
    /// Whether `truncation_bound` is below the supremum found, which makes
    /// the sequential norm exact.
    pub certified: bool,
}

struct ScanOutcome {
    last_level: u32,
    bound: f64,
    certified: bool,
    running_max: f64,
}

/// Walks levels `first_level, first_level + 1, …` until the truncation
/// certificate applies (and at least through `min_depth`), calling `sink`
/// for every nonzero coefficient.
fn scan_levels(
    path: &PolygonalPath,
    alpha: f64,
    first_level: u32,
    min_depth: u32,
    mut sink: impl FnMut(u32, u128, f64),
) -> ScanOutcome {
    let n = path.n();
    let x = path.increments();
    let scale = path.scale();

    // Kink bound K = max |s_left - s_right| / 2 over interior vertices.
    let max_jump = x.windows(2).fold(0.0f64, |m, w| m.max((w[0] - w[1]).abs()));
    let kink = 0.5 * scale * n as f64 * max_jump;
    let sparse_from = 1 + (usize::BITS - (n - 1).leading_zeros()) * u32::from(n > 1);
    let cap = LEVEL_CAP.saturating_sub(usize::BITS - n.leading_zeros());

    let mut running_max = 0.0f64;
    let mut level = first_level;
    loop {
        let weight = (level as f64 * alpha).exp2();
        let mut level_max = 0.0f64;
        if level == 0 {
            let l0 = path.vertex(0);
            let l1 = path.vertex(n);
            if l0 != 0.0 {
                sink(0, 0, l0);
            }
            if l1 != 0.0 {
                sink(0, 1, l1);
            }
            level_max = l0.abs().max(l1.abs());
        } else if kink > 0.0 {
            visit_level(x, scale, level, |l, c| {
                level_max = level_max.max(c.abs());
                sink(level, l, c);
            });
        }
        running_max = running_max.max(weight * level_max);

        let next = level + 1;
        let bound = if kink == 0.0 {
            0.0
        } else {
            kink * (next as f64 * (alpha - 1.0)).exp2()
        };
        let past_sparse = next >= sparse_from;
        let done_depth = level >= min_depth;
        if done_depth && (kink == 0.0 || (past_sparse && bound < running_max)) {
            return ScanOutcome {
                last_level: level,
                bound,
                certified: true,
                running_max,
            };
        }
        if level >= cap {
            return ScanOutcome {
                last_level: level,
                bound,
                certified: past_sparse && bound <= running_max,
                running_max,
            };
        }
        level = next;
    }
}

/// Visits the nonzero coefficients of level `j ≥ 1` in increasing `l`.
fn visit_level(x: &[f64], scale: f64, j: u32, mut visit: impl FnMut(u128, f64)) {
    let n = x.len() as u128;
    let two_j = 1u128 << j;
    let half = 1u128 << (j - 1);
    let unit = scale * (-(j as f64) - 1.0).exp2();

    let mut cell: Option<u128> = None;
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let flush = |cell: Option<u128>, sum: f64, comp: f64, visit: &mut dyn FnMut(u128, f64)| {
        if let Some(c) = cell {
            let v = sum + comp;
            if v != 0.0 {
                visit(c + 1, v);
            }
        }
    };

    let small = n.checked_mul(two_j).is_some_and(|v| v < (1u128 << 63));
    for i in 1..x.len() {
        let jump = x[i - 1] - x[i];
        if jump == 0.0 {
            continue;
        }
        let iu = i as u128;
        let c = if small {
            ((i as u64) << (j - 1)) / (n as u64)
        } else {
            ((iu * half) / n) as u64
        } as u128;
        let centre = (2 * c + 1) * n;
        let pos = iu * two_j;
        let dist = centre.abs_diff(pos);
        if dist >= n {
            continue;
        }
        let numer = (n - dist) as f64;
        let term = jump * numer * unit;
        if cell != Some(c) {
            flush(cell, sum, comp, &mut visit);
            cell = Some(c);
            sum = 0.0;
            comp = 0.0;
        }
        // Neumaier summation.
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    flush(cell, sum, comp, &mut visit);
}

/// All nonzero Schauder coefficients up to the certified truncation level.
pub fn schauder_coefficients(path: &PolygonalPath, alpha: f64) -> Result<SchauderCoeffs> {
    schauder_coefficients_to_depth(path, alpha, 0)
}

/// Like [`schauder_coefficients`] but never stops before `min_depth`; used
/// when the expansion itself (not just the norm) is needed to a given
/// resolution.
pub fn schauder_coefficients_to_depth(path: &PolygonalPath, alpha: f64, min_depth: u32) -> Result<SchauderCoeffs> {
    check_alpha(alpha)?;
    let mut levels: Vec<SchauderLevel> = Vec::new();
    let out = scan_levels(path, alpha, 0, min_depth, |j, l, c| {
        while levels.len() <= j as usize {
            let level = levels.len() as u32;
            levels.push(SchauderLevel {
                level,
                coeffs: Vec::new(),
            });
        }
        levels[j as usize].coeffs.push((l, c));
    });
    while levels.len() <= out.last_level as usize {
        let level = levels.len() as u32;
        levels.push(SchauderLevel {
            level,
            coeffs: Vec::new(),
        });
    }
    Ok(SchauderCoeffs {
        alpha,
        first_level: 0,
        levels,
        truncation_level: out.last_level,
        truncation_bound: out.bound,
        certified: out.certified,
    })
}

/// `sup_{j ≥ 0} 2^{jα} max_{r ∈ D_j} |λ_r|`.
pub fn sequential_norm(coeffs: &SchauderCoeffs) -> f64 {
    coeffs
        .levels
        .iter()
        .filter(|l| l.level >= coeffs.first_level)
        .map(|l| (l.level as f64 * coeffs.alpha).exp2() * l.max_abs())
        .fold(0.0, f64::max)
}

/// `sup_{j ≥ J} 2^{jα} max_{r ∈ D_j} |λ_r(path)|`, the quantity whose
/// vanishing characterises tightness in the little Hölder space.
pub fn tightness_statistic(path: &PolygonalPath, alpha: f64, first_level: u32) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(scan_levels(path, alpha, first_level, first_level, |_, _, _| {}).running_max)
}

/// [`tightness_statistic`] at each first level in `levels`, sharing one
/// scan: levels below the largest `J` come from a single pass, the rest from
/// the certified scan at that `J`.
pub fn tightness_profile(path: &PolygonalPath, alpha: f64, levels: &[u32]) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    let (Some(&lo), Some(&hi)) = (levels.iter().min(), levels.iter().max()) else {
        return Ok(Vec::new());
    };
    let tail = scan_levels(path, alpha, hi, hi, |_, _, _| {}).running_max;
    let mut maxima = vec![0.0f64; (hi - lo) as usize];
    if hi > lo {
        scan_levels(path, alpha, lo, hi - 1, |level, _, c| {
            if level < hi {
                let m = &mut maxima[(level - lo) as usize];
                *m = m.max(c.abs());
            }
        });
    }
    Ok(levels
        .iter()
        .map(|&j| {
            (j..hi)
                .map(|l| (l as f64 * alpha).exp2() * maxima[(l - lo) as usize])
                .fold(tail, f64::max)
        })
        .collect())
}

/// Evaluates the partial Schauder expansion at `t`.
pub fn reconstruct(coeffs: &SchauderCoeffs, t: f64) -> f64 {
    let mut acc = 0.0;
    for lvl in &coeffs.levels {
        if lvl.level == 0 {
            for &(l, c) in &lvl.coeffs {
                acc += if l == 0 { c * (1.0 - t) } else { c * t };
            }
            continue;
        }
        let h = (-(lvl.level as f64)).exp2();
        // Exactly one tent per level can be nonzero at t.
        let l = ((t / (2.0 * h)).floor() as u128 + 1).min(1u128 << (lvl.level - 1));
        if let Ok(pos) = lvl.coeffs.binary_search_by_key(&l, |&(k, _)| k) {
            let r = lvl.abscissa(l);
            let tent = (1.0 - (t - r).abs() / h).max(0.0);
            acc += lvl.coeffs[pos].1 * tent;
        }
    }
    acc
}

/// `sup_{j≥1} 2^{αj} max_{0≤k<2^j} |x(r_{k+1,j}) - x(r_{k,j})|` with
/// `r_{k,j} = k 2^{-j}`. Beyond `j_s = ⌈log2(2n)⌉` the steepest segment
/// contains a full dyadic cell, so the level maxima equal `L_max 2^{-j}` and
/// decrease; the supremum is attained at some `j ≤ j_s`.
pub fn increment_seq_bound(path: &PolygonalPath, alpha: f64) -> Result<f64> {
    Ok(increment_level_maxima(path, alpha)?.into_iter().fold(0.0, f64::max))
}

/// `2^{αj} max_{0≤k<2^j} |x(r_{k+1,j}) - x(r_{k,j})|` for `j = 1..=j_s`
/// (entry `j - 1`); later levels only decrease.
pub fn increment_level_maxima(path: &PolygonalPath, alpha: f64) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    let n = path.n() as u64;
    let top = 64 - (2 * n - 1).leading_zeros();
    let mut out = Vec::with_capacity(top as usize);
    for j in 1..=top {
        let cells = 1u128 << j;
        let mut prev = path.eval_dyadic(0, j);
        let mut m = 0.0f64;
        for k in 1..=cells {
            let cur = path.eval_dyadic(k, j);
            m = m.max((cur - prev).abs());
            prev = cur;
        }
        out.push((j as f64 * alpha).exp2() * m);
    }
    Ok(out)
}

/// Table of `(g/n)^α` for gaps `g = 0..=max_gap`.
struct GapWeights {
    den: Vec<f64>,
}

impl GapWeights {
    fn new(n: usize, alpha: f64, max_gap: usize) -> Self {
        let nf = n as f64;
        let den = (0..=max_gap).map(|g| (g as f64 / nf).powf(alpha)).collect();
        Self { den }
    }

    #[inline]
    fn ratio(&self, dy: f64, gap: usize) -> f64 {
        dy.abs() / self.den[gap]
    }
}

/// `max_{0≤i<j≤n} |x(j/n) - x(i/n)| / ((j-i)/n)^α` by a direct pair scan,
/// visiting gaps in increasing order and stopping once the path range over
/// the gap weight cannot beat the incumbent.
pub fn vertex_norm(path: &PolygonalPath, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let n = path.n();
    if n > VERTEX_SCAN_MAX {
        return Ok(max_vertex_ratio(&path.vertex_values(), alpha, n, n));
    }
    let y = path.vertex_values();
    let w = GapWeights::new(n, alpha, n);
    let (lo, hi) = y
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let range = hi - lo;
    let mut best = 0.0f64;
    for g in 1..=n {
        if range / w.den[g] <= best {
            break;
        }
        for i in 0..=n - g {
            best = best.max(w.ratio(y[i + g] - y[i], g));
        }
    }
    Ok(best)
}

/// Largest `n` handled by the direct scan in [`vertex_norm`].
pub const VERTEX_SCAN_MAX: usize = 512;

/// Hölder modulus `w_α(x, δ) = sup_{0<|t-s|≤δ} |x(t)-x(s)| / |t-s|^α` of a
/// polygonal path. Candidates are vertex pairs with gap at most `δ` and, for
/// each vertex, the points at distance exactly `δ`; on any pair of segments
/// the ratio has no interior maximum, so this set attains the supremum.
pub fn holder_modulus(path: &PolygonalPath, alpha: f64, delta: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if delta.is_nan() || delta <= 0.0 {
        return Err(invalid("delta", format!("must be positive, got {delta}")));
    }
    let n = path.n();
    let y = path.vertex_values();
    if delta >= 1.0 {
        return Ok(max_vertex_ratio(&y, alpha, n, n));
    }
    let span = n as f64 * delta;
    let nearest = span.round();
    if (span - nearest).abs() <= 1e-9 * span.max(1.0) && nearest >= 1.0 {
        return Ok(max_vertex_ratio(&y, alpha, n, nearest as usize));
    }
    let gap = span.floor() as usize;
    let mut best = if gap >= 1 {
        max_vertex_ratio(&y, alpha, n, gap)
    } else {
        0.0
    };
    let den = delta.powf(alpha);
    for (i, &yi) in y.iter().enumerate() {
        let s = i as f64 / n as f64;
        if s + delta <= 1.0 {
            best = best.max((path.eval(s + delta) - yi).abs() / den);
        }
        if s - delta >= 0.0 {
            best = best.max((yi - path.eval(s - delta)).abs() / den);
        }
    }
    Ok(best)
}

/// Exact `max_{0≤i<j≤n, j-i≤max_gap} |y_j - y_i| / ((j-i)/n)^α`.
///
/// Branch and bound over pairs of aligned dyadic index blocks: a block pair
/// is discarded when the spread of `y` across it, divided by the weight of
/// the smallest admissible gap, cannot beat the incumbent.
pub fn max_vertex_ratio(y: &[f64], alpha: f64, n: usize, max_gap: usize) -> f64 {
    max_window_ratio(y, alpha, n, max_gap, y.len().saturating_sub(1))
}

/// As [`max_vertex_ratio`], with the left index restricted to `i ≤ i_max`.
pub fn max_window_ratio(y: &[f64], alpha: f64, n: usize, max_gap: usize, i_max: usize) -> f64 {
    let len = y.len();
    if len < 2 || max_gap == 0 {
        return 0.0;
    }
    let i_max = i_max.min(len - 2);
    let max_gap = max_gap.min(len - 1);
    let w = GapWeights::new(n, alpha, max_gap);

    // Seed the incumbent with all pairs at power-of-two gaps and the top gap.
    let mut best = 0.0f64;
    let mut g = 1usize;
    loop {
        for i in 0..(len - g).min(i_max + 1) {
            best = best.max(w.ratio(y[i + g] - y[i], g));
        }
        if g == max_gap {
            break;
        }
        g = (g * 2).min(max_gap);
    }

    // Min/max pyramid over aligned blocks of size 2^t.
    let mut top = 0u32;
    while (1usize << top) < max_gap {
        top += 1;
    }
    let mut mins: Vec<Vec<f64>> = vec![y.to_vec()];
    let mut maxs: Vec<Vec<f64>> = vec![y.to_vec()];
    for t in 1..=top as usize {
        let (pm, px) = (&mins[t - 1], &maxs[t - 1]);
        let m = pm.len().div_ceil(2);
        let mut nm = Vec::with_capacity(m);
        let mut nx = Vec::with_capacity(m);
        for b in 0..m {
            let a = 2 * b;
            if a + 1 < pm.len() {
                nm.push(pm[a].min(pm[a + 1]));
                nx.push(px[a].max(px[a + 1]));
            } else {
                nm.push(pm[a]);
                nx.push(px[a]);
            }
        }
        mins.push(nm);
        maxs.push(nx);
    }

    const LEAF: u32 = 3;
    let mut stack: Vec<(u32, usize, usize)> = Vec::new();
    let blocks = mins[top as usize].len();
    for b in (0..blocks).rev() {
        if b + 1 < blocks {
            stack.push((top, b, b + 1));
        }
        stack.push((top, b, b));
    }

    let bound = |t: u32, bi: usize, bj: usize| -> Option<f64> {
        let ti = t as usize;
        if bj >= mins[ti].len() {
            return None;
        }
        let size = 1usize << t;
        let ilo = bi * size;
        let ihi = ((bi + 1) * size - 1).min(i_max);
        let jlo = bj * size;
        let jhi = ((bj + 1) * size - 1).min(len - 1);
        if ilo > i_max || jhi <= ilo {
            return None;
        }
        let min_gap = if jlo > ihi { jlo - ihi } else { 1 };
        if min_gap > max_gap {
            return None;
        }
        let spread = (maxs[ti][bj] - mins[ti][bi]).max(maxs[ti][bi] - mins[ti][bj]);
        Some(spread / w.den[min_gap])
    };

    let slack = 1.0 + 1e-12;
    while let Some((t, bi, bj)) = stack.pop() {
        let Some(b) = bound(t, bi, bj) else { continue };
        if b * slack <= best {
            continue;
        }
        if t <= LEAF {
            let size = 1usize << t;
            let ilo = bi * size;
            let ihi = ((bi + 1) * size - 1).min(i_max);
            let jlo = bj * size;
            let jhi = ((bj + 1) * size - 1).min(len - 1);
            for i in ilo..=ihi {
                let from = jlo.max(i + 1);
                let to = jhi.min(i + max_gap);
                for j in from..to + 1 {
                    best = best.max(w.ratio(y[j] - y[i], j - i));
                }
            }
            continue;
        }
        let mut kids: Vec<(f64, usize, usize)> = Vec::with_capacity(4);
        for ci in [2 * bi, 2 * bi + 1] {
            for cj in [2 * bj, 2 * bj + 1] {
                if cj < ci {
                    continue;
                }
                if let Some(cb) = bound(t - 1, ci, cj) {
                    if cb * slack > best {
                        kids.push((cb, ci, cj));
                    }
                }
            }
        }
        kids.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (_, ci, cj) in kids {
            stack.push((t - 1, ci, cj));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::build_polygonal;

    fn tent() -> PolygonalPath {
        build_polygonal(&[1.0, -1.0], 1.0).unwrap()
    }

    fn identity(n: usize) -> PolygonalPath {
        build_polygonal(&vec![1.0; n], 1.0 / n as f64).unwrap()
    }

    #[test]
    fn tent_has_single_coefficient() {
        let c = schauder_coefficients(&tent(), 0.25).unwrap();
        let nonzero: Vec<_> = c
            .levels
            .iter()
            .flat_map(|l| l.coeffs.iter().map(move |&(k, v)| (l.level, k, v)))
            .collect();
        assert_eq!(nonzero, vec![(1, 1, 1.0)]);
        assert!(c.certified);
        assert!((sequential_norm(&c) - 0.25f64.exp2()).abs() < 1e-15);
        assert!((sequential_norm(&c) - 1.189_207_12).abs() < 1e-8);
    }

    #[test]
    fn identity_has_only_endpoint_coefficient() {
        for n in [1, 3, 10, 64] {
            let c = schauder_coefficients(&identity(n), 0.3).unwrap();
            for l in &c.levels {
                if l.level == 0 {
                    assert_eq!(l.coeffs.len(), 1);
                    assert!((l.coeffs[0].1 - 1.0).abs() < 1e-15);
                } else {
                    assert!(l.coeffs.is_empty(), "level {} of n={n}", l.level);
                }
            }
            assert!((sequential_norm(&c) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_path_is_all_zero() {
        let p = build_polygonal(&[0.0; 5], 1.0).unwrap();
        let c = schauder_coefficients(&p, 0.2).unwrap();
        assert_eq!(sequential_norm(&c), 0.0);
        assert!(c.certified);
        assert_eq!(holder_modulus(&p, 0.2, 0.3).unwrap(), 0.0);
        assert_eq!(vertex_norm(&p, 0.2).unwrap(), 0.0);
    }

    #[test]
    fn tightness_examples() {
        let t = tent();
        let c = schauder_coefficients(&t, 0.25).unwrap();
        assert_eq!(tightness_statistic(&t, 0.25, 0).unwrap(), sequential_norm(&c));
        assert_eq!(tightness_statistic(&t, 0.25, 2).unwrap(), 0.0);
    }

    #[test]
    fn identity_modulus_and_increment_bound() {
        let id = identity(8);
        assert!((holder_modulus(&id, 0.25, 1.0).unwrap() - 1.0).abs() < 1e-14);
        let b = increment_seq_bound(&id, 0.25).unwrap();
        assert!((b - (0.25f64 - 1.0).exp2()).abs() < 1e-14);
    }

    #[test]
    fn single_increment_norm() {
        let p = build_polygonal(&[-2.5], 1.0).unwrap();
        assert_eq!(vertex_norm(&p, 0.3).unwrap(), 2.5);
    }

    #[test]
    fn invalid_arguments() {
        let p = tent();
        assert!(holder_modulus(&p, 0.25, 0.0).is_err());
        assert!(holder_modulus(&p, 0.25, -1.0).is_err());
        assert!(schauder_coefficients(&p, 1.5).is_err());
        assert!(HolderParams::from_p(2.0).is_err());
        let hp = HolderParams::from_p(4.0).unwrap();
        assert_eq!(hp.alpha(), 0.25);
    }

    #[test]
    fn kink_off_dyadic_grid() {
        // Single kink at 1/3; level-1 coefficient is x(1/2) - x(1)/2.
        let p = build_polygonal(&[3.0, 0.0, 0.0], 1.0 / 3.0).unwrap();
        let c = schauder_coefficients(&p, 0.25).unwrap();
        let l1 = &c.levels[1];
        let direct = p.eval(0.5) - 0.5 * p.eval(1.0);
        assert!((l1.coeffs[0].1 - direct).abs() < 1e-15);
    }
}
