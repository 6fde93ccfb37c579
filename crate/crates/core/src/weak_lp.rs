//! Weak-`L^p` quasi-norm, the `N_p` norm and tail diagnostics for simple
//! functions on an atomless probability space.

use crate::error::{invalid, Error, Result};

/// `Σ a_i χ(A_i)` with pairwise disjoint `A_i`, `a_0 > a_1 > … ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleFunction {
    atoms: Vec<(f64, f64)>,
}

const MASS_SLACK: f64 = 1e-12;

impl SimpleFunction {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        let mut total = 0.0;
        for (k, &(a, m)) in atoms.iter().enumerate() {
            if !(a.is_finite() && a >= 0.0) {
                return Err(invalid(
                    "atoms",
                    format!("value {a} at {k} is not a finite nonnegative number"),
                ));
            }
            if !(m.is_finite() && m >= 0.0) {
                return Err(invalid("atoms", format!("mass {m} at {k} is negative or not finite")));
            }
            if k > 0 && atoms[k - 1].0 <= a {
                return Err(invalid("atoms", "values must be strictly decreasing"));
            }
            total += m;
        }
        // Summation error grows with the atom count.
        if total > 1.0 + MASS_SLACK.max(atoms.len() as f64 * f64::EPSILON) {
            return Err(invalid("atoms", format!("total mass {total} exceeds 1")));
        }
        Ok(Self { atoms })
    }

    /// Builds `|f|` from unordered cells `(value, mass)`, merging equal
    /// magnitudes.
    pub fn from_cells(cells: &[(f64, f64)]) -> Result<Self> {
        let mut v: Vec<(f64, f64)> = cells.iter().map(|&(a, m)| (a.abs(), m)).collect();
        v.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(v.len());
        for (a, m) in v {
            match atoms.last_mut() {
                Some(last) if last.0 == a => last.1 += m,
                _ => atoms.push((a, m)),
            }
        }
        Self::new(atoms)
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// `μ{f > t}`.
    pub fn tail(&self, t: f64) -> f64 {
        self.atoms.iter().filter(|a| a.0 > t).map(|a| a.1).sum()
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|&(a, m)| a * m).sum()
    }
}

fn check_p(p: f64, min: f64) -> Result<()> {
    if p.is_finite() && p > min {
        Ok(())
    } else {
        Err(invalid("p", format!("must exceed {min}, got {p}")))
    }
}

/// `(sup_{t>0} t^p μ{f > t})^{1/p}`.
///
/// The tail is a left-continuous step function that is constant on each
/// `[a_{j+1}, a_j)`, so the supremum over a step is its left limit at `a_j`.
pub fn weak_norm_exact(f: &SimpleFunction, p: f64) -> Result<f64> {
    check_p(p, 0.0)?;
    let mut best = 0.0f64;
    let mut tail = 0.0;
    for &(a, m) in &f.atoms {
        // μ{f > t} for t just below a.
        tail += m;
        if m > 0.0 {
            best = best.max(a.powf(p) * tail);
        }
    }
    Ok(best.powf(1.0 / p))
}

/// `max_j a_j^p Σ_{i≤j} μ_i`, the simple-function majorant of `‖f‖^p_{p,∞}`.
pub fn simple_weak_bound(f: &SimpleFunction, p: f64) -> Result<f64> {
    check_p(p, 0.0)?;
    let mut cum = 0.0;
    let mut best = 0.0f64;
    for &(a, m) in &f.atoms {
        cum += m;
        best = best.max(a.powf(p) * cum);
    }
    Ok(best)
}

/// `N_p(f) = sup_{μ(A)>0} μ(A)^{1/p-1} E[|f| χ_A]`.
///
/// For a given `μ(A)` the best `A` is a super-level set of `|f|`, so the
/// functional reduces to `sup_s s^{1/p-1} ∫_0^s f^*`. On each atom that
/// expression is quasi-convex in `s`, hence the supremum sits at atom
/// boundaries.
pub fn np_norm(f: &SimpleFunction, p: f64) -> Result<f64> {
    check_p(p, 1.0)?;
    let expo = 1.0 / p - 1.0;
    let mut mass = 0.0;
    let mut integral = 0.0;
    let mut best = 0.0f64;
    for &(a, m) in &f.atoms {
        if m == 0.0 {
            continue;
        }
        mass += m;
        integral += a * m;
        best = best.max(mass.powf(expo) * integral);
    }
    Ok(best)
}

/// `N_p` of an empirical law with equal masses `1/N` on `|sample|`.
pub fn np_norm_sample(sample: &[f64], p: f64) -> Result<f64> {
    check_p(p, 1.0)?;
    if sample.is_empty() {
        return Err(Error::EmptyInput("sample"));
    }
    let mut v: Vec<f64> = sample.iter().map(|x| x.abs()).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    let n = v.len() as f64;
    let expo = 1.0 / p - 1.0;
    let mut integral = 0.0;
    let mut best = 0.0f64;
    for (k, a) in v.iter().enumerate() {
        integral += a / n;
        best = best.max(((k + 1) as f64 / n).powf(expo) * integral);
    }
    Ok(best)
}

/// `‖·‖_{p,∞}` of an empirical law with equal masses `1/N` on `|sample|`.
pub fn weak_norm_sample(sample: &[f64], p: f64) -> Result<f64> {
    check_p(p, 0.0)?;
    if sample.is_empty() {
        return Err(Error::EmptyInput("sample"));
    }
    let mut v: Vec<f64> = sample.iter().map(|x| x.abs()).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    let n = v.len() as f64;
    let mut best = 0.0f64;
    let mut k = 0;
    while k < v.len() {
        let a = v[k];
        while k < v.len() && v[k] == a {
            k += 1;
        }
        best = best.max(a.powf(p) * k as f64 / n);
    }
    Ok(best.powf(1.0 / p))
}

/// Constant of the sandwich `‖f‖_{p,∞} ≤ N_p(f) ≤ κ_p ‖f‖_{p,∞}`:
/// `∫_0^∞ min(t^{-p} M^p, μ(A)) dt = p/(p-1) · M μ(A)^{1-1/p}`.
pub fn kappa_p(p: f64) -> Result<f64> {
    check_p(p, 1.0)?;
    Ok(p / (p - 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailProfile {
    pub p: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub sup_estimate: f64,
}

pub const DEFAULT_TAIL_GRID: usize = 64;

/// `t ↦ t^p μ̂{|f| > t}` on a log grid from the median of `|f|` (or the
/// smallest positive magnitude, if the median is zero) to its maximum.
pub fn tail_profile(sample: &[f64], p: f64, grid_size: usize) -> Result<TailProfile> {
    check_p(p, 0.0)?;
    if sample.is_empty() {
        return Err(Error::EmptyInput("sample"));
    }
    if grid_size < 2 {
        return Err(invalid("grid_size", format!("need at least 2 points, got {grid_size}")));
    }
    let mut v: Vec<f64> = sample.iter().map(|x| x.abs()).collect();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let top = v[n - 1];
    if top == 0.0 {
        let grid: Vec<f64> = (0..grid_size).map(|k| (k + 1) as f64 / grid_size as f64).collect();
        return Ok(TailProfile {
            p,
            values: vec![0.0; grid_size],
            grid,
            sup_estimate: 0.0,
        });
    }
    let mut lo = v[(n - 1) / 2];
    if lo == 0.0 {
        lo = *v.iter().find(|x| **x > 0.0).expect("top is positive");
    }
    let (llo, lhi) = (lo.ln(), top.ln());
    let grid: Vec<f64> = (0..grid_size)
        .map(|k| (llo + (lhi - llo) * k as f64 / (grid_size - 1) as f64).exp())
        .collect();
    let values: Vec<f64> = grid
        .iter()
        .map(|&t| {
            let above = n - v.partition_point(|x| *x <= t);
            t.powf(p) * above as f64 / n as f64
        })
        .collect();
    let sup_estimate = values.iter().cloned().fold(0.0, f64::max);
    Ok(TailProfile {
        p,
        grid,
        values,
        sup_estimate,
    })
}

/// `E[f | A]` where `A` is generated by the given grouping of atom indices:
/// each group is replaced by its mass-weighted average.
pub fn conditional_coarsen(f: &SimpleFunction, groups: &[Vec<usize>]) -> Result<SimpleFunction> {
    let k = f.atoms.len();
    let mut seen = vec![false; k];
    let mut cells = Vec::with_capacity(groups.len());
    for (gi, g) in groups.iter().enumerate() {
        if g.is_empty() {
            return Err(invalid("groups", format!("group {gi} is empty")));
        }
        let mut mass = 0.0;
        let mut integral = 0.0;
        for &i in g {
            if i >= k || seen[i] {
                return Err(invalid("groups", format!("atom {i} is out of range or repeated")));
            }
            seen[i] = true;
            mass += f.atoms[i].1;
            integral += f.atoms[i].0 * f.atoms[i].1;
        }
        if mass > 0.0 {
            cells.push((integral / mass, mass));
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(invalid("groups", format!("atom {i} is not covered")));
    }
    SimpleFunction::from_cells(&cells)
}

/// Discretisation of `f(x) = x^{-1/p}` and `g(x) = f(1-x)` on `N` equal cells
/// of `[0, 1]`, each cell carrying the infimum of the function over it.
/// Returns `(f, g, f + g)`.
pub fn triangle_pair(p: f64, cells: usize) -> Result<(SimpleFunction, SimpleFunction, SimpleFunction)> {
    check_p(p, 0.0)?;
    if cells == 0 {
        return Err(invalid("cells", "need at least one cell"));
    }
    let nf = cells as f64;
    let e = -1.0 / p;
    let mass = 1.0 / nf;
    let f_cells: Vec<(f64, f64)> = (0..cells).map(|k| (((k + 1) as f64 / nf).powf(e), mass)).collect();
    let g_cells: Vec<(f64, f64)> = (0..cells).map(|k| ((1.0 - k as f64 / nf).powf(e), mass)).collect();
    let h_cells: Vec<(f64, f64)> = f_cells.iter().zip(&g_cells).map(|(a, b)| (a.0 + b.0, mass)).collect();
    Ok((
        SimpleFunction::from_cells(&f_cells)?,
        SimpleFunction::from_cells(&g_cells)?,
        SimpleFunction::from_cells(&h_cells)?,
    ))
}
