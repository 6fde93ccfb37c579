//! Rokhlin towers over the golden-mean rotation `x ↦ frac(x - θ)`.
//!
//! Floor `i` is `{x : frac(x - iθ) ∈ [0, ε)}`, so one step of the map lowers
//! the floor index by one and an orbit can only enter the tower through its
//! top floor.

use crate::error::{invalid, Error, Result};

/// `θ = (√5 - 1)/2`.
pub const GOLDEN_THETA: f64 = 0.618_033_988_749_894_8;

/// Coverage every tower must exceed.
pub const MIN_COVER: f64 = 0.5;

/// Relative margin kept between `n ε` and both ends of its admissible range.
const COVER_MARGIN: f64 = 1e-3;

/// Heights verified by a direct sort of the starting points.
pub const DIRECT_CHECK_MAX: u64 = 1_000_000;

/// Largest height for which floor lookup tables are built.
pub const TOWER_MAX: u64 = 1 << 26;

/// `min_{1 ≤ q < n} ||qθ||` for the golden rotation. The record
/// denominators are the Fibonacci numbers, with `||F_k θ|| = |F_k θ - F_{k-1}| = φ^{-k}`.
pub fn golden_min_gap(n: u64) -> f64 {
    if n < 2 {
        return 1.0;
    }
    // (prev, cur) = (F_{k-1}, F_k), starting from F_1 = F_2 = 1; find the
    // largest F_k ≤ n - 1.
    let (mut prev, mut cur) = (1u64, 1u64);
    while prev + cur < n {
        let next = prev + cur;
        prev = cur;
        cur = next;
    }
    (cur as f64).mul_add(GOLDEN_THETA, -(prev as f64)).abs()
}

/// Base length `ε = c/n` that [`build_tower`] uses, from the closed-form gap
/// alone.
pub fn tower_epsilon(n: u64) -> Result<f64> {
    if !admissible_height(n) {
        return Err(Error::Infeasible(format!("height {n} is not admissible")));
    }
    Ok(0.5 * (MIN_COVER + n as f64 * golden_min_gap(n)) / n as f64)
}

/// `n · min gap` exceeds one half with room for a base length strictly in
/// between.
pub fn admissible_height(n: u64) -> bool {
    n >= 2 && n as f64 * golden_min_gap(n) > MIN_COVER * (1.0 + 2.0 * COVER_MARGIN)
}

/// Smallest gap between the sorted points `frac(iθ)`, `0 ≤ i < n`, with
/// wrap-around.
pub fn direct_min_gap(n: u64) -> f64 {
    let mut pts: Vec<f64> = (0..n).map(|i| frac(i as f64 * GOLDEN_THETA)).collect();
    pts.sort_by(f64::total_cmp);
    let mut gap = 1.0 - pts[pts.len() - 1] + pts[0];
    for w in pts.windows(2) {
        gap = gap.min(w[1] - w[0]);
    }
    gap
}

#[inline]
pub fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

#[derive(Debug, Clone)]
pub struct RotationTower {
    pub theta: f64,
    pub n: u64,
    pub epsilon: f64,
    pub min_gap: f64,
    /// `frac(iθ)` sorted ascending, paired with `i`.
    starts: Vec<(f64, u32)>,
    top_start: f64,
    /// Candidate return times to the base, ascending.
    returns: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Floor {
    At(u64),
    Outside,
}

impl Floor {
    pub fn index(&self) -> Option<u64> {
        match self {
            Floor::At(i) => Some(*i),
            Floor::Outside => None,
        }
    }
}

/// Tower of height `n` with base `[0, ε)`, `ε = c/n` and `c` the midpoint of
/// `(1/2, n · min gap)`.
pub fn build_tower(n: u64) -> Result<RotationTower> {
    if n < 2 {
        return Err(invalid("n", "tower height must be at least 2"));
    }
    if n > TOWER_MAX {
        return Err(Error::Budget(format!("tower height {n} exceeds {TOWER_MAX}")));
    }
    let gap = golden_min_gap(n);
    if n <= DIRECT_CHECK_MAX {
        let direct = direct_min_gap(n);
        if (direct - gap).abs() > 1e-9 * gap + 8.0 * n as f64 * f64::EPSILON {
            return Err(Error::Infeasible(format!(
                "min gap certificate {gap} disagrees with direct scan {direct} at n = {n}"
            )));
        }
    }
    let cover = n as f64 * gap;
    if !admissible_height(n) {
        return Err(Error::Infeasible(format!(
            "height {n}: n · min gap = {cover:.6} leaves no base covering more than 1/2"
        )));
    }
    let epsilon = tower_epsilon(n)?;
    let mut starts: Vec<(f64, u32)> = (0..n).map(|i| (frac(i as f64 * GOLDEN_THETA), i as u32)).collect();
    starts.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(RotationTower {
        theta: GOLDEN_THETA,
        n,
        epsilon,
        min_gap: gap,
        starts,
        top_start: frac((n - 1) as f64 * GOLDEN_THETA),
        returns: return_times(epsilon),
    })
}

/// `||rθ||` with the product formed exactly.
fn dist_to_int(r: u64) -> f64 {
    let x = rotate(0.0, r);
    x.min(1.0 - x)
}

/// `frac(y - rθ)` with `rθ` split into its rounded value and error term.
#[inline]
fn rotate(y: f64, r: u64) -> f64 {
    let rf = r as f64;
    let p = rf * GOLDEN_THETA;
    let e = rf.mul_add(GOLDEN_THETA, -p);
    frac(frac(y - frac(p)) - e)
}

/// Every `r` with `||rθ|| < ε` up to the sum of the two smallest. Return
/// times to an interval take at most three values, the largest being the
/// sum of the other two, so the first return of any base point is listed.
fn return_times(epsilon: f64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut r = 1u64;
    loop {
        if dist_to_int(r) < epsilon {
            out.push(r);
        }
        if out.len() >= 2 && r >= out[0] + out[1] {
            break;
        }
        r += 1;
    }
    out
}

impl RotationTower {
    pub fn coverage(&self) -> f64 {
        self.n as f64 * self.epsilon
    }

    /// The unique floor containing `x`, by binary search over the sorted
    /// starting points.
    pub fn floor_index(&self, x: f64) -> Floor {
        let x = frac(x);
        let pos = self.starts.partition_point(|s| s.0 <= x);
        if pos > 0 {
            let (s, i) = self.starts[pos - 1];
            if x - s < self.epsilon {
                return Floor::At(i as u64);
            }
        }
        // The highest start may wrap past 1.
        let (s, i) = self.starts[self.starts.len() - 1];
        if x + 1.0 - s < self.epsilon {
            return Floor::At(i as u64);
        }
        Floor::Outside
    }

    /// Whether `x` lies in the top floor, the only entry point of an orbit.
    #[inline]
    pub fn in_top(&self, x: f64) -> bool {
        let d = x - self.top_start;
        let d = if d < 0.0 { d + 1.0 } else { d };
        d < self.epsilon
    }

    /// Times `w < horizon` with `T^w x0` in the base, jumping from one visit
    /// to the next through the return times.
    pub fn base_times(&self, x0: f64, horizon: u64, out: &mut Vec<u64>) {
        out.clear();
        let x0 = frac(x0);
        // First visit: search successive blocks of n times in the sorted
        // starts, where time `b n + i` is a visit iff frac(iθ) lies in
        // (y - ε, y] for y = frac(x0 - b n θ).
        let mut first = None;
        let mut block = 0u64;
        while first.is_none() && block * self.n < horizon {
            let y = rotate(x0, block * self.n);
            if let Floor::At(i) = self.floor_index(y) {
                first = Some(block * self.n + i);
            }
            block += 1;
        }
        let Some(mut w) = first else { return };
        while w < horizon {
            out.push(w);
            let y = rotate(x0, w);
            let next = self.returns.iter().find(|&&r| rotate(y, r) < self.epsilon);
            match next {
                Some(r) => w += r,
                None => {
                    // Numerically on a boundary; fall back to stepping.
                    let mut r = 1;
                    while rotate(y, r) >= self.epsilon {
                        r += 1;
                    }
                    w += r;
                }
            }
        }
    }

    /// Floors of `x, Tx, …, T^{len-1}x`, encoded as `u64::MAX` for outside.
    pub fn orbit_floors(&self, x0: f64, len: usize, out: &mut Vec<u64>) {
        out.clear();
        out.reserve(len);
        let mut y = frac(x0);
        let mut cur = self.floor_index(y).index();
        for _ in 0..len {
            out.push(cur.unwrap_or(u64::MAX));
            y -= self.theta;
            if y < 0.0 {
                y += 1.0;
            }
            cur = match cur {
                Some(i) if i > 0 => Some(i - 1),
                _ => {
                    if self.in_top(y) {
                        Some(self.n - 1)
                    } else {
                        None
                    }
                }
            };
        }
    }
}
