//! The non-tight martingale built from Rokhlin towers: schedules, towers,
//! the tower functions `f_l`, and Monte Carlo checks of the lower-bound
//! chain.

pub mod format;
pub mod schedule;
pub mod sim;
pub mod tower;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::error::{invalid, Result};
use crate::weak_lp::{kappa_p, SimpleFunction};

pub use format::{parse_schedule, write_schedule};
pub use schedule::{
    build_desk, build_faithful, build_schedule, validate_schedule, ConditionRow, DeskOptions, Exactness, LevelParams,
    Magnitude, Mode, Schedule, ValidationReport,
};
pub use sim::{eval_m_path, lower_bound_chain, ChainReport, McConfig};
pub use tower::{build_tower, Floor, RotationTower};

/// Values of `f_l` on its floors, precomputed per annulus.
#[derive(Debug, Clone)]
pub struct TowerFunction {
    pub i: u32,
    pub k: u64,
    /// `values[j]` is taken on `[2^{I+j}, 2^{I+j+1})`; `values[0]` also on
    /// `[0, 2^I)`.
    pub values: Vec<f64>,
}

impl TowerFunction {
    pub fn new(p: f64, lv: &LevelParams) -> Result<Self> {
        let j = lv
            .j_u64()
            .filter(|j| *j < 63)
            .ok_or_else(|| invalid("J", "too large to tabulate"))?;
        if lv.i + j >= 63 {
            return Err(invalid("k", "exceeds 2^62"));
        }
        let n = lv.n.to_u64().ok_or_else(|| invalid("n", "exceeds 64 bits"))? as f64;
        let values = (0..j)
            .map(|a| (n / (1u64 << (lv.i + a)) as f64).powf(1.0 / p) / lv.big_l)
            .collect();
        Ok(Self {
            i: lv.i as u32,
            k: 1u64 << (lv.i + j),
            values,
        })
    }

    /// `f_l` on floor `i`; zero outside the support.
    #[inline]
    pub fn value(&self, floor: Floor) -> f64 {
        match floor {
            Floor::At(i) => self.value_at(i),
            Floor::Outside => 0.0,
        }
    }

    /// As [`TowerFunction::value`] with `u64::MAX` meaning outside.
    #[inline]
    pub fn value_at(&self, i: u64) -> f64 {
        if i >= self.k {
            return 0.0;
        }
        let bits = 64 - i.leading_zeros();
        if bits <= self.i + 1 {
            self.values[0]
        } else {
            self.values[(bits - 1 - self.i) as usize]
        }
    }
}

pub fn f_l_value(floor: Floor, l: usize, s: &Schedule) -> Result<f64> {
    Ok(TowerFunction::new(s.p, s.level(l)?)?.value(floor))
}

/// `f_l` as a simple function, with `epsilon` the mass of one floor.
pub fn f_l_simple(s: &Schedule, l: usize, epsilon: f64) -> Result<SimpleFunction> {
    let tf = TowerFunction::new(s.p, s.level(l)?)?;
    let mut cells = Vec::with_capacity(tf.values.len());
    for (j, v) in tf.values.iter().enumerate() {
        let floors = if j == 0 {
            2u64 << tf.i
        } else {
            1u64 << (tf.i as usize + j)
        };
        cells.push((*v, floors as f64 * epsilon));
    }
    SimpleFunction::from_cells(&cells)
}

/// The annulus part of `f_l` (everything except the base block `[0, 2^I)`).
pub fn f_l_main_part(s: &Schedule, l: usize, epsilon: f64) -> Result<SimpleFunction> {
    let tf = TowerFunction::new(s.p, s.level(l)?)?;
    let cells: Vec<(f64, f64)> = tf
        .values
        .iter()
        .enumerate()
        .map(|(j, v)| (*v, (1u64 << (tf.i as usize + j)) as f64 * epsilon))
        .collect();
    SimpleFunction::from_cells(&cells)
}

/// Exact law of `Σ_{l ∈ active} f_l`, one independent rotation coordinate
/// per level. Every `f_l` is nonnegative, so this is also the law of `|m|`.
pub fn f_distribution(s: &Schedule, active: &[usize]) -> Result<SimpleFunction> {
    let mut cells = vec![(0.0, 1.0)];
    for &l in active {
        let n = s.level(l)?.n.to_u64().ok_or_else(|| invalid("n", "exceeds 64 bits"))?;
        let f = f_l_simple(s, l, tower::tower_epsilon(n)?)?;
        let mut level: Vec<(f64, f64)> = f.atoms().to_vec();
        level.push((0.0, 1.0 - f.total_mass()));
        let mut next = Vec::with_capacity(cells.len() * level.len());
        for &(a, ma) in &cells {
            for &(b, mb) in &level {
                next.push((a + b, ma * mb));
            }
        }
        cells = SimpleFunction::from_cells(&next)?.atoms().to_vec();
    }
    SimpleFunction::from_cells(&cells)
}

/// `κ'_p = κ_p (1 + 2^{1/p})`.
pub fn kappa_prime(p: f64) -> Result<f64> {
    Ok(kappa_p(p)? * (1.0 + 2f64.powf(1.0 / p)))
}

/// `L^p ||main part||^p_{p,∞}` in exact arithmetic with floor mass `1/n`:
/// the breakpoint maximum of `(n/2^{I+j}) Σ_{i≤j} 2^{I+i}/n`.
pub fn main_part_weak_pow_exact(lv: &LevelParams) -> Option<BigRational> {
    let j = lv.j_u64()?;
    let mut best: Option<BigRational> = None;
    let mut mass = BigRational::from_integer(BigInt::from(0));
    for a in 0..j {
        mass += BigRational::from_integer(BigInt::one() << (lv.i + a));
        let height = BigRational::new(BigInt::one(), BigInt::one() << (lv.i + a));
        let v = &height * &mass;
        if best.as_ref().is_none_or(|b| &v > b) {
            best = Some(v);
        }
    }
    best
}

/// `max_j Σ_{i≤j} 2^{i-j} = 2 - 2^{1-J}` as an exact rational.
pub fn main_part_closed_form(j: u64) -> BigRational {
    let two = BigRational::from_integer(BigInt::from(2));
    two - BigRational::new(BigInt::from(2), BigInt::one() << j)
}

/// The deterministic bound on the lower levels' windowed statistic at
/// level `l`: `Σ_{i<l} (k_l/L_i)(n_i/2^{I_i})^{1/p} / n_l^{1/p}`.
pub fn lower_levels_bound(s: &Schedule, l: usize) -> Result<f64> {
    let lv = s.level(l)?;
    let k = lv.k_u64().ok_or_else(|| invalid("k", "exceeds 64 bits"))? as f64;
    let n = lv.n.to_u64().ok_or_else(|| invalid("n", "exceeds 64 bits"))? as f64;
    let mut sum = 0.0;
    for pv in &s.levels[..l - 1] {
        let ni = pv.n.to_u64().ok_or_else(|| invalid("n", "exceeds 64 bits"))? as f64;
        sum += k / pv.big_l * (ni / (1u64 << pv.i) as f64).powf(1.0 / s.p);
    }
    Ok(sum / n.powf(1.0 / s.p))
}

/// `2 n_l Σ_{i>l} k_i/n_i` over the prefix.
pub fn upper_levels_rate(s: &Schedule, l: usize) -> Result<f64> {
    let lv = s.level(l)?;
    let n = lv.n.to_u64().ok_or_else(|| invalid("n", "exceeds 64 bits"))? as f64;
    let mut sum = 0.0;
    for pv in &s.levels[l..] {
        let k = pv.k_u64().ok_or_else(|| invalid("k", "exceeds 64 bits"))? as f64;
        let ni = pv.n.to_u64().ok_or_else(|| invalid("n", "exceeds 64 bits"))? as f64;
        sum += k / ni;
    }
    Ok(2.0 * n * sum)
}
