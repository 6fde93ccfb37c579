//! Parameter schedules `(L_l, J_l, I_l, n_l)` with `k_l = 2^{I_l + J_l}` and
//! their finite-prefix validation.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::error::{invalid, Error, Result};
use crate::stats::{ln_normal_two_sided, normal_two_sided};

use super::tower::{admissible_height, MIN_COVER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Faithful,
    Desk,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Faithful => "faithful",
            Mode::Desk => "desk",
        }
    }
}

/// A positive integer, either explicit or as a power of two with an
/// arbitrary-precision exponent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Magnitude {
    Exact(BigUint),
    Pow2(BigUint),
}

/// Bit budget above which a power of two is not expanded.
const EXPAND_BITS: u64 = 1 << 16;

impl Magnitude {
    pub fn from_u64(v: u64) -> Self {
        Magnitude::Exact(BigUint::from(v))
    }

    pub fn log2(&self) -> f64 {
        match self {
            Magnitude::Exact(v) => big_log2(v),
            Magnitude::Pow2(e) => big_to_f64(e),
        }
    }

    pub fn to_u64(&self) -> Option<u64> {
        match self {
            Magnitude::Exact(v) => v.to_u64(),
            Magnitude::Pow2(e) => e.to_u32().filter(|e| *e < 64).map(|e| 1u64 << e),
        }
    }

    pub fn to_biguint(&self) -> Option<BigUint> {
        match self {
            Magnitude::Exact(v) => Some(v.clone()),
            Magnitude::Pow2(e) => e.to_u64().filter(|e| *e <= EXPAND_BITS).map(|e| BigUint::one() << e),
        }
    }

    /// Exponent `E` with `self = 2^E`, if `self` is a power of two.
    pub fn pow2_exponent(&self) -> Option<BigUint> {
        match self {
            Magnitude::Pow2(e) => Some(e.clone()),
            Magnitude::Exact(v) => {
                if v.is_zero() || v.count_ones() != 1 {
                    None
                } else {
                    Some(BigUint::from(v.bits() - 1))
                }
            }
        }
    }
}

impl std::fmt::Display for Magnitude {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Magnitude::Exact(v) => write!(f, "{v}"),
            Magnitude::Pow2(e) => write!(f, "2^{e}"),
        }
    }
}

pub(crate) fn big_to_f64(v: &BigUint) -> f64 {
    v.to_f64().unwrap_or(f64::INFINITY)
}

pub(crate) fn big_log2(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 1000 {
        return big_to_f64(v).log2();
    }
    let shift = bits - 64;
    big_to_f64(&(v >> shift)).log2() + shift as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelParams {
    pub big_l: f64,
    pub j: BigUint,
    pub i: u64,
    pub n: Magnitude,
}

impl LevelParams {
    /// `I_l + J_l`, the exponent of `k_l`.
    pub fn k_exponent(&self) -> BigUint {
        &self.j + BigUint::from(self.i)
    }

    pub fn k(&self) -> Magnitude {
        Magnitude::Pow2(self.k_exponent())
    }

    pub fn k_u64(&self) -> Option<u64> {
        self.k().to_u64()
    }

    pub fn j_u64(&self) -> Option<u64> {
        self.j.to_u64()
    }

    pub fn n_u64(&self) -> Option<u64> {
        self.n.to_u64()
    }

    /// `log2(k_l / n_l)`.
    fn log2_k_over_n(&self) -> f64 {
        big_to_f64(&self.k_exponent()) - self.n.log2()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub p: f64,
    pub mode: Mode,
    /// Declared bound on `Σ 1/L_l` over the prefix.
    pub budget: f64,
    /// Declared bound on `n_l Σ_{i>l} k_i/n_i` over the prefix.
    pub tolerance: f64,
    pub levels: Vec<LevelParams>,
}

impl Schedule {
    pub fn level(&self, l: usize) -> Result<&LevelParams> {
        if l == 0 || l > self.levels.len() {
            return Err(invalid("level", format!("{l} is outside 1..={}", self.levels.len())));
        }
        Ok(&self.levels[l - 1])
    }

    pub fn alpha(&self) -> f64 {
        0.5 - 1.0 / self.p
    }
}

/// `J · P(|N| ≥ 4^{1/p} L)`, in the log domain for huge `J`.
pub fn signal_value(p: f64, lv: &LevelParams) -> f64 {
    let x = 4f64.powf(1.0 / p) * lv.big_l;
    (big_log2(&lv.j) * std::f64::consts::LN_2 + ln_normal_two_sided(x)).exp()
}

/// `J · 2^{-I/2}`.
pub fn clt_error_value(lv: &LevelParams) -> f64 {
    (big_log2(&lv.j) - lv.i as f64 / 2.0).exp2()
}

/// `n_l Σ_{i>l} k_i/n_i` over the prefix, for every `l`.
pub fn upper_mass_values(levels: &[LevelParams]) -> Vec<f64> {
    (0..levels.len())
        .map(|l| {
            let ln = levels[l].n.log2();
            levels[l + 1..].iter().map(|lv| (ln + lv.log2_k_over_n()).exp2()).sum()
        })
        .collect()
}

/// `k_{l,j-1}/(k_{l,j} - 1) ≤ 4` for every `j`; reduces to `I_l ≥ 1`.
pub fn annulus_ratio_ok(lv: &LevelParams) -> bool {
    lv.i >= 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exactness {
    Exact,
    Proxy,
    Limit,
    Numeric,
}

impl Exactness {
    pub fn as_str(&self) -> &'static str {
        match self {
            Exactness::Exact => "exact",
            Exactness::Proxy => "proxy",
            Exactness::Limit => "limit",
            Exactness::Numeric => "numeric",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionRow {
    pub condition: &'static str,
    pub level: usize,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    pub kind: Exactness,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub rows: Vec<ConditionRow>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConditionRow> {
        self.rows.iter().filter(|r| !r.pass)
    }
}

/// Per-condition report. Never fails; problems show up as rows with
/// `pass = false`.
pub fn validate_schedule(s: &Schedule) -> ValidationReport {
    let mut rows = Vec::new();
    let desk = s.mode == Mode::Desk;

    let mut partial = 0.0;
    for (idx, lv) in s.levels.iter().enumerate() {
        partial += 1.0 / lv.big_l;
        rows.push(ConditionRow {
            condition: "budget",
            level: idx + 1,
            value: partial,
            threshold: s.budget,
            pass: lv.big_l > 0.0 && partial <= s.budget,
            kind: Exactness::Numeric,
        });
    }

    for (idx, lv) in s.levels.iter().enumerate() {
        let v = signal_value(s.p, lv);
        rows.push(ConditionRow {
            condition: "signal",
            level: idx + 1,
            value: v,
            threshold: if desk { 0.5 } else { 1.0 },
            pass: if desk {
                v >= 0.5
            } else {
                (v - 1.0).abs() < 1e-6 || v >= 1.0
            },
            kind: if desk { Exactness::Proxy } else { Exactness::Limit },
        });
    }

    for (idx, lv) in s.levels.iter().enumerate() {
        let v = clt_error_value(lv);
        let threshold = if desk { f64::INFINITY } else { 1.0 / (idx + 1) as f64 };
        rows.push(ConditionRow {
            condition: "clt_error",
            level: idx + 1,
            value: v,
            threshold,
            pass: v <= threshold,
            kind: Exactness::Limit,
        });
    }

    for (idx, v) in upper_mass_values(&s.levels).into_iter().enumerate() {
        rows.push(ConditionRow {
            condition: "upper_mass",
            level: idx + 1,
            value: v,
            threshold: s.tolerance,
            pass: v <= s.tolerance,
            kind: Exactness::Numeric,
        });
    }

    for l in 1..=s.levels.len() {
        let (pass, value) = check_lower_dominance(s, l).unwrap_or((false, f64::NAN));
        rows.push(ConditionRow {
            condition: "lower_dominance",
            level: l,
            value,
            threshold: 0.5,
            pass,
            kind: Exactness::Exact,
        });
    }

    for (idx, lv) in s.levels.iter().enumerate() {
        let mut ok = idx == 0 || lv.i > s.levels[idx - 1].i;
        ok &= lv.i >= 1 && !lv.j.is_zero() && lv.big_l > 0.0;
        rows.push(ConditionRow {
            condition: "monotone",
            level: idx + 1,
            value: lv.i as f64,
            threshold: 1.0,
            pass: ok,
            kind: Exactness::Exact,
        });
        rows.push(ConditionRow {
            condition: "annulus_ratio",
            level: idx + 1,
            value: 2.0 / (1.0 - (-(lv.i as f64)).exp2()),
            threshold: 4.0,
            pass: annulus_ratio_ok(lv),
            kind: Exactness::Exact,
        });
    }
    ValidationReport { rows }
}

/// Splits a finite positive `f64` into a reduced fraction `a/b`.
fn dyadic_fraction(p: f64) -> Option<(BigUint, BigUint)> {
    if !(p.is_finite() && p > 0.0) {
        return None;
    }
    let bits = p.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let mant = if exp == 0 {
        (bits & ((1 << 52) - 1)) << 1
    } else {
        (bits & ((1 << 52) - 1)) | (1 << 52)
    };
    let e = exp - 1075;
    let (mut a, mut b) = if e >= 0 {
        (BigUint::from(mant) << e as u64, BigUint::one())
    } else {
        (BigUint::from(mant), BigUint::one() << (-e) as u64)
    };
    let g = num_integer::Integer::gcd(&a, &b);
    a /= &g;
    b /= &g;
    Some((a, b))
}

fn f64_to_rational(v: f64) -> Option<BigRational> {
    let (a, b) = dyadic_fraction(v)?;
    Some(BigRational::new(BigInt::from(a), BigInt::from(b)))
}

/// Bounds `lo ≤ x^{1/a} ≤ hi` for a positive rational `x`, at `prec` bits.
fn root_bounds(x: &BigRational, a: u32, prec: u64) -> (BigRational, BigRational) {
    let num = x.numer().to_biguint().expect("positive");
    let den = x.denom().to_biguint().expect("positive");
    let scaled = (num << (a as u64 * prec)) / den;
    let r = scaled.nth_root(a);
    let scale = BigInt::one() << prec;
    let lo = BigRational::new(BigInt::from(r.clone()), scale.clone());
    let hi = BigRational::new(BigInt::from(r + 1u32), scale);
    (lo, hi)
}

fn pow_rational(x: &BigRational, e: u32) -> BigRational {
    let mut out = BigRational::one();
    for _ in 0..e {
        out *= x;
    }
    out
}

/// `p = a/b` with small `a, b`, so `x^{1/p} = (x^b)^{1/a}` can be bracketed
/// with integer roots.
fn small_exponent(p: f64) -> Option<(u32, u32)> {
    let (a, b) = dyadic_fraction(p)?;
    Some((a.to_u32().filter(|v| *v <= 64)?, b.to_u32().filter(|v| *v <= 64)?))
}

/// Exact check of `Σ_{i<l} (k_l/L_i)(n_i/2^{I_i})^{1/p} < n_l^{1/p}/2`.
/// Returns the verdict and the ratio `LHS / n_l^{1/p}` in floating point.
pub fn check_lower_dominance(s: &Schedule, l: usize) -> Result<(bool, f64)> {
    let lv = s.level(l)?;
    if l == 1 {
        return Ok((true, 0.0));
    }
    let prev = &s.levels[..l - 1];
    let approx = lower_dominance_ratio(s, l);

    let expanded: Option<Vec<BigUint>> = s.levels[..l].iter().map(|v| v.n.to_biguint()).collect();
    let k_small = lv.k().to_biguint();
    if let (Some(ns), Some(k), Some((a, b))) = (expanded, k_small, small_exponent(s.p)) {
        if let Some(verdict) = exact_lower_dominance(prev, &ns, &k, &lv.n, a, b) {
            return Ok((verdict, approx));
        }
    }
    // Powers of two: with L_i ≥ 1 the sum is at most
    // (l-1) 2^{K_l + max_i (E_i - I_i)/p}, so
    // p (⌈log2(l-1)⌉ + K_l + 1) + max_i (E_i - I_i) < E_l suffices.
    let exps: Option<Vec<BigUint>> = s.levels[..l].iter().map(|v| v.n.pow2_exponent()).collect();
    let (Some(exps), Some((pa, pb))) = (exps, dyadic_fraction(s.p)) else {
        return Err(Error::Unsupported(
            "lower dominance needs expandable magnitudes or powers of two".into(),
        ));
    };
    if prev.iter().any(|v| v.big_l < 1.0) {
        return Ok((false, approx));
    }
    let ceil_log = BigUint::from(ceil_log2((l - 1) as u64));
    let lhs_int = ceil_log + lv.k_exponent() + BigUint::one();
    let mut max_gap = BigInt::zero();
    for (pv, e) in prev.iter().zip(&exps) {
        let g = BigInt::from(e.clone()) - BigInt::from(pv.i);
        if g > max_gap {
            max_gap = g;
        }
    }
    // p·X + G < E  ⇔  a·X + b·G < b·E  with p = a/b.
    let lhs = BigInt::from(&pa * lhs_int) + BigInt::from(pb.clone()) * max_gap;
    let rhs = BigInt::from(&pb * &exps[l - 1]);
    Ok((lhs < rhs, approx))
}

/// `LHS / n_l^{1/p}` in floating point. With powers of two and a dyadic
/// `p = a/b` every term is `2^{(aK_l + b(E_i - I_i) - bE_l)/a}/L_i`, the
/// exponent formed in integers so huge heights do not cancel.
fn lower_dominance_ratio(s: &Schedule, l: usize) -> f64 {
    let lv = &s.levels[l - 1];
    let prev = &s.levels[..l - 1];
    let exps: Option<Vec<BigUint>> = s.levels[..l].iter().map(|v| v.n.pow2_exponent()).collect();
    if let (Some(exps), Some((a, b))) = (exps, dyadic_fraction(s.p)) {
        let (a, b) = (BigInt::from(a), BigInt::from(b));
        let base = &a * BigInt::from(lv.k_exponent()) - &b * BigInt::from(exps[l - 1].clone());
        let af = a.to_f64().unwrap_or(1.0);
        return prev
            .iter()
            .zip(&exps)
            .map(|(pv, e)| {
                let num = &base + &b * (BigInt::from(e.clone()) - BigInt::from(pv.i));
                let x = num.to_f64().unwrap_or(f64::NEG_INFINITY) / af;
                x.exp2() / pv.big_l
            })
            .sum();
    }
    let log_rhs = lv.n.log2() / s.p;
    let k_log = big_to_f64(&lv.k_exponent());
    prev.iter()
        .map(|pv| (k_log + (pv.n.log2() - pv.i as f64) / s.p - log_rhs).exp2() / pv.big_l)
        .sum()
}

fn exact_lower_dominance(
    prev: &[LevelParams],
    ns: &[BigUint],
    k: &BigUint,
    n_l: &Magnitude,
    a: u32,
    b: u32,
) -> Option<bool> {
    let n_l = n_l.to_biguint()?;
    let kr = BigRational::from_integer(BigInt::from(k.clone()));
    for prec in [64u64, 256, 1024] {
        let mut upper = BigRational::zero();
        let mut lower = BigRational::zero();
        for (pv, n) in prev.iter().zip(ns) {
            let x = BigRational::new(BigInt::from(n.clone()), BigInt::one() << pv.i);
            let (lo, hi) = root_bounds(&pow_rational(&x, b), a, prec);
            let coef = &kr / f64_to_rational(pv.big_l)?;
            upper += &coef * hi;
            lower += &coef * lo;
        }
        let nr = BigRational::from_integer(BigInt::from(n_l.clone()));
        let (rlo, rhi) = root_bounds(&pow_rational(&nr, b), a, prec);
        let two = BigRational::from_integer(BigInt::from(2));
        if upper < &rlo / &two {
            return Some(true);
        }
        if lower >= &rhi / &two {
            return Some(false);
        }
    }
    None
}

fn ceil_log2(v: u64) -> u64 {
    if v <= 1 {
        0
    } else {
        64 - (v - 1).leading_zeros() as u64
    }
}

fn ceil_log2_big(v: &BigUint) -> u64 {
    if v <= &BigUint::one() {
        0
    } else {
        (v - 1u32).bits()
    }
}

/// `⌈1/P(|N| ≥ 4^{1/p} L)⌉`, so that `J · P(|N| ≥ 4^{1/p} L)` is within
/// one part in `2^52` of 1 from above.
fn calibrate_j(p: f64, big_l: f64) -> BigUint {
    let x = 4f64.powf(1.0 / p) * big_l;
    let y = -ln_normal_two_sided(x) / std::f64::consts::LN_2;
    if y < 60.0 {
        return BigUint::from((1.0 / normal_two_sided(x)).ceil() as u64);
    }
    let whole = y.floor();
    let mant = (((y - whole).exp2()) * (1u64 << 52) as f64).ceil() as u64;
    BigUint::from(mant) << (whole as u64 - 52)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeskOptions {
    pub budget: f64,
    pub tolerance: f64,
    pub n_max: u64,
    pub l_grid: Vec<f64>,
    pub j_max: u64,
    /// Schedules whose weakest [`base_signal`] reaches this are preferred.
    pub signal_floor: f64,
}

impl Default for DeskOptions {
    fn default() -> Self {
        Self {
            budget: 8.0,
            tolerance: 0.125,
            n_max: 1_000_000,
            l_grid: vec![0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0],
            j_max: 4,
            signal_floor: 0.1,
        }
    }
}

pub fn build_schedule(p: f64, mode: Mode, prefix: usize) -> Result<Schedule> {
    match mode {
        Mode::Faithful => build_faithful(p, prefix),
        Mode::Desk => build_desk(p, prefix, &DeskOptions::default()),
    }
}

/// Follows the recipe: `L_l = l²`, `J_l` calibrated on the Gaussian tail,
/// `I_l` large enough that `J_l 2^{-I_l/2} ≤ 1/(2l)`, and `n_l = 2^{E_l}` with
/// `n_l ≥ l² k_l n_{l-1}` and the integer sufficient form of the lower dominance condition.
pub fn build_faithful(p: f64, prefix: usize) -> Result<Schedule> {
    check_p(p)?;
    if prefix == 0 {
        return Err(invalid("prefix", "need at least one level"));
    }
    let (pa, pb) = dyadic_fraction(p).ok_or_else(|| invalid("p", "not finite"))?;
    let mut levels: Vec<LevelParams> = Vec::with_capacity(prefix);
    let mut exps: Vec<BigUint> = Vec::new();
    for l in 1..=prefix as u64 {
        let big_l = (l * l) as f64;
        let j = calibrate_j(p, big_l);
        let floor_i = 2 * ceil_log2_big(&j) + 2 * ceil_log2(l) + 2;
        let i = match levels.last() {
            Some(prev) => floor_i.max(prev.i + 1),
            None => floor_i.max(1),
        };
        let k_exp = &j + BigUint::from(i);
        // n_l ≥ 4 k_l and n_l ≥ l² k_l n_{l-1}.
        let mut e = &k_exp + 2u32;
        if let Some(prev) = exps.last() {
            let growth = &k_exp + prev + BigUint::from(ceil_log2(l * l));
            if growth > e {
                e = growth;
            }
        }
        if l >= 2 {
            // Smallest E with b·E > a·X + b·G (see `check_lower_dominance`).
            let x = BigUint::from(ceil_log2(l - 1)) + &k_exp + 1u32;
            let mut g = BigInt::zero();
            for (pv, ei) in levels.iter().zip(&exps) {
                let gi = BigInt::from(ei.clone()) - BigInt::from(pv.i);
                if gi > g {
                    g = gi;
                }
            }
            let target = BigInt::from(&pa * x) + BigInt::from(pb.clone()) * g;
            let bb = BigInt::from(pb.clone());
            let need: BigInt = (target / &bb) + 1;
            let need = need.to_biguint().unwrap_or_default();
            if need > e {
                e = need;
            }
        }
        exps.push(e.clone());
        levels.push(LevelParams {
            big_l,
            j,
            i,
            n: Magnitude::Pow2(e),
        });
    }
    let budget = std::f64::consts::PI * std::f64::consts::PI / 6.0;
    Ok(Schedule {
        p,
        mode: Mode::Faithful,
        budget,
        tolerance: 1.0,
        levels,
    })
}

fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p > 2.0 {
        Ok(())
    } else {
        Err(invalid("p", format!("must exceed 2, got {p}")))
    }
}

/// `P(|S_m| ≥ x)` for a sum of `m` Rademacher variables.
pub fn rademacher_two_sided(m: u64, x: f64) -> f64 {
    if m == 0 {
        return if x <= 0.0 { 1.0 } else { 0.0 };
    }
    // S = 2B - m; |S| ≥ x ⇔ B ≤ (m - x)/2 or B ≥ (m + x)/2.
    let mf = m as f64;
    let lo = ((mf - x) / 2.0 + 1e-9).floor();
    let hi = ((mf + x) / 2.0 - 1e-9).ceil().max(0.0);
    if m <= EXACT_BINOMIAL_MAX {
        // Exact counts over 2^m.
        let mut count = BigUint::zero();
        let mut c = BigUint::one();
        for b in 0..=m {
            let bf = b as f64;
            if bf <= lo || bf >= hi {
                count += &c;
            }
            c = c * BigUint::from(m - b) / BigUint::from(b + 1);
        }
        let r = BigRational::new(BigInt::from(count), BigInt::one() << m);
        return r.to_f64().unwrap_or(0.0).min(1.0);
    }
    let bin = Binomial::new(0.5, m).expect("valid binomial");
    let below = if lo >= 0.0 { bin.cdf(lo as u64) } else { 0.0 };
    let above = if hi <= mf {
        if hi <= 0.0 {
            1.0
        } else {
            bin.sf(hi as u64 - 1)
        }
    } else {
        0.0
    };
    (below + above).min(1.0)
}

/// Binomial tails up to this many trials are summed exactly.
const EXACT_BINOMIAL_MAX: u64 = 4096;

/// Exact `μ(E_j)` and `c_j` for `j = 1..=J` with Rademacher `g`.
pub fn annulus_events(p: f64, lv: &LevelParams) -> Option<Vec<(f64, f64)>> {
    let jj = lv.j_u64()?;
    let mut out = Vec::with_capacity(jj as usize);
    for j in 1..=jj {
        let kj = 1u64.checked_shl((lv.i + jj - j) as u32)?;
        let kjm = 2 * kj;
        let m = kj - 1;
        let ratio = (kjm as f64 / m as f64).powf(1.0 / p);
        let thr = lv.big_l * ratio * (m as f64).sqrt();
        let mu = rademacher_two_sided(m, thr);
        let c = normal_two_sided(lv.big_l * ratio);
        out.push((mu, c));
    }
    Some(out)
}

/// Whether `|μ(E_j) - c_j| ≤ (k_{l,j-1} - 1)^{-1/2}` holds for every `j`.
pub fn berry_esseen_ok(p: f64, lv: &LevelParams) -> Option<bool> {
    let ev = annulus_events(p, lv)?;
    let jj = lv.j_u64()?;
    Some(ev.iter().enumerate().all(|(idx, (mu, c))| {
        let j = idx as u64 + 1;
        let kjm = 1u64 << (lv.i + jj - j + 1);
        (mu - c).abs() <= 1.0 / ((kjm - 1) as f64).sqrt()
    }))
}

/// Probability that a single run through the base block `[0, 2^{I+1})` of
/// `g f_l` pushes the windowed statistic to 1/2: the best window length `v`
/// for `P(|S_v(g)| ≥ 2^{I/p} L v^α / 2)`.
pub fn base_signal(p: f64, i: u64, big_l: f64) -> f64 {
    let alpha = 0.5 - 1.0 / p;
    let scale = 0.5 * (i as f64 / p).exp2() * big_l;
    (1..=(2u64 << i))
        .map(|v| rademacher_two_sided(v, scale * (v as f64).powf(alpha)))
        .fold(0.0, f64::max)
}

/// Desk schedule search.
///
/// Hard constraints: the budget, the upper mass tolerance, lower dominance exactly,
/// `n_l ≥ 4 k_l`, increasing `I_l = l` and `n_l`, a Rokhlin base covering
/// more than half of the circle, and the per-annulus Berry–Esseen estimate
/// holding exactly. Objective: the number of levels meeting the signal proxy
/// (the top level must), then whether every level reaches the declared
/// [`base_signal`] floor, then the smallest top height.
pub fn build_desk(p: f64, prefix: usize, opts: &DeskOptions) -> Result<Schedule> {
    check_p(p)?;
    if prefix == 0 {
        return Err(invalid("prefix", "need at least one level"));
    }
    let mut choices: Vec<(f64, u64)> = Vec::new();
    for &big_l in &opts.l_grid {
        for j in 1..=opts.j_max {
            choices.push((big_l, j));
        }
    }
    let proxy = |big_l: f64, j: u64| j as f64 * normal_two_sided(4f64.powf(1.0 / p) * big_l) >= 0.5;
    let rhos = [0.5, 0.7, 0.8, 0.9, 0.95, 0.98, 0.99];

    struct Cand {
        score: (usize, bool, u64, i64, u64),
        params: Vec<(f64, u64)>,
        ns: Vec<u64>,
    }
    let mut cands: Vec<Cand> = Vec::new();
    let total = choices.len().pow(prefix as u32);
    if total > 5_000_000 {
        return Err(Error::Budget(format!("desk search over {total} combinations")));
    }
    // Berry–Esseen per (level, choice); it depends on I_l = l, L and J only.
    let be_ok: Vec<Vec<bool>> = (0..prefix)
        .map(|lvl| {
            choices
                .iter()
                .map(|&(big_l, j)| {
                    let lv = LevelParams {
                        big_l,
                        j: BigUint::from(j),
                        i: lvl as u64 + 1,
                        n: Magnitude::from_u64(1),
                    };
                    berry_esseen_ok(p, &lv).unwrap_or(false)
                })
                .collect()
        })
        .collect();
    let signal: Vec<Vec<f64>> = (0..prefix)
        .map(|lvl| {
            choices
                .iter()
                .map(|&(big_l, _)| base_signal(p, lvl as u64 + 1, big_l))
                .collect()
        })
        .collect();
    let mut idx = vec![0usize; prefix];
    for _ in 0..total {
        let idx_prev = idx.clone();
        let params: Vec<(f64, u64)> = idx.iter().map(|&c| choices[c]).collect();
        // Advance the odometer.
        for d in (0..prefix).rev() {
            idx[d] += 1;
            if idx[d] < choices.len() {
                break;
            }
            idx[d] = 0;
        }
        let (top_l, top_j) = params[prefix - 1];
        if !proxy(top_l, top_j) {
            continue;
        }
        let inv_sum: f64 = params.iter().map(|(l, _)| 1.0 / l).sum();
        if inv_sum > opts.budget {
            continue;
        }
        if !params.iter().enumerate().all(|(lvl, _)| be_ok[lvl][idx_prev[lvl]]) {
            continue;
        }
        let proxies = params.iter().filter(|(l, j)| proxy(*l, *j)).count();
        let mut best_ns: Option<Vec<u64>> = None;
        for &rho in &rhos {
            if let Some(ns) = desk_heights(p, &params, opts, rho) {
                if best_ns.as_ref().is_none_or(|b| ns[prefix - 1] < b[prefix - 1]) {
                    best_ns = Some(ns);
                }
            }
        }
        if let Some(ns) = best_ns {
            let weakest = params
                .iter()
                .enumerate()
                .map(|(lvl, _)| signal[lvl][idx_prev[lvl]])
                .fold(f64::INFINITY, f64::min);
            let score = (
                prefix - proxies,
                weakest < opts.signal_floor,
                ns[prefix - 1],
                -((weakest * 1e6).floor() as i64),
                (inv_sum * 1e6).round() as u64,
            );
            cands.push(Cand { score, params, ns });
        }
    }
    cands.sort_by_key(|c| c.score);
    for c in cands {
        let levels: Vec<LevelParams> = c
            .params
            .iter()
            .zip(&c.ns)
            .enumerate()
            .map(|(lvl, (&(big_l, j), &n))| LevelParams {
                big_l,
                j: BigUint::from(j),
                i: lvl as u64 + 1,
                n: Magnitude::from_u64(n),
            })
            .collect();
        let s = Schedule {
            p,
            mode: Mode::Desk,
            budget: opts.budget,
            tolerance: opts.tolerance,
            levels,
        };
        let report = validate_schedule(&s);
        let hard_ok = report.rows.iter().all(|r| r.pass || r.condition == "signal");
        if hard_ok {
            return Ok(s);
        }
    }
    Err(Error::Infeasible(format!(
        "no desk schedule with {prefix} levels and n_l ≤ {} for p = {p}",
        opts.n_max
    )))
}

/// Smallest heights level by level. Earlier upper mass rows may use a fraction
/// `rho^{prefix-l}` of the tolerance at step `l`, leaving room for later
/// levels.
fn desk_heights(p: f64, params: &[(f64, u64)], opts: &DeskOptions, rho: f64) -> Option<Vec<u64>> {
    let prefix = params.len();
    let mut ns: Vec<u64> = Vec::with_capacity(prefix);
    let mut ks: Vec<u64> = Vec::with_capacity(prefix);
    for (lvl, &(_, j)) in params.iter().enumerate() {
        let i = lvl as u64 + 1;
        let k = 1u64 << (i + j);
        let mut n = 4 * k;
        if let Some(&prev) = ns.last() {
            n = n.max(prev + 1);
        }
        // Lower dominance in floating point with a small safety factor; verified
        // exactly afterwards.
        let lhs: f64 = (0..lvl)
            .map(|q| (k as f64 / params[q].0) * (ns[q] as f64 / (1u64 << (q + 1)) as f64).powf(1.0 / p))
            .sum();
        if lhs > 0.0 {
            let need = (2.0 * lhs * (1.0 + 1e-9)).powf(p).floor() as u64 + 1;
            n = n.max(need);
        }
        let share = opts.tolerance * rho.powi((prefix - 1 - lvl) as i32);
        for q in 0..lvl {
            let partial: f64 = (q + 1..lvl).map(|r| ks[r] as f64 / ns[r] as f64).sum();
            let room = share / ns[q] as f64 - partial;
            if room <= 0.0 {
                return None;
            }
            n = n.max((k as f64 / room).floor() as u64 + 1);
        }
        if n > opts.n_max {
            return None;
        }
        n = next_admissible(n, opts.n_max)?;
        ns.push(n);
        ks.push(k);
    }
    Some(ns)
}

fn next_admissible(mut n: u64, n_max: u64) -> Option<u64> {
    while n <= n_max {
        if admissible_height(n) {
            return Some(n);
        }
        n += 1;
    }
    None
}

/// Coverage a level's tower must exceed.
pub fn min_cover() -> f64 {
    MIN_COVER
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_fraction_of_p() {
        assert_eq!(small_exponent(3.0), Some((3, 1)));
        assert_eq!(small_exponent(2.5), Some((5, 2)));
        assert_eq!(small_exponent(4.0), Some((4, 1)));
    }

    #[test]
    fn root_bounds_bracket() {
        let x = BigRational::from_integer(BigInt::from(10));
        let (lo, hi) = root_bounds(&x, 3, 40);
        let lo = lo.to_f64().unwrap();
        let hi = hi.to_f64().unwrap();
        let t = 10f64.cbrt();
        assert!(lo <= t && t <= hi && hi - lo < 1e-11);
    }

    #[test]
    fn rademacher_tails() {
        assert!((rademacher_two_sided(1, 1.0) - 1.0).abs() < 1e-15);
        assert_eq!(rademacher_two_sided(1, 1.5), 0.0);
        assert_eq!(rademacher_two_sided(2, 1.0), 0.5);
        assert!((rademacher_two_sided(5000, 0.0) - 1.0).abs() < 1e-12);
        assert_eq!(rademacher_two_sided(3, 3.0), 0.25);
    }

    #[test]
    fn n_equal_to_previous_breaks_upper_mass() {
        let lv = |n: u64, i: u64| LevelParams {
            big_l: 1.0,
            j: BigUint::from(1u32),
            i,
            n: Magnitude::from_u64(n),
        };
        let s = Schedule {
            p: 3.0,
            mode: Mode::Desk,
            budget: 8.0,
            tolerance: 0.125,
            levels: vec![lv(64, 1), lv(64, 2)],
        };
        let r = validate_schedule(&s);
        let row = r
            .rows
            .iter()
            .find(|r| r.condition == "upper_mass" && r.level == 1)
            .unwrap();
        assert!(!row.pass);
        assert!(row.value >= 0.125);
    }
}
