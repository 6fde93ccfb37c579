//! Seeded stationary sequences: i.i.d. innovations, causal linear processes
//! and the tower martingale, with Hannan projections, the
//! martingale-coboundary split and truncation.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::counterexample::sim::{rademacher_stream, TowerSystem};
use crate::counterexample::{build_schedule, parse_schedule, Mode, Schedule};
use crate::error::{invalid, Error, Result};
use crate::stats::mean_se;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Innovation {
    Gaussian,
    Rademacher,
    /// Density proportional to `|x|^{-β-1}` beyond a cut-off. Symmetric
    /// draws are centred by symmetry; one-sided draws are centred by their
    /// mean when `β > 1`. Both have unit variance when `β > 2`.
    Pareto {
        beta: f64,
        symmetric: bool,
    },
}

impl Innovation {
    pub fn validate(&self) -> Result<()> {
        if let Innovation::Pareto { beta, .. } = self {
            if !(beta.is_finite() && *beta > 0.0) {
                return Err(invalid("beta", "must be positive and finite"));
            }
        }
        Ok(())
    }

    /// Cut-off `x_min` of `|X|` before centring.
    fn pareto_scale(beta: f64, symmetric: bool) -> f64 {
        if beta <= 2.0 {
            return 1.0;
        }
        if symmetric {
            // E X² = x_min² β/(β-2).
            ((beta - 2.0) / beta).sqrt()
        } else {
            // Var = x_min² β/((β-1)²(β-2)).
            (beta - 1.0) * ((beta - 2.0) / beta).sqrt()
        }
    }

    pub fn sample(&self, rng: &mut impl RngCore) -> f64 {
        match *self {
            Innovation::Gaussian => rng.sample(StandardNormal),
            Innovation::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Innovation::Pareto { beta, symmetric } => {
                let s = Self::pareto_scale(beta, symmetric);
                // 1 - U in (0, 1].
                let u = 1.0 - rng.random::<f64>();
                let r = s * u.powf(-1.0 / beta);
                if symmetric {
                    if rng.random::<bool>() {
                        r
                    } else {
                        -r
                    }
                } else if beta > 1.0 {
                    r - s * beta / (beta - 1.0)
                } else {
                    r
                }
            }
        }
    }

    pub fn fill(&self, rng: &mut impl RngCore, n: usize, out: &mut Vec<f64>) {
        out.clear();
        out.reserve(n);
        for _ in 0..n {
            out.push(self.sample(rng));
        }
    }

    /// `||ε||_p`, exact. Infinite when the moment does not exist.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(invalid("p", "need 1 ≤ p < ∞"));
        }
        match *self {
            Innovation::Gaussian => {
                let m = 2f64.powf(p / 2.0) * gamma((p + 1.0) / 2.0) / std::f64::consts::PI.sqrt();
                Ok(m.powf(1.0 / p))
            }
            Innovation::Rademacher => Ok(1.0),
            Innovation::Pareto { beta, symmetric: true } => {
                if p >= beta {
                    return Ok(f64::INFINITY);
                }
                let s = Self::pareto_scale(beta, true);
                Ok(s * (beta / (beta - p)).powf(1.0 / p))
            }
            Innovation::Pareto { symmetric: false, .. } => Err(Error::Unsupported(
                "Lp norm of a centred one-sided Pareto variable".into(),
            )),
        }
    }
}

/// Where the tower martingale takes its schedule from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScheduleRef {
    File { file: String },
    Built { p: f64, mode: Mode, levels: usize },
}

impl ScheduleRef {
    pub fn resolve(&self) -> Result<Schedule> {
        match self {
            ScheduleRef::File { file } => {
                let text = std::fs::read_to_string(file).map_err(|e| Error::Io(format!("{file}: {e}")))?;
                parse_schedule(&text)
            }
            ScheduleRef::Built { p, mode, levels } => build_schedule(*p, *mode, *levels),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    /// `m ≡ 0`.
    Zero,
    IidGaussian,
    IidRademacher,
    IidPareto {
        beta: f64,
        #[serde(default = "yes")]
        symmetric: bool,
    },
    /// `x_t = Σ_k a_k ε_{t-k}`.
    LinearProcess {
        coeffs: Vec<f64>,
        innovation: Innovation,
    },
    /// `g_t Σ_l f_l ∘ T^t` over the active levels (all when empty).
    GfMartingale {
        schedule: ScheduleRef,
        #[serde(default)]
        levels: Vec<usize>,
    },
    /// The tower martingale cut at `|m| ≤ R`.
    BoundedMartingale {
        schedule: ScheduleRef,
        #[serde(default)]
        levels: Vec<usize>,
        truncation: f64,
    },
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub kind: GeneratorKind,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub values: Vec<f64>,
    pub spec: GeneratorSpec,
    pub n: usize,
}

/// A spec with its expensive parts (towers) built once.
#[derive(Debug, Clone)]
pub struct Generator {
    spec: GeneratorSpec,
    towers: Option<(TowerSystem, Vec<usize>)>,
}

impl Generator {
    pub fn new(spec: &GeneratorSpec) -> Result<Self> {
        let towers = match &spec.kind {
            GeneratorKind::Zero | GeneratorKind::IidGaussian | GeneratorKind::IidRademacher => None,
            GeneratorKind::IidPareto { beta, symmetric } => {
                Innovation::Pareto {
                    beta: *beta,
                    symmetric: *symmetric,
                }
                .validate()?;
                None
            }
            GeneratorKind::LinearProcess { coeffs, innovation } => {
                innovation.validate()?;
                if coeffs.is_empty() {
                    return Err(invalid("coeffs", "need at least a_0"));
                }
                if coeffs.iter().any(|a| !a.is_finite()) {
                    return Err(invalid("coeffs", "must be finite"));
                }
                None
            }
            GeneratorKind::GfMartingale { schedule, levels }
            | GeneratorKind::BoundedMartingale { schedule, levels, .. } => {
                if let GeneratorKind::BoundedMartingale { truncation, .. } = &spec.kind {
                    if truncation.is_nan() || *truncation <= 0.0 {
                        return Err(invalid("truncation", "must be positive"));
                    }
                }
                let s = schedule.resolve()?;
                let active = if levels.is_empty() {
                    (1..=s.levels.len()).collect()
                } else {
                    levels.clone()
                };
                for &l in &active {
                    s.level(l)?;
                }
                Some((TowerSystem::new(&s)?, active))
            }
        };
        Ok(Self {
            spec: spec.clone(),
            towers,
        })
    }

    pub fn spec(&self) -> &GeneratorSpec {
        &self.spec
    }

    /// `n` values from `rng`.
    pub fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(invalid("n", "must be at least 1"));
        }
        let mut out = Vec::new();
        match &self.spec.kind {
            GeneratorKind::Zero => out = vec![0.0; n],
            GeneratorKind::IidGaussian => Innovation::Gaussian.fill(rng, n, &mut out),
            GeneratorKind::IidRademacher => Innovation::Rademacher.fill(rng, n, &mut out),
            GeneratorKind::IidPareto { beta, symmetric } => Innovation::Pareto {
                beta: *beta,
                symmetric: *symmetric,
            }
            .fill(rng, n, &mut out),
            GeneratorKind::LinearProcess { coeffs, innovation } => {
                let burn = coeffs.len() - 1;
                let mut eps = Vec::new();
                innovation.fill(rng, burn + n, &mut eps);
                out = linear_filter(coeffs, &eps, n);
            }
            GeneratorKind::GfMartingale { .. } => out = self.gf_sample(n, rng)?.m(),
            GeneratorKind::BoundedMartingale { truncation, .. } => {
                out = self.gf_sample(n, rng)?.m();
                for v in &mut out {
                    if v.abs() > *truncation {
                        *v = 0.0;
                    }
                }
            }
        }
        Ok(out)
    }

    /// The tower martingale with its two factors kept apart.
    pub fn gf_sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<GfSample> {
        let (sys, active) = self
            .towers
            .as_ref()
            .ok_or_else(|| Error::Unsupported("generator has no tower structure".into()))?;
        let x0: Vec<f64> = (0..sys.towers.len()).map(|_| rng.random::<f64>()).collect();
        let mut g = Vec::new();
        rademacher_stream(rng, n, &mut g);
        let mut f = vec![0.0; n];
        let mut bases = Vec::new();
        for &l in active {
            sys.add_level(l - 1, x0[l - 1], &mut f, &mut bases);
        }
        Ok(GfSample { f, g })
    }

    /// A martingale path with its conditional variances `E[m_t² | past]`.
    pub fn martingale_sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<(Vec<f64>, Vec<f64>)> {
        match &self.spec.kind {
            GeneratorKind::Zero => Ok((vec![0.0; n], vec![0.0; n])),
            GeneratorKind::IidGaussian | GeneratorKind::IidRademacher => {
                let m = self.sample(n, rng)?;
                Ok((m, vec![1.0; n]))
            }
            GeneratorKind::IidPareto { beta, symmetric: true } if *beta > 2.0 => {
                let m = self.sample(n, rng)?;
                Ok((m, vec![1.0; n]))
            }
            GeneratorKind::GfMartingale { .. } => {
                let s = self.gf_sample(n, rng)?;
                let v = s.f.iter().map(|f| f * f).collect();
                Ok((s.m(), v))
            }
            GeneratorKind::BoundedMartingale { truncation, .. } => {
                let s = self.gf_sample(n, rng)?;
                let r = *truncation;
                let cut = |x: f64| if x.abs() <= r { x } else { 0.0 };
                let v = s.f.iter().map(|&f| cut(f).powi(2)).collect();
                let m = s.m().into_iter().map(cut).collect();
                Ok((m, v))
            }
            _ => Err(Error::Unsupported(
                "conditional variance is only available for martingale generators with finite variance".into(),
            )),
        }
    }

    pub fn path(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<SamplePath> {
        Ok(SamplePath {
            values: self.sample(n, rng)?,
            spec: self.spec.clone(),
            n,
        })
    }
}

/// `x_t = Σ_k a_k eps[burn + t - k]` for `t < n`, with `burn = len(a) - 1`.
pub fn linear_filter(coeffs: &[f64], eps: &[f64], n: usize) -> Vec<f64> {
    let burn = coeffs.len() - 1;
    (0..n)
        .map(|t| coeffs.iter().enumerate().map(|(k, a)| a * eps[burn + t - k]).sum())
        .collect()
}

/// One path from the spec's own seed.
pub fn generate(spec: &GeneratorSpec, n: usize) -> Result<SamplePath> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    Generator::new(spec)?.path(n, &mut rng)
}

/// `m_t = g_t f_t`, with `f` measurable with respect to the past and `g`
/// an independent sign.
#[derive(Debug, Clone, PartialEq)]
pub struct GfSample {
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

impl GfSample {
    pub fn m(&self) -> Vec<f64> {
        self.f.iter().zip(&self.g).map(|(f, g)| f * g).collect()
    }

    /// `E[m χ{|m| ≤ R} | past]` at each time, averaging over both signs of
    /// the independent factor.
    pub fn conditional_truncated_mean(&self, r: f64) -> Vec<f64> {
        self.f
            .iter()
            .map(|&f| {
                let keep = |m: f64| if m.abs() <= r { m } else { 0.0 };
                0.5 * (keep(f) + keep(-f))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    /// `m χ{|m| ≤ R} - E[m χ{|m| ≤ R} | past]`.
    pub bounded: Vec<f64>,
    /// `m - bounded`.
    pub rest: Vec<f64>,
}

pub fn truncate_martingale(sample: &GfSample, r: f64) -> Result<Truncation> {
    if r.is_nan() || r <= 0.0 {
        return Err(invalid("R", "must be positive"));
    }
    let cond = sample.conditional_truncated_mean(r);
    let m = sample.m();
    let bounded: Vec<f64> = m
        .iter()
        .zip(&cond)
        .map(|(&v, c)| if v.abs() <= r { v - c } else { -c })
        .collect();
    let rest = m.iter().zip(&bounded).map(|(a, b)| a - b).collect();
    Ok(Truncation { bounded, rest })
}

/// Mean of `S_n²/n` over the paths and its standard error.
pub fn eta_estimate(paths: &[SamplePath]) -> Result<(f64, f64)> {
    if paths.is_empty() {
        return Err(Error::EmptyInput("paths"));
    }
    let v: Vec<f64> = paths
        .iter()
        .map(|p| {
            let s: f64 = p.values.iter().sum();
            s * s / p.values.len() as f64
        })
        .collect();
    Ok(mean_se(&v))
}

/// Coefficients `a_i`, either listed or in closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Coefficients {
    Finite {
        values: Vec<f64>,
    },
    /// `scale · ratio^i`.
    Geometric {
        scale: f64,
        ratio: f64,
    },
    /// `scale / (i+1)^exponent`.
    Power {
        scale: f64,
        exponent: f64,
    },
}

impl Coefficients {
    pub fn get(&self, i: usize) -> f64 {
        match self {
            Coefficients::Finite { values } => values.get(i).copied().unwrap_or(0.0),
            Coefficients::Geometric { scale, ratio } => scale * ratio.powi(i as i32),
            Coefficients::Power { scale, exponent } => scale / ((i + 1) as f64).powf(*exponent),
        }
    }

    /// `Σ_{i>K} |a_i|`, infinite when it diverges.
    pub fn abs_tail(&self, k: usize) -> f64 {
        match self {
            Coefficients::Finite { values } => values.iter().skip(k + 1).map(|a| a.abs()).sum(),
            Coefficients::Geometric { scale, ratio } => {
                let r = ratio.abs();
                if r >= 1.0 {
                    if *scale == 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    scale.abs() * r.powi(k as i32 + 1) / (1.0 - r)
                }
            }
            Coefficients::Power { scale, exponent } => {
                if *scale == 0.0 {
                    0.0
                } else if *exponent <= 1.0 {
                    f64::INFINITY
                } else {
                    scale.abs() * zeta_tail(*exponent, k as f64 + 2.0)
                }
            }
        }
    }
}

/// `Σ_{m ≥ M} m^{-s}` for `s > 1`: direct terms up to `M + 64`, then
/// Euler–Maclaurin.
fn zeta_tail(s: f64, m0: f64) -> f64 {
    let mut sum = 0.0;
    let mut m = m0;
    for _ in 0..64 {
        sum += m.powf(-s);
        m += 1.0;
    }
    sum + m.powf(1.0 - s) / (s - 1.0) + 0.5 * m.powf(-s) + s * m.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * m.powf(-s - 3.0) / 720.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct HannanReport {
    /// `||P_i(f)||_p` for `i < terms`.
    pub projections: Vec<f64>,
    /// `Σ_{i>K} ||P_i(f)||_p` for `K < terms`.
    pub tail_sums: Vec<f64>,
    pub summable: bool,
}

/// `||P_i(f)||_p = |a_i| ||ε_0||_p` for a causal linear process.
pub fn hannan_projections(a: &Coefficients, innovation_norm: f64, terms: usize) -> Result<HannanReport> {
    if !(innovation_norm.is_finite() && innovation_norm >= 0.0) {
        return Err(invalid("innovation_norm", "must be finite and non-negative"));
    }
    let projections = (0..terms).map(|i| a.get(i).abs() * innovation_norm).collect();
    let tail_sums: Vec<f64> = (0..terms).map(|k| a.abs_tail(k) * innovation_norm).collect();
    let summable = a.abs_tail(0).is_finite();
    Ok(HannanReport {
        projections,
        tail_sums,
        summable,
    })
}

/// `f_K = A ε_0 + g - g ∘ T` for `f_K = Σ_{i≤K} a_i ε_{-i}`, with
/// `A = Σ_{i≤K} a_i` and `g = Σ_{j<K} b_j ε_{-1-j}`, `b_j = Σ_{j<i≤K} a_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoboundarySplit {
    pub k: usize,
    pub martingale_coeff: f64,
    pub g_coeffs: Vec<f64>,
}

pub fn martingale_coboundary_split(a: &[f64], k: usize) -> Result<CoboundarySplit> {
    if a.is_empty() {
        return Err(invalid("a", "need at least a_0"));
    }
    let ak = |i: usize| a.get(i).copied().unwrap_or(0.0);
    let martingale_coeff = (0..=k).map(ak).sum();
    let g_coeffs = (0..k).map(|j| (j + 1..=k).map(ak).sum()).collect();
    Ok(CoboundarySplit {
        k,
        martingale_coeff,
        g_coeffs,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitPaths {
    /// `f_K ∘ T^t`, `t < n`.
    pub f: Vec<f64>,
    /// `A ε_t`.
    pub m: Vec<f64>,
    /// `g ∘ T^t`, `t ≤ n`.
    pub g: Vec<f64>,
}

impl CoboundarySplit {
    /// Paths driven by `eps = (ε_{-K}, …, ε_{n-1})`.
    pub fn paths(&self, a: &[f64], eps: &[f64]) -> Result<SplitPaths> {
        let k = self.k;
        if eps.len() <= k {
            return Err(invalid("eps", "needs K burn-in values and at least one more"));
        }
        let n = eps.len() - k;
        let coeffs: Vec<f64> = (0..=k).map(|i| a.get(i).copied().unwrap_or(0.0)).collect();
        let f = linear_filter(&coeffs, eps, n);
        let m = eps[k..].iter().map(|e| self.martingale_coeff * e).collect();
        // g ∘ T^t = Σ_j b_j ε_{t-1-j}, index shifted by the burn-in.
        let g = (0..=n)
            .map(|t| {
                self.g_coeffs
                    .iter()
                    .enumerate()
                    .map(|(j, b)| b * eps[k + t - 1 - j])
                    .sum()
            })
            .collect();
        Ok(SplitPaths { f, m, g })
    }
}
