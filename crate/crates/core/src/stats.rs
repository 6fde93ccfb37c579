//! Statistical helpers: Gaussian tails, two-sample KS, Kendall's tau, Monte
//! Carlo standard errors and deterministic replica seeding.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::function::erf::erfc;

use crate::error::{invalid, Error, Result};

/// `P(N > x)` for a standard normal `N`.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// `P(|N| ≥ x)`.
pub fn normal_two_sided(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        erfc(x / std::f64::consts::SQRT_2)
    }
}

/// `ln P(|N| ≥ x)`, accurate far into the tail where the probability
/// underflows.
pub fn ln_normal_two_sided(x: f64) -> f64 {
    if x < 30.0 {
        return normal_two_sided(x).ln();
    }
    // Asymptotic series of the Mills ratio.
    let x2 = x * x;
    let series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
    let ln_pdf = -0.5 * x2 - 0.5 * (2.0 * std::f64::consts::PI).ln();
    std::f64::consts::LN_2 + ln_pdf - x.ln() + series.ln()
}

/// Binomial standard error of a frequency, floored at `1/N` so that
/// estimates of 0 or 1 still carry a nonzero error.
pub fn binomial_se(p_hat: f64, trials: usize) -> f64 {
    if trials == 0 {
        return f64::INFINITY;
    }
    let n = trials as f64;
    (p_hat * (1.0 - p_hat)).max(1.0 / n).sqrt() / n.sqrt()
}

/// Mean and standard error of the mean.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::INFINITY);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, f64::INFINITY);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic Kolmogorov law
/// and the Stephens small-sample correction.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("ks sample"));
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < n && j < m {
        let v = x[i].min(y[j]);
        while i < n && x[i] <= v {
            i += 1;
        }
        while j < m && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let en = ((n * m) as f64 / (n + m) as f64).sqrt();
    let lambda = (en + 0.12 + 0.11 / en) * d;
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_sf(lambda),
    })
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KendallResult {
    pub tau_b: f64,
    /// One-sided p-value for positive association (normal approximation with
    /// tie correction).
    pub p_value: f64,
    pub concordant: u64,
    pub discordant: u64,
}

pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<KendallResult> {
    if x.len() != y.len() {
        return Err(invalid("y", "length differs from x"));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::EmptyInput("kendall pairs"));
    }
    let (mut c, mut d, mut tx, mut ty) = (0u64, 0u64, 0u64, 0u64);
    for i in 0..n {
        for j in i + 1..n {
            let a = (x[i] - x[j]).partial_cmp(&0.0).unwrap_or(std::cmp::Ordering::Equal);
            let b = (y[i] - y[j]).partial_cmp(&0.0).unwrap_or(std::cmp::Ordering::Equal);
            use std::cmp::Ordering::Equal;
            match (a, b) {
                (Equal, Equal) => {}
                (Equal, _) => tx += 1,
                (_, Equal) => ty += 1,
                _ if a == b => c += 1,
                _ => d += 1,
            }
        }
    }
    let denom = ((c + d + tx) as f64 * (c + d + ty) as f64).sqrt();
    let tau_b = if denom > 0.0 {
        (c as f64 - d as f64) / denom
    } else {
        0.0
    };
    let tie_groups = |v: &[f64]| -> Vec<usize> {
        let mut s = v.to_vec();
        s.sort_by(f64::total_cmp);
        let mut out = Vec::new();
        let mut k = 0;
        while k < s.len() {
            let mut e = k + 1;
            while e < s.len() && s[e] == s[k] {
                e += 1;
            }
            if e - k > 1 {
                out.push(e - k);
            }
            k = e;
        }
        out
    };
    let nf = n as f64;
    let v0 = nf * (nf - 1.0) * (2.0 * nf + 5.0);
    let vt: f64 = tie_groups(x).iter().map(|&t| (t * (t - 1) * (2 * t + 5)) as f64).sum();
    let vu: f64 = tie_groups(y).iter().map(|&t| (t * (t - 1) * (2 * t + 5)) as f64).sum();
    let var = (v0 - vt - vu) / 18.0;
    let s = c as f64 - d as f64;
    let p_value = if var > 0.0 { normal_sf(s / var.sqrt()) } else { 1.0 };
    Ok(KendallResult {
        tau_b,
        p_value,
        concordant: c,
        discordant: d,
    })
}

/// Least-squares slope of `y` on `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// SplitMix64 finaliser of `base ⊕ φ·(index + 1)`; the stream for replica
/// `index` depends only on `(base, index)`.
pub fn replica_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn replica_rng(base: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(replica_seed(base, index))
}

/// Runs `count` replicas in parallel and returns their results in replica
/// order, so any later reduction is independent of the thread count.
pub fn run_replicas<T, F>(base: u64, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut ChaCha8Rng) -> T + Sync,
{
    (0..count as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(base, r);
            f(r, &mut rng)
        })
        .collect()
}

/// As [`run_replicas`] with per-thread scratch state from `init`.
pub fn run_replicas_with<S, T, I, F>(base: u64, count: usize, init: I, f: F) -> Vec<T>
where
    T: Send,
    I: Fn() -> S + Sync,
    F: Fn(&mut S, u64, &mut ChaCha8Rng) -> T + Sync,
{
    (0..count as u64)
        .into_par_iter()
        .map_init(&init, |state, r| {
            let mut rng = replica_rng(base, r);
            f(state, r, &mut rng)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_tails() {
        assert!((normal_sf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_two_sided(1.959_963_984_540_054) - 0.05).abs() < 1e-9);
        for x in [1.0, 5.0, 20.0, 29.9] {
            assert!((ln_normal_two_sided(x) - normal_two_sided(x).ln()).abs() < 1e-9);
        }
        // Continuity across the switch.
        let a = ln_normal_two_sided(29.999_999);
        let b = ln_normal_two_sided(30.0);
        assert!((a - b).abs() < 1e-4);
        assert!(ln_normal_two_sided(100.0).is_finite());
    }

    #[test]
    fn ks_identical_and_shifted() {
        let a: Vec<f64> = (0..500).map(|i| i as f64 / 500.0).collect();
        let r = ks_two_sample(&a, &a).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(r.p_value > 0.99);
        let b: Vec<f64> = a.iter().map(|v| v + 0.5).collect();
        let r = ks_two_sample(&a, &b).unwrap();
        assert!((r.statistic - 0.5).abs() < 1e-2);
        assert!(r.p_value < 1e-10);
    }

    #[test]
    fn kendall_perfect() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
        let r = kendall_tau(&x, &x).unwrap();
        assert_eq!(r.tau_b, 1.0);
        assert!(r.p_value < 0.01);
        let y: Vec<f64> = x.iter().rev().cloned().collect();
        assert_eq!(kendall_tau(&x, &y).unwrap().tau_b, -1.0);
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        assert_eq!(replica_seed(7, 3), replica_seed(7, 3));
        assert_ne!(replica_seed(7, 3), replica_seed(7, 4));
        assert_ne!(replica_seed(7, 3), replica_seed(8, 3));
    }

    #[test]
    fn replica_order_is_thread_independent() {
        use rand::Rng;
        let f = |_r: u64, rng: &mut ChaCha8Rng| rng.random::<u64>();
        let a = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_replicas(5, 64, f));
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| run_replicas(5, 64, f));
        assert_eq!(a, b);
    }
}
