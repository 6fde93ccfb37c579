use hoelder_core::weak_lp::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_simple(rng: &mut ChaCha8Rng, max_atoms: usize) -> SimpleFunction {
    let k = rng.random_range(1..=max_atoms);
    let mut cells = Vec::with_capacity(k);
    let mut left = 1.0;
    for _ in 0..k {
        let m = rng.random::<f64>() * left;
        left -= m;
        let a = (rng.random::<f64>() * 6.0 - 2.0).exp2();
        cells.push((a, m));
    }
    SimpleFunction::from_cells(&cells).unwrap()
}

#[test]
fn triangle_counterexample() {
    let p = 3.0;
    let (f, g, h) = triangle_pair(p, 1_000_000).unwrap();
    let nf = weak_norm_exact(&f, p).unwrap();
    let ng = weak_norm_exact(&g, p).unwrap();
    let nh = weak_norm_exact(&h, p).unwrap();
    assert!((nf + ng - 2.0).abs() <= 1e-3, "{nf} + {ng}");
    assert!(nh >= 2f64.powf(1.0 + 1.0 / p) * (1.0 - 1e-3), "{nh}");
    // N_p is a norm, so the pair does not break it.
    assert!(np_norm(&h, p).unwrap() <= np_norm(&f, p).unwrap() + np_norm(&g, p).unwrap() + 1e-9);
}

#[test]
fn power_function_ratio_approaches_kappa() {
    for p in [2.5, 3.0, 4.0] {
        let (f, _, _) = triangle_pair(p, 100_000).unwrap();
        let w = weak_norm_exact(&f, p).unwrap();
        let ratio = np_norm(&f, p).unwrap() / w;
        assert!((w - 1.0).abs() < 1e-3);
        assert!((ratio - kappa_p(p).unwrap()).abs() < 0.01, "p = {p}: {ratio}");
    }
}

#[test]
fn kappa_values() {
    assert_eq!(kappa_p(3.0).unwrap(), 1.5);
    assert_eq!(kappa_p(4.0).unwrap(), 4.0 / 3.0);
    assert!(kappa_p(1.0).is_err());
}

#[test]
fn sandwich_on_seeded_simple_functions() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10_000 {
        let f = random_simple(&mut rng, 8);
        let p = 2.0 + rng.random::<f64>() * 6.0;
        let w = weak_norm_exact(&f, p).unwrap();
        let np = np_norm(&f, p).unwrap();
        assert!(
            w <= np * (1.0 + 1e-12) && np <= kappa_p(p).unwrap() * w * (1.0 + 1e-12),
            "{f:?} p={p}"
        );
        assert!(simple_weak_bound(&f, p).unwrap() >= w.powf(p) * (1.0 - 1e-12));
    }
}

#[test]
fn simple_bound_is_exact_when_left_accumulating() {
    let f = SimpleFunction::new(vec![(2.0, 0.1), (1.0, 0.5)]).unwrap();
    assert_eq!(simple_weak_bound(&f, 3.0).unwrap(), 0.8);
    assert!((weak_norm_exact(&f, 3.0).unwrap().powf(3.0) - 0.8).abs() < 1e-15);
}

#[test]
fn sample_estimators_match_exact() {
    // Equal-mass sample of the two-atom function.
    let mut s = vec![2.0; 10];
    s.extend(vec![1.0; 50]);
    s.extend(vec![0.0; 40]);
    let f = SimpleFunction::new(vec![(2.0, 0.1), (1.0, 0.5)]).unwrap();
    assert!((weak_norm_sample(&s, 3.0).unwrap() - weak_norm_exact(&f, 3.0).unwrap()).abs() < 1e-14);
    assert!((np_norm_sample(&s, 3.0).unwrap() - np_norm(&f, 3.0).unwrap()).abs() < 1e-14);
}

#[test]
fn tail_profile_zero_and_grid() {
    let z = tail_profile(&[0.0; 100], 3.0, 16).unwrap();
    assert!(z.values.iter().all(|v| *v == 0.0) && z.sup_estimate == 0.0);
    let x: Vec<f64> = (1..=1000).map(|k| k as f64).collect();
    let t = tail_profile(&x, 3.0, DEFAULT_TAIL_GRID).unwrap();
    assert_eq!(t.grid.len(), DEFAULT_TAIL_GRID);
    assert!(t.grid.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(t.sup_estimate, t.values.iter().cloned().fold(0.0, f64::max));
    assert!(tail_profile(&x, 3.0, 1).is_err());
    assert!(tail_profile(&[], 3.0, 8).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn np_triangle_inequality(pairs in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 1..60), p in 1.2f64..8.0) {
        let a: Vec<f64> = pairs.iter().map(|x| x.0).collect();
        let b: Vec<f64> = pairs.iter().map(|x| x.1).collect();
        let s: Vec<f64> = pairs.iter().map(|x| x.0 + x.1).collect();
        let lhs = np_norm_sample(&s, p).unwrap();
        let rhs = np_norm_sample(&a, p).unwrap() + np_norm_sample(&b, p).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn coarsening_shadow(seed in any::<u64>(), p in 1.5f64..8.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_simple(&mut rng, 12);
        let k = f.atoms().len();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for i in 0..k {
            let g = rng.random_range(0..=groups.len());
            if g == groups.len() {
                groups.push(vec![i]);
            } else {
                groups[g].push(i);
            }
        }
        let c = conditional_coarsen(&f, &groups).unwrap();
        let wc = weak_norm_exact(&c, p).unwrap().powf(p);
        let wf = weak_norm_exact(&f, p).unwrap().powf(p);
        prop_assert!(wc <= kappa_p(p).unwrap().powf(p) * wf * (1.0 + 1e-12));
        prop_assert!(wc <= np_norm(&f, p).unwrap().powf(p) * (1.0 + 1e-12));
        prop_assert!((c.mean() - f.mean()).abs() <= 1e-12 * f.mean().max(1.0));
    }

    #[test]
    fn simple_bound_majorises(seed in any::<u64>(), p in 0.5f64..10.0) {
        let f = random_simple(&mut ChaCha8Rng::seed_from_u64(seed), 5);
        prop_assert!(simple_weak_bound(&f, p).unwrap() >= weak_norm_exact(&f, p).unwrap().powf(p) * (1.0 - 1e-12));
    }
}
