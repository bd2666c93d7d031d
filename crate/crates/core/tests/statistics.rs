//! Frequency-oracle accuracy, subsampling amplification and the empirical
//! distance estimator.

use std::collections::BTreeMap;

use num_rational::BigRational;
use rand::Rng;

use shuffle_dp::audit::{hockey_stick_exact, tv_estimate};
use shuffle_dp::histograms::{
    amplified_delta, ldp_histogram, likelihood_ratio, output_distribution, subsample_size, ConstantCoin, Mechanism,
    RandomizedResponse, Subsampled,
};

/// Standard errors allowed between the mean estimate and the true count.
const UNBIASED_SE: f64 = 4.0;
/// Allowed deviation of the error growth per tenfold `n` from `sqrt(10)`.
const SCALING_FACTOR: f64 = 1.5;

fn true_counts(inputs: &[u64], domain: u64) -> Vec<f64> {
    let mut c = vec![0.0; domain as usize];
    for &x in inputs {
        c[x as usize] += 1.0;
    }
    c
}

#[test]
fn estimates_are_unbiased() {
    let (n, domain, runs) = (200usize, 10u64, 2000u64);
    // skewed: value 0 is held by half the parties
    let inputs: Vec<u64> = (0..n as u64).map(|i| if i % 2 == 0 { 0 } else { i % domain }).collect();
    let truth = true_counts(&inputs, domain);
    for eps in [0.5, 1.0] {
        let mut sum = vec![0.0; domain as usize];
        let mut sq = vec![0.0; domain as usize];
        for seed in 0..runs {
            let est = ldp_histogram(&inputs, eps, domain, seed).unwrap().query_all();
            for (y, v) in est.into_iter().enumerate() {
                sum[y] += v;
                sq[y] += v * v;
            }
        }
        let r = runs as f64;
        for y in 0..domain as usize {
            let mean = sum[y] / r;
            let var = (sq[y] / r - mean * mean) * r / (r - 1.0);
            let se = (var / r).sqrt();
            assert!(
                (mean - truth[y]).abs() <= UNBIASED_SE * se,
                "eps {eps} y {y}: mean {mean} truth {} se {se}",
                truth[y]
            );
        }
    }
}

fn mean_max_error(n: usize, domain: u64, runs: u64) -> f64 {
    let inputs: Vec<u64> = (0..n as u64).map(|i| i % domain).collect();
    let truth = true_counts(&inputs, domain);
    let total: f64 = (0..runs)
        .map(|seed| {
            let est = ldp_histogram(&inputs, 1.0, domain, 1000 + seed).unwrap().query_all();
            est.iter().zip(&truth).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        })
        .sum();
    total / runs as f64
}

#[test]
fn error_grows_like_sqrt_n() {
    let errs: Vec<f64> = [1_000, 10_000, 100_000]
        .iter()
        .map(|&n| mean_max_error(n, 100, 10))
        .collect();
    let want = 10f64.sqrt();
    for pair in errs.windows(2) {
        let ratio = pair[1] / pair[0];
        assert!(
            ratio >= want / SCALING_FACTOR && ratio <= want * SCALING_FACTOR,
            "errors {errs:?}"
        );
    }
}

#[test]
fn report_ratio_is_exactly_exp_epsilon() {
    for eps in [0.25, 0.5, 1.0, 2.0] {
        let r = likelihood_ratio(eps).unwrap();
        assert_eq!(r, BigRational::from_float(eps.exp()).unwrap());
    }
}

fn delta_over_neighbors(m: &dyn Mechanism, eps: f64) -> f64 {
    // position 0 changes; every assignment of the others
    let t = m.input_count();
    let mut worst = 0.0f64;
    for rest in 0..1u64 << (t - 1) {
        let mut a: Vec<u64> = (0..t).map(|i| if i == 0 { 0 } else { rest >> (i - 1) & 1 }).collect();
        let p = output_distribution(m, &a, 1 << 20).unwrap();
        a[0] = 1;
        let q = output_distribution(m, &a, 1 << 20).unwrap();
        worst = worst.max(hockey_stick_exact(&p, &q, eps).unwrap().to_f64());
    }
    worst
}

#[test]
fn subsampling_amplifies_randomized_response() {
    let base_eps = 3f64.ln();
    let t = subsample_size(1, 0.5, base_eps).unwrap();
    assert_eq!(t, 12);
    let base = RandomizedResponse::with_keep(3, 4).unwrap();
    let m = Subsampled::new(base, t).unwrap();
    // the base mechanism alone needs eps = ln 3
    let mut p = BTreeMap::new();
    p.insert(vec![0u8], BigRational::new(3.into(), 4.into()));
    p.insert(vec![1u8], BigRational::new(1.into(), 4.into()));
    let q: BTreeMap<_, _> = p.iter().map(|(k, v)| (vec![1 - k[0]], v.clone())).collect();
    assert!(hockey_stick_exact(&p, &q, 0.5).unwrap().to_f64() > 0.0);
    // subsampled: exactly private at 0.5, and the amplified delta bound holds
    assert_eq!(delta_over_neighbors(&m, 0.5), 0.0);
    assert!(delta_over_neighbors(&m, 0.5) <= amplified_delta(0.5, base_eps, 0.0));
    // below the amplified ratio 14/12 some mass remains
    assert!(delta_over_neighbors(&m, 0.1) > 0.0);
}

#[test]
fn constant_mechanism_is_perfectly_private() {
    let m = Subsampled::new(ConstantCoin { inputs: 2 }, 6).unwrap();
    assert_eq!(delta_over_neighbors(&m, 0.0), 0.0);
}

#[test]
fn distance_estimate_for_two_coins() {
    let e = tv_estimate(
        |rng| Ok(vec![rng.gen_bool(0.5) as u8]),
        |rng| Ok(vec![rng.gen_bool(0.25) as u8]),
        100_000,
        17,
    )
    .unwrap();
    assert!(e.lower <= 0.25 && 0.25 <= e.upper, "{e:?}");
    assert!((e.estimate - 0.25).abs() < 0.01);
}
