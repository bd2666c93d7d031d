//! Empirical total-variation distance with a bootstrap interval.
//!
//! A diagnostic: the plug-in estimate is biased upward on large supports
//! and the percentile interval is heuristic.

use std::collections::BTreeMap;

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::Serialize;

use crate::model::seed::aux_stream;
use crate::{Error, Result};

pub const MIN_TRIALS: usize = 1000;
pub const RESAMPLES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TvEstimate {
    pub estimate: f64,
    /// Percentile bootstrap 95% interval.
    pub lower: f64,
    pub upper: f64,
    pub trials: usize,
}

fn tv(c0: &[u64], c1: &[u64], n0: f64, n1: f64) -> f64 {
    c0.iter()
        .zip(c1)
        .map(|(&a, &b)| (a as f64 / n0 - b as f64 / n1).abs())
        .sum::<f64>()
        / 2.0
}

/// Draw `trials` outcomes from each sampler and estimate their total
/// variation distance.
pub fn tv_estimate<F0, F1>(mut sampler0: F0, mut sampler1: F1, trials: usize, seed: u64) -> Result<TvEstimate>
where
    F0: FnMut(&mut dyn RngCore) -> Result<Vec<u8>>,
    F1: FnMut(&mut dyn RngCore) -> Result<Vec<u8>>,
{
    if trials < MIN_TRIALS {
        return Err(Error::param("trials", format!("{trials} < {MIN_TRIALS}")));
    }
    let mut ids: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
    let mut draw = |f: &mut dyn FnMut(&mut dyn RngCore) -> Result<Vec<u8>>, stream: u64| {
        let mut rng = aux_stream("tv-sampler", seed, stream);
        (0..trials)
            .map(|_| {
                let k = f(&mut rng)?;
                let next = ids.len();
                Ok(*ids.entry(k).or_insert(next))
            })
            .collect::<Result<Vec<usize>>>()
    };
    let s0 = draw(&mut sampler0, 0)?;
    let s1 = draw(&mut sampler1, 1)?;
    let support = ids.len();
    let tally = |s: &[usize]| {
        let mut c = vec![0u64; support];
        for &i in s {
            c[i] += 1;
        }
        c
    };
    let n = trials as f64;
    let estimate = tv(&tally(&s0), &tally(&s1), n, n);
    let mut boot: Vec<f64> = (0..RESAMPLES as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = aux_stream("tv-bootstrap", seed, r);
            let mut c0 = vec![0u64; support];
            let mut c1 = vec![0u64; support];
            for _ in 0..trials {
                c0[s0[rng.gen_range(0..trials)]] += 1;
                c1[s1[rng.gen_range(0..trials)]] += 1;
            }
            tv(&c0, &c1, n, n)
        })
        .collect();
    boot.sort_by(f64::total_cmp);
    let at = |q: f64| boot[((q * RESAMPLES as f64).floor() as usize).min(RESAMPLES - 1)];
    Ok(TvEstimate {
        estimate,
        lower: at(0.025),
        upper: at(0.975),
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bernoulli(p: f64) -> impl FnMut(&mut dyn RngCore) -> Result<Vec<u8>> {
        move |rng| Ok(vec![rng.gen_bool(p) as u8])
    }

    #[test]
    fn bernoulli_pair() {
        let e = tv_estimate(bernoulli(0.5), bernoulli(0.25), 20_000, 3).unwrap();
        assert!(e.lower <= 0.25 && 0.25 <= e.upper, "{e:?}");
        assert!((e.estimate - 0.25).abs() < 0.02);
    }

    #[test]
    fn identical_and_disjoint() {
        let e = tv_estimate(bernoulli(0.3), bernoulli(0.3), 5000, 1).unwrap();
        assert!(e.estimate < 0.05 && e.lower <= e.estimate);
        let e = tv_estimate(|_| Ok(vec![0]), |_| Ok(vec![1]), 1000, 1).unwrap();
        assert_eq!((e.estimate, e.lower, e.upper), (1.0, 1.0, 1.0));
        assert!(tv_estimate(|_| Ok(vec![0]), |_| Ok(vec![1]), 999, 1).is_err());
        assert!(tv_estimate(|_| Err(Error::Internal("x".into())), |_| Ok(vec![1]), 1000, 1).is_err());
    }
}
