//! Privacy amplification by running a mechanism on a random subset.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::ldp::exp_rational;
use crate::model::{explore, uniform_subset, Coins, Prob};
use crate::{Error, Result};

/// A centralized randomized algorithm over a database of `input_count`
/// items, with outputs encoded as bytes.
pub trait Mechanism: Send + Sync {
    fn input_count(&self) -> usize;
    fn run(&self, inputs: &[u64], coins: &mut dyn Coins) -> Result<Vec<u8>>;
}

/// Binary randomized response on a single input bit.
#[derive(Clone, Copy, Debug)]
pub struct RandomizedResponse {
    keep: Prob,
}

impl RandomizedResponse {
    /// Keep probability `e^eps / (e^eps + 1)`, exact for the double value
    /// of `e^eps`.
    pub fn new(epsilon: f64) -> Result<Self> {
        Ok(RandomizedResponse {
            keep: super::ldp::keep_probability(epsilon)?,
        })
    }

    /// Keep probability `num / den`, e.g. `3/4` for `eps = ln 3`.
    pub fn with_keep(num: u64, den: u64) -> Result<Self> {
        Ok(RandomizedResponse {
            keep: Prob::ratio(num, den)?,
        })
    }

    pub fn keep(&self) -> Prob {
        self.keep
    }
}

impl Mechanism for RandomizedResponse {
    fn input_count(&self) -> usize {
        1
    }

    fn run(&self, inputs: &[u64], coins: &mut dyn Coins) -> Result<Vec<u8>> {
        let x = match inputs {
            [x] if *x <= 1 => *x as u8,
            _ => return Err(Error::param("inputs", "one bit expected")),
        };
        let kept = coins.bernoulli(self.keep)?;
        Ok(vec![if kept { x } else { 1 - x }])
    }
}

/// Ignores its inputs and outputs a fair coin.
#[derive(Clone, Copy, Debug)]
pub struct ConstantCoin {
    pub inputs: usize,
}

impl Mechanism for ConstantCoin {
    fn input_count(&self) -> usize {
        self.inputs
    }

    fn run(&self, _inputs: &[u64], coins: &mut dyn Coins) -> Result<Vec<u8>> {
        Ok(vec![coins.bit()? as u8])
    }
}

/// `ceil((n / eps) * (3 + e^eps_base))`.
pub fn subsample_size(n: usize, epsilon: f64, epsilon_base: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::param("epsilon", format!("{epsilon} outside (0, 1]")));
    }
    if !(epsilon_base >= 0.0 && epsilon_base.is_finite()) {
        return Err(Error::param("epsilon_base", "must be finite and non-negative"));
    }
    let t = (n as f64 / epsilon * (3.0 + epsilon_base.exp())).ceil();
    t.to_usize()
        .ok_or_else(|| Error::param("t", "subsample size overflows"))
}

/// Claimed `delta` of the amplified mechanism: `4 eps delta / (3 + e^eps_base)`.
pub fn amplified_delta(epsilon: f64, epsilon_base: f64, delta: f64) -> f64 {
    4.0 * epsilon * delta / (3.0 + epsilon_base.exp())
}

/// The same bound as an exact rational, with `e^eps_base` and `eps` taken
/// as their double values.
pub fn amplified_delta_exact(epsilon: f64, epsilon_base: f64, delta: &BigRational) -> Result<BigRational> {
    let eps = BigRational::from_float(epsilon).ok_or_else(|| Error::param("epsilon", "not finite"))?;
    let three = BigRational::from_integer(3.into());
    let four = BigRational::from_integer(4.into());
    Ok(four * eps * delta / (three + exp_rational(epsilon_base)?))
}

/// Runs `base` on a uniformly random size-`n` subset of `t` inputs.
pub struct Subsampled<M> {
    pub base: M,
    pub t: usize,
}

impl<M: Mechanism> Subsampled<M> {
    pub fn new(base: M, t: usize) -> Result<Self> {
        if t < base.input_count() {
            return Err(Error::param("t", format!("{t} < {}", base.input_count())));
        }
        Ok(Subsampled { base, t })
    }

    /// Indices of the subset, ascending. Each index is kept with probability
    /// `still_needed / still_available`, which makes every subset equally
    /// likely and enumerates each exactly once.
    pub fn select(&self, coins: &mut dyn Coins) -> Result<Vec<usize>> {
        uniform_subset(self.base.input_count(), self.t, coins)
    }
}

impl<M: Mechanism> Mechanism for Subsampled<M> {
    fn input_count(&self) -> usize {
        self.t
    }

    fn run(&self, inputs: &[u64], coins: &mut dyn Coins) -> Result<Vec<u8>> {
        if inputs.len() < self.t {
            return Err(Error::param("inputs", format!("{} < t = {}", inputs.len(), self.t)));
        }
        let subset: Vec<u64> = self.select(coins)?.into_iter().map(|i| inputs[i]).collect();
        self.base.run(&subset, coins)
    }
}

/// Exact output distribution of `m` on `inputs`.
pub fn output_distribution(m: &dyn Mechanism, inputs: &[u64], budget: u128) -> Result<BTreeMap<Vec<u8>, BigRational>> {
    let mut out = BTreeMap::new();
    for leaf in explore(budget, |c| m.run(inputs, c))? {
        *out.entry(leaf.value).or_insert_with(BigRational::zero) += leaf.prob;
    }
    Ok(out)
}
