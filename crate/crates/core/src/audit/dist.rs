//! Finite distributions over byte-string outcomes and integer tuples.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// Tolerance on the total mass of floating-point distributions.
pub const FLOAT_MASS_TOLERANCE: f64 = 1e-12;

/// Exact distribution keyed by encoded outcomes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactDistribution {
    weights: BTreeMap<Vec<u8>, BigRational>,
}

impl ExactDistribution {
    /// Weights must be non-negative and sum to exactly one. Zero weights
    /// are dropped.
    pub fn new(weights: BTreeMap<Vec<u8>, BigRational>) -> Result<Self> {
        let mut total = BigRational::zero();
        for w in weights.values() {
            if w.is_negative() {
                return Err(Error::param("weights", format!("negative weight {w}")));
            }
            total += w;
        }
        if !total.is_one() {
            return Err(Error::param("weights", format!("total mass {total}")));
        }
        Ok(ExactDistribution {
            weights: weights.into_iter().filter(|(_, w)| !w.is_zero()).collect(),
        })
    }

    /// Merge `(outcome, probability)` pairs that share an outcome.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Vec<u8>, BigRational)>) -> Result<Self> {
        let mut weights: BTreeMap<Vec<u8>, BigRational> = BTreeMap::new();
        for (k, p) in pairs {
            *weights.entry(k).or_insert_with(BigRational::zero) += p;
        }
        Self::new(weights)
    }

    pub fn weights(&self) -> &BTreeMap<Vec<u8>, BigRational> {
        &self.weights
    }

    pub fn prob(&self, outcome: &[u8]) -> BigRational {
        self.weights.get(outcome).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn to_float(&self) -> FloatDistribution {
        FloatDistribution {
            weights: self
                .weights
                .iter()
                .map(|(k, w)| (k.clone(), w.to_f64().unwrap_or(0.0)))
                .collect(),
        }
    }

    /// Shannon entropy in bits.
    pub fn entropy(&self) -> f64 {
        self.to_float().entropy()
    }
}

/// Floating-point distribution keyed by encoded outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatDistribution {
    weights: BTreeMap<Vec<u8>, f64>,
}

impl FloatDistribution {
    pub fn new(weights: BTreeMap<Vec<u8>, f64>) -> Result<Self> {
        check_float_weights(weights.values().copied())?;
        Ok(FloatDistribution {
            weights: weights.into_iter().filter(|(_, w)| *w > 0.0).collect(),
        })
    }

    /// Empirical distribution of a sample.
    pub fn empirical<I: IntoIterator<Item = Vec<u8>>>(samples: I) -> Result<Self> {
        let mut counts: BTreeMap<Vec<u8>, u64> = BTreeMap::new();
        let mut total = 0u64;
        for s in samples {
            *counts.entry(s).or_default() += 1;
            total += 1;
        }
        if total == 0 {
            return Err(Error::param("samples", "empty sample"));
        }
        Ok(FloatDistribution {
            weights: counts.into_iter().map(|(k, c)| (k, c as f64 / total as f64)).collect(),
        })
    }

    pub fn weights(&self) -> &BTreeMap<Vec<u8>, f64> {
        &self.weights
    }

    pub fn prob(&self, outcome: &[u8]) -> f64 {
        self.weights.get(outcome).copied().unwrap_or(0.0)
    }

    pub fn entropy(&self) -> f64 {
        entropy_of(self.weights.values().copied())
    }

    pub fn total_variation(&self, other: &FloatDistribution) -> f64 {
        let mut sum = 0.0;
        for (k, &p) in &self.weights {
            sum += (p - other.prob(k)).abs();
        }
        for (k, &q) in &other.weights {
            if !self.weights.contains_key(k) {
                sum += q;
            }
        }
        sum / 2.0
    }
}

fn check_float_weights(ws: impl Iterator<Item = f64>) -> Result<()> {
    let mut total = 0.0;
    for w in ws {
        if !(w >= 0.0 && w.is_finite()) {
            return Err(Error::param("weights", format!("invalid weight {w}")));
        }
        total += w;
    }
    if (total - 1.0).abs() > FLOAT_MASS_TOLERANCE {
        return Err(Error::param("weights", format!("total mass {total}")));
    }
    Ok(())
}

/// `-sum p log2 p` over the positive weights.
pub fn entropy_of(ws: impl Iterator<Item = f64>) -> f64 {
    ws.filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum()
}

/// Distribution over fixed-arity tuples of integer variables.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    arity: usize,
    weights: BTreeMap<Vec<u64>, f64>,
}

impl JointDistribution {
    pub fn new(arity: usize, weights: BTreeMap<Vec<u64>, f64>) -> Result<Self> {
        if let Some(k) = weights.keys().find(|k| k.len() != arity) {
            return Err(Error::param("weights", format!("tuple {k:?} has arity {}", k.len())));
        }
        check_float_weights(weights.values().copied())?;
        Ok(JointDistribution {
            arity,
            weights: weights.into_iter().filter(|(_, w)| *w > 0.0).collect(),
        })
    }

    /// Merge `(tuple, probability)` pairs.
    pub fn from_pairs(arity: usize, pairs: impl IntoIterator<Item = (Vec<u64>, f64)>) -> Result<Self> {
        let mut weights: BTreeMap<Vec<u64>, f64> = BTreeMap::new();
        for (k, p) in pairs {
            *weights.entry(k).or_default() += p;
        }
        Self::new(arity, weights)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn weights(&self) -> &BTreeMap<Vec<u64>, f64> {
        &self.weights
    }

    /// Distribution of the listed variables, in the listed order.
    pub fn marginal(&self, vars: &[usize]) -> Result<JointDistribution> {
        if let Some(&v) = vars.iter().find(|&&v| v >= self.arity) {
            return Err(Error::param("vars", format!("variable {v} of {}", self.arity)));
        }
        let mut weights: BTreeMap<Vec<u64>, f64> = BTreeMap::new();
        for (k, &p) in &self.weights {
            *weights.entry(vars.iter().map(|&v| k[v]).collect()).or_default() += p;
        }
        Ok(JointDistribution {
            arity: vars.len(),
            weights,
        })
    }

    pub fn entropy(&self) -> f64 {
        entropy_of(self.weights.values().copied())
    }
}
