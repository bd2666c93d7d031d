//! Logical random choices.
//!
//! Randomizers draw randomness only through [`Coins`]. Every draw is
//! recorded on a [`Tape`] as a small integer, so the same randomizer code
//! can be sampled from a PRNG, replayed from a recorded tape, or explored
//! exhaustively to obtain its exact output distribution.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, RngCore};

use crate::{Error, Result};

/// Probability of a biased coin.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Prob {
    /// `num / den` with `num <= den`, `den >= 1`.
    Ratio { num: u64, den: u64 },
    /// `threshold / 2^64`, for probabilities that are not small rationals.
    Fixed(u64),
}

impl Prob {
    pub fn ratio(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num > den {
            return Err(Error::param("prob", format!("{num}/{den} is not a probability")));
        }
        Ok(Prob::Ratio { num, den })
    }

    /// Nearest 64-bit fixed-point value to `p`, for `p` in `[0, 1)`.
    pub fn fixed(p: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::param("prob", format!("{p} outside [0, 1)")));
        }
        let t = (p * 18_446_744_073_709_551_616.0).round();
        Ok(Prob::Fixed(if t >= 18_446_744_073_709_551_615.0 {
            u64::MAX
        } else {
            t as u64
        }))
    }

    pub fn to_rational(self) -> BigRational {
        match self {
            Prob::Ratio { num, den } => BigRational::new(num.into(), den.into()),
            Prob::Fixed(t) => BigRational::new(t.into(), BigInt::one() << 64),
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Prob::Ratio { num, den } => num as f64 / den as f64,
            Prob::Fixed(t) => t as f64 / 18_446_744_073_709_551_616.0,
        }
    }
}

/// The sequence of logical choices a party made in one round.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tape(pub Vec<u64>);

impl Tape {
    pub fn draws(&self) -> &[u64] {
        &self.0
    }
}

/// Source of logical random choices.
pub trait Coins {
    /// Uniform value in `[0, n)`; `n >= 1`.
    fn uniform(&mut self, n: u64) -> Result<u64>;
    /// `true` with probability `p`.
    fn bernoulli(&mut self, p: Prob) -> Result<bool>;

    fn bit(&mut self) -> Result<bool> {
        Ok(self.uniform(2)? == 1)
    }

    fn bits(&mut self, count: usize) -> Result<Vec<bool>> {
        (0..count).map(|_| self.bit()).collect()
    }
}

fn check_arity(n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::param("n", "uniform draw over an empty range"));
    }
    Ok(())
}

/// Draws from a PRNG and records the tape.
pub struct SamplingCoins<'a> {
    rng: &'a mut dyn RngCore,
    tape: Vec<u64>,
}

impl<'a> SamplingCoins<'a> {
    pub fn new(rng: &'a mut dyn RngCore) -> Self {
        SamplingCoins { rng, tape: Vec::new() }
    }

    pub fn into_tape(self) -> Tape {
        Tape(self.tape)
    }
}

impl Coins for SamplingCoins<'_> {
    fn uniform(&mut self, n: u64) -> Result<u64> {
        check_arity(n)?;
        let v = if n == 1 { 0 } else { self.rng.gen_range(0..n) };
        self.tape.push(v);
        Ok(v)
    }

    fn bernoulli(&mut self, p: Prob) -> Result<bool> {
        let b = match p {
            Prob::Ratio { num, den } => {
                if num == 0 {
                    false
                } else if num == den {
                    true
                } else {
                    self.rng.gen_range(0..den) < num
                }
            }
            Prob::Fixed(t) => self.rng.next_u64() < t,
        };
        self.tape.push(b as u64);
        Ok(b)
    }
}

/// Replays a recorded tape, checking each draw against its range.
pub struct ReplayCoins<'a> {
    tape: &'a [u64],
    pos: usize,
}

impl<'a> ReplayCoins<'a> {
    pub fn new(tape: &'a Tape) -> Self {
        ReplayCoins { tape: &tape.0, pos: 0 }
    }

    /// Errors unless every recorded draw was consumed.
    pub fn finish(self) -> Result<()> {
        if self.pos != self.tape.len() {
            return Err(Error::Replay(format!(
                "{} of {} draws consumed",
                self.pos,
                self.tape.len()
            )));
        }
        Ok(())
    }

    fn next(&mut self, arity: u64) -> Result<u64> {
        let v = *self
            .tape
            .get(self.pos)
            .ok_or_else(|| Error::Replay("tape exhausted".into()))?;
        if v >= arity {
            return Err(Error::Replay(format!("draw {v} outside range {arity}")));
        }
        self.pos += 1;
        Ok(v)
    }
}

impl Coins for ReplayCoins<'_> {
    fn uniform(&mut self, n: u64) -> Result<u64> {
        check_arity(n)?;
        self.next(n)
    }

    fn bernoulli(&mut self, p: Prob) -> Result<bool> {
        let b = self.next(2)? == 1;
        let impossible = match p {
            Prob::Ratio { num, den } => (b && num == 0) || (!b && num == den),
            Prob::Fixed(t) => b && t == 0,
        };
        if impossible {
            return Err(Error::Replay("tape takes a zero-probability branch".into()));
        }
        Ok(b)
    }
}

#[derive(Clone, Debug)]
struct Choice {
    value: u64,
    arity: u64,
    /// For coins the value-1 branch probability; `None` for uniform draws.
    coin: Option<Prob>,
}

impl Choice {
    fn weight(&self) -> BigRational {
        match self.coin {
            None => BigRational::new(BigInt::one(), self.arity.into()),
            Some(p) => {
                let q = p.to_rational();
                if self.value == 1 {
                    q
                } else {
                    BigRational::one() - q
                }
            }
        }
    }

    /// Next admissible value at this position, skipping zero-probability
    /// coin outcomes.
    fn successor(&self) -> Option<u64> {
        let mut v = self.value + 1;
        while v < self.arity {
            let c = Choice {
                value: v,
                ..self.clone()
            };
            if !c.weight().is_zero() {
                return Some(v);
            }
            v += 1;
        }
        None
    }
}

/// Depth-first explorer: each pass follows a forced prefix and then takes
/// the first admissible branch at every new choice.
struct ExploringCoins {
    prefix: Vec<u64>,
    path: Vec<Choice>,
}

impl ExploringCoins {
    fn take(&mut self, arity: u64, coin: Option<Prob>) -> u64 {
        let depth = self.path.len();
        let value = match self.prefix.get(depth) {
            Some(&v) => v,
            None => {
                let first = Choice { value: 0, arity, coin };
                if first.weight().is_zero() {
                    1
                } else {
                    0
                }
            }
        };
        self.path.push(Choice { value, arity, coin });
        value
    }
}

impl Coins for ExploringCoins {
    fn uniform(&mut self, n: u64) -> Result<u64> {
        check_arity(n)?;
        Ok(self.take(n, None))
    }

    fn bernoulli(&mut self, p: Prob) -> Result<bool> {
        Ok(self.take(2, Some(p)) == 1)
    }
}

/// One leaf of an exhaustive exploration.
#[derive(Clone, Debug)]
pub struct Leaf<T> {
    pub prob: BigRational,
    pub tape: Tape,
    pub value: T,
}

/// Run `f` once per admissible path through its coins and return every
/// leaf with its exact probability. Leaf probabilities sum to one.
///
/// Fails with [`Error::BudgetExceeded`] once more than `budget` leaves have
/// been produced.
pub fn explore<T>(budget: u128, mut f: impl FnMut(&mut dyn Coins) -> Result<T>) -> Result<Vec<Leaf<T>>> {
    let mut leaves = Vec::new();
    let mut prefix = Vec::new();
    loop {
        let mut coins = ExploringCoins {
            prefix: std::mem::take(&mut prefix),
            path: Vec::new(),
        };
        let value = f(&mut coins)?;
        let path = coins.path;
        let prob = path.iter().fold(BigRational::one(), |acc, c| acc * c.weight());
        leaves.push(Leaf {
            prob,
            tape: Tape(path.iter().map(|c| c.value).collect()),
            value,
        });
        if leaves.len() as u128 > budget {
            return Err(Error::BudgetExceeded {
                branches: leaves.len() as u128,
                budget,
            });
        }
        let Some(pivot) = path.iter().rposition(|c| c.successor().is_some()) else {
            return Ok(leaves);
        };
        prefix = path[..pivot].iter().map(|c| c.value).collect();
        prefix.push(path[pivot].successor().expect("checked"));
    }
}

/// A uniformly random `size`-subset of `0..from`, ascending. Index `k` is
/// kept with probability (still needed) / (still available), so every
/// subset arises from exactly one path.
pub fn uniform_subset(size: usize, from: usize, coins: &mut dyn Coins) -> Result<Vec<usize>> {
    if size > from {
        return Err(Error::param("size", format!("{size} > {from}")));
    }
    let mut chosen = Vec::with_capacity(size);
    for k in 0..from {
        let need = (size - chosen.len()) as u64;
        let left = (from - k) as u64;
        if need == 0 {
            break;
        }
        if need == left || coins.bernoulli(Prob::ratio(need, left)?)? {
            chosen.push(k);
        }
    }
    Ok(chosen)
}
