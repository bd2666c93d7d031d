//! Pairwise-independent hash families.
//!
//! [`AffineHash`] maps an integer domain to `[0, R)` by
//! `x -> ((a*x + b) mod p) mod R` with `p >= max(domain, R) * 2^40`. The
//! final reduction mod `R` makes the family only approximately pairwise
//! independent: collision probability is at most `(1 + 2^-40) / R`.
//!
//! [`ToeplitzHash`] maps `{0,1}^cols` to `{0,1}^rows` by `x -> T x + v` over
//! GF(2), with `T` a Toeplitz matrix. It is exactly pairwise independent.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::prime::hash_prime_at_least;
use crate::model::Coins;
use crate::{Error, Result};

/// Slack factor between the prime and `max(domain, range)`.
pub const HASH_SLACK_BITS: u32 = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineHash {
    pub p: u128,
    pub a: u128,
    pub b: u128,
    pub domain: u64,
    pub range: u64,
}

/// `(a * x) mod p` for `a < p < 2^127`.
fn mul_small(a: u128, x: u64, p: u128) -> u128 {
    let x = x as u128;
    if a >> 64 == 0 {
        return (a * x) % p;
    }
    let hi = (a >> 64) * x % p;
    let lo = (a & u64::MAX as u128) * x % p;
    // hi * 2^64 mod p by repeated doubling
    let mut acc = hi;
    for _ in 0..64 {
        acc <<= 1;
        if acc >= p {
            acc -= p;
        }
    }
    let s = acc + lo;
    if s >= p {
        s - p
    } else {
        s
    }
}

impl AffineHash {
    pub fn prime_for(domain: u64, range: u64) -> Result<u128> {
        let bound = (domain.max(range) as u128) << HASH_SLACK_BITS;
        hash_prime_at_least(bound)
    }

    /// Draw a member of the family.
    pub fn sample(domain: u64, range: u64, rng: &mut dyn RngCore) -> Result<Self> {
        if domain == 0 || range == 0 {
            return Err(Error::param("domain/range", "must be at least 1"));
        }
        let p = Self::prime_for(domain, range)?;
        Ok(AffineHash {
            p,
            a: rng.gen_range(0..p),
            b: rng.gen_range(0..p),
            domain,
            range,
        })
    }

    pub fn eval(&self, x: u64) -> Result<u64> {
        if x >= self.domain {
            return Err(Error::param("x", format!("{x} outside domain [0, {})", self.domain)));
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: u64) -> u64 {
        let v = mul_small(self.a, x, self.p) + self.b;
        let v = if v >= self.p { v - self.p } else { v };
        (v % self.range as u128) as u64
    }

    /// Call `f(x, h(x))` for every `x` in the domain, computed incrementally.
    pub fn for_each_value(&self, mut f: impl FnMut(usize, u64)) {
        if self.p < 1 << 63 {
            let (p, a, r) = (self.p as u64, self.a as u64, self.range);
            let mut acc = self.b as u64;
            for x in 0..self.domain as usize {
                f(x, acc % r);
                acc += a;
                if acc >= p {
                    acc -= p;
                }
            }
        } else {
            for (x, v) in self.eval_all().enumerate() {
                f(x, v);
            }
        }
    }

    /// Values at `0, 1, ..., domain-1`, computed incrementally.
    pub fn eval_all(&self) -> impl Iterator<Item = u64> + '_ {
        let mut acc = self.b;
        (0..self.domain).map(move |_| {
            let out = (acc % self.range as u128) as u64;
            acc += self.a;
            if acc >= self.p {
                acc -= self.p;
            }
            out
        })
    }
}

/// `x -> T x + v` over GF(2) with `T` a `rows x cols` Toeplitz matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ToeplitzHash {
    rows: usize,
    cols: usize,
    /// `T[r][c] = diagonals[r + cols - 1 - c]`.
    diagonals: Vec<bool>,
    offset: Vec<bool>,
}

impl ToeplitzHash {
    pub fn new(rows: usize, cols: usize, diagonals: Vec<bool>, offset: Vec<bool>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::param("rows/cols", "must be at least 1"));
        }
        if diagonals.len() != rows + cols - 1 || offset.len() != rows {
            return Err(Error::param("diagonals/offset", "wrong description length"));
        }
        Ok(ToeplitzHash {
            rows,
            cols,
            diagonals,
            offset,
        })
    }

    /// Number of random bits describing one member.
    pub fn description_bits(rows: usize, cols: usize) -> usize {
        2 * rows + cols - 1
    }

    pub fn sample(rows: usize, cols: usize, coins: &mut dyn Coins) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::param("rows/cols", "must be at least 1"));
        }
        let diagonals = coins.bits(rows + cols - 1)?;
        let offset = coins.bits(rows)?;
        Self::new(rows, cols, diagonals, offset)
    }

    /// Description as a bit string: diagonals, then offset.
    pub fn to_bits(&self) -> Vec<bool> {
        let mut out = self.diagonals.clone();
        out.extend(&self.offset);
        out
    }

    pub fn from_bits(rows: usize, cols: usize, bits: &[bool]) -> Result<Self> {
        if bits.len() != Self::description_bits(rows, cols) {
            return Err(Error::Decode(format!(
                "hash description has {} bits, expected {}",
                bits.len(),
                Self::description_bits(rows, cols)
            )));
        }
        let split = rows + cols - 1;
        Self::new(rows, cols, bits[..split].to_vec(), bits[split..].to_vec())
    }

    pub fn eval(&self, x: &[bool]) -> Result<Vec<bool>> {
        if x.len() != self.cols {
            return Err(Error::param("x", format!("{} bits, expected {}", x.len(), self.cols)));
        }
        Ok((0..self.rows)
            .map(|r| {
                let dot = x
                    .iter()
                    .enumerate()
                    .filter(|(c, &xc)| xc && self.diagonals[r + self.cols - 1 - c])
                    .count();
                (dot % 2 == 1) ^ self.offset[r]
            })
            .collect())
    }
}
