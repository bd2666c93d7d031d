//! The additive group `Z_q` and vectors over it.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::model::Coins;
use crate::{Error, Result};

fn check_modulus(q: u64) -> Result<()> {
    if q < 2 {
        return Err(Error::param("q", format!("modulus {q} is below 2")));
    }
    Ok(())
}

/// An element of `Z_q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ZqElement {
    value: u64,
    modulus: u64,
}

impl ZqElement {
    pub fn new(value: u64, modulus: u64) -> Result<Self> {
        check_modulus(modulus)?;
        if value >= modulus {
            return Err(Error::param("value", format!("{value} not below modulus {modulus}")));
        }
        Ok(ZqElement { value, modulus })
    }

    /// `value mod q`.
    pub fn reduce(value: u64, modulus: u64) -> Result<Self> {
        check_modulus(modulus)?;
        Ok(ZqElement {
            value: value % modulus,
            modulus,
        })
    }

    pub fn zero(modulus: u64) -> Result<Self> {
        Self::new(0, modulus)
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }

    pub fn try_add(self, rhs: Self) -> Result<Self> {
        same_modulus(self.modulus, rhs.modulus)?;
        Ok(self + rhs)
    }

    pub fn try_sub(self, rhs: Self) -> Result<Self> {
        same_modulus(self.modulus, rhs.modulus)?;
        Ok(self - rhs)
    }
}

fn same_modulus(a: u64, b: u64) -> Result<()> {
    if a != b {
        return Err(Error::ModulusMismatch { left: a, right: b });
    }
    Ok(())
}

pub(crate) fn add_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 + b as u128) % q as u128) as u64
}

pub(crate) fn sub_mod(a: u64, b: u64, q: u64) -> u64 {
    add_mod(a, q - b % q, q)
}

/// Panics on mismatched moduli; use [`ZqElement::try_add`] for untrusted
/// operands.
impl Add for ZqElement {
    type Output = ZqElement;
    fn add(self, rhs: Self) -> Self {
        assert_eq!(self.modulus, rhs.modulus, "modulus mismatch");
        ZqElement {
            value: add_mod(self.value, rhs.value, self.modulus),
            modulus: self.modulus,
        }
    }
}

impl Sub for ZqElement {
    type Output = ZqElement;
    fn sub(self, rhs: Self) -> Self {
        assert_eq!(self.modulus, rhs.modulus, "modulus mismatch");
        ZqElement {
            value: sub_mod(self.value, rhs.value, self.modulus),
            modulus: self.modulus,
        }
    }
}

impl Neg for ZqElement {
    type Output = ZqElement;
    fn neg(self) -> Self {
        ZqElement {
            value: sub_mod(0, self.value, self.modulus),
            modulus: self.modulus,
        }
    }
}

impl fmt::Display for ZqElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

/// A fixed-length vector over `Z_q`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroupVector {
    entries: Vec<u64>,
    modulus: u64,
}

impl GroupVector {
    pub fn new(entries: Vec<u64>, modulus: u64) -> Result<Self> {
        check_modulus(modulus)?;
        if let Some(bad) = entries.iter().find(|&&v| v >= modulus) {
            return Err(Error::param("entries", format!("{bad} not below modulus {modulus}")));
        }
        Ok(GroupVector { entries, modulus })
    }

    pub fn zeros(dim: usize, modulus: u64) -> Result<Self> {
        Self::new(vec![0; dim], modulus)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<u64> {
        self.entries
    }

    pub fn get(&self, idx: usize) -> Option<ZqElement> {
        self.entries.get(idx).map(|&value| ZqElement {
            value,
            modulus: self.modulus,
        })
    }

    pub fn try_add(&self, rhs: &GroupVector) -> Result<GroupVector> {
        same_modulus(self.modulus, rhs.modulus)?;
        if self.len() != rhs.len() {
            return Err(Error::param(
                "dim",
                format!("lengths {} and {} differ", self.len(), rhs.len()),
            ));
        }
        Ok(GroupVector {
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(&a, &b)| add_mod(a, b, self.modulus))
                .collect(),
            modulus: self.modulus,
        })
    }

    /// Indices of zero entries.
    pub fn zero_positions(&self) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == 0)
            .map(|(i, _)| i)
            .collect()
    }
}

/// A uniformly random element of `Z_q`. Under exploring coins this yields
/// `q` branches of probability `1/q`.
pub fn sample_uniform_group(q: u64, coins: &mut dyn Coins) -> Result<ZqElement> {
    check_modulus(q)?;
    Ok(ZqElement {
        value: coins.uniform(q)?,
        modulus: q,
    })
}
