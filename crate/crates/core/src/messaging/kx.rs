//! One-round key exchange through the shuffle.
//!
//! Both endpoints send one tagged bit per index. The shuffle reveals, for
//! each index, only the multiset of the two bits, so both endpoints learn
//! where their bits disagree while an observer learns nothing about the
//! owner's bit at those indices.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::model::{tag, Coins, Message};
use crate::{Error, Result};

/// Identifies one directed instance between two parties. Both endpoints
/// list the pair as `(lo, hi)`; `direction` is 0 when `lo` is the sender.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairTag {
    pub lo: usize,
    pub hi: usize,
    pub direction: u8,
}

impl PairTag {
    pub fn new(sender: usize, receiver: usize) -> Result<Self> {
        if sender == receiver {
            return Err(Error::param("pair", format!("party {sender} paired with itself")));
        }
        Ok(PairTag {
            lo: sender.min(receiver),
            hi: sender.max(receiver),
            direction: (sender > receiver) as u8,
        })
    }

    pub fn sender(&self) -> usize {
        if self.direction == 0 {
            self.lo
        } else {
            self.hi
        }
    }

    pub fn receiver(&self) -> usize {
        if self.direction == 0 {
            self.hi
        } else {
            self.lo
        }
    }

    /// `KEY_BIT (lo, hi, direction, index, bit)`.
    pub fn bit_message(&self, index: usize, bit: bool) -> Message {
        Message::builder(tag::KEY_BIT)
            .uint(self.lo as u64)
            .uint(self.hi as u64)
            .uint(self.direction as u64)
            .uint(index as u64)
            .uint(bit as u64)
            .finish()
    }

    pub(crate) fn matches(&self, m: &Message) -> Result<bool> {
        Ok(m.field_u64(0)? == self.lo as u64
            && m.field_u64(1)? == self.hi as u64
            && m.field_u64(2)? == self.direction as u64)
    }

    /// Number of one-bits published at each index, for indices `< count`.
    pub fn ones_per_index(&self, output: &[Message], count: usize) -> Result<Vec<u8>> {
        let mut ones = vec![0u8; count];
        let mut seen = vec![0u8; count];
        for m in output.iter().filter(|m| m.tag() == tag::KEY_BIT) {
            if !self.matches(m)? {
                continue;
            }
            let idx = m.field_u64(3)? as usize;
            if idx >= count {
                return Err(Error::Decode(format!("key bit index {idx} out of range")));
            }
            seen[idx] += 1;
            ones[idx] += m.field_u64(4)? as u8;
        }
        if seen.iter().any(|&s| s != 2) {
            return Err(Error::Decode(format!("pair {self:?}: expected two bits per index")));
        }
        Ok(ones)
    }
}

/// Result of a key exchange as seen by one endpoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KeyExchangeOutcome {
    Key(Vec<bool>),
    Fail,
}

/// Which endpoint's bits form the key.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Owner,
    Peer,
}

/// Derive the outcome from own bits and the published per-index counts.
pub fn derive_key(own: &[bool], ones: &[u8], k: usize, role: Role) -> KeyExchangeOutcome {
    let key: Vec<bool> = own
        .iter()
        .zip(ones)
        .filter(|(_, &o)| o == 1)
        .map(|(&b, _)| match role {
            Role::Owner => b,
            Role::Peer => !b,
        })
        .take(k)
        .collect();
    if key.len() == k {
        KeyExchangeOutcome::Key(key)
    } else {
        KeyExchangeOutcome::Fail
    }
}

/// A complete exchange between `owner` and `peer`.
#[derive(Clone, Debug)]
pub struct KeyExchangeRun {
    pub shuffled: Vec<Message>,
    pub owner: KeyExchangeOutcome,
    pub peer: KeyExchangeOutcome,
}

pub fn key_exchange(
    owner: usize,
    peer: usize,
    k: usize,
    owner_coins: &mut dyn Coins,
    peer_coins: &mut dyn Coins,
) -> Result<KeyExchangeRun> {
    if k == 0 {
        return Err(Error::param("k", "security parameter must be at least 1"));
    }
    let pair = PairTag::new(owner, peer)?;
    let a = owner_coins.bits(3 * k)?;
    let b = peer_coins.bits(3 * k)?;
    key_exchange_with_bits(pair, k, &a, &b)
}

/// Deterministic part of the exchange for given bit strings.
pub fn key_exchange_with_bits(pair: PairTag, k: usize, a: &[bool], b: &[bool]) -> Result<KeyExchangeRun> {
    let mut msgs: Vec<Message> = a
        .iter()
        .enumerate()
        .chain(b.iter().enumerate())
        .map(|(i, &bit)| pair.bit_message(i, bit))
        .collect();
    msgs.sort_unstable();
    let ones = pair.ones_per_index(&msgs, a.len())?;
    Ok(KeyExchangeRun {
        owner: derive_key(a, &ones, k, Role::Owner),
        peer: derive_key(b, &ones, k, Role::Peer),
        shuffled: msgs,
    })
}

fn binomial(n: u64, r: u64) -> BigUint {
    (0..r).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// Number of outcomes of `3k` fair coins with fewer than `k` disagreements.
pub fn kx_failure_count(k: u64) -> BigUint {
    (0..k).map(|i| binomial(3 * k, i)).fold(BigUint::zero(), |a, b| a + b)
}

/// Exact `Pr[Bin(3k, 1/2) <= k - 1]`.
pub fn kx_failure_probability(k: u64) -> BigRational {
    BigRational::new(kx_failure_count(k).into(), (BigUint::one() << (3 * k)).into())
}

/// Whether the failure probability is at most `2^-k`, decided exactly.
pub fn kx_failure_within_bound(k: u64) -> bool {
    kx_failure_count(k) <= BigUint::one() << (2 * k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SamplingCoins;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn worked_trace() {
        let pair = PairTag::new(0, 1).unwrap();
        let run = key_exchange_with_bits(pair, 1, &[false, true, true], &[true, true, false]).unwrap();
        assert_eq!(run.owner, KeyExchangeOutcome::Key(vec![false]));
        assert_eq!(run.peer, run.owner);
    }

    #[test]
    fn equal_strings_fail() {
        let pair = PairTag::new(2, 1).unwrap();
        let bits = [true, false, true, true, false, false];
        let run = key_exchange_with_bits(pair, 2, &bits, &bits).unwrap();
        assert_eq!(run.owner, KeyExchangeOutcome::Fail);
        assert_eq!(run.peer, KeyExchangeOutcome::Fail);
    }

    #[test]
    fn failure_probability_k1() {
        assert_eq!(kx_failure_probability(1), BigRational::new(1.into(), 8.into()));
        assert!(kx_failure_within_bound(1));
    }

    #[test]
    fn failure_count_matches_brute_force() {
        for k in 1..=4u64 {
            let brute = (0..1u32 << (3 * k)).filter(|v| v.count_ones() < k as u32).count();
            assert_eq!(kx_failure_count(k), BigUint::from(brute), "k = {k}");
        }
        // the tail decays like 2^(-0.245k), so 2^-k only holds for small k
        assert!((1..=3).all(kx_failure_within_bound));
        assert!(!kx_failure_within_bound(4));
    }

    #[test]
    fn self_pair_rejected() {
        assert!(PairTag::new(3, 3).is_err());
    }

    #[test]
    fn ordered_pairs_use_disjoint_tags() {
        let ab = PairTag::new(1, 2).unwrap();
        let ba = PairTag::new(2, 1).unwrap();
        assert_ne!(ab, ba);
        assert_eq!((ab.sender(), ab.receiver()), (1, 2));
        assert_eq!((ba.sender(), ba.receiver()), (2, 1));
        for i in 0..4 {
            for b in [false, true] {
                assert_ne!(ab.bit_message(i, b), ba.bit_message(i, b));
            }
        }
    }

    #[test]
    fn disagreeing_index_hides_the_owner_bit() {
        let pair = PairTag::new(0, 1).unwrap();
        let x = key_exchange_with_bits(pair, 1, &[false], &[true]).unwrap();
        let y = key_exchange_with_bits(pair, 1, &[true], &[false]).unwrap();
        assert_eq!(x.shuffled, y.shuffled);
        assert_ne!(x.owner, y.owner);
    }

    #[test]
    fn endpoints_agree() {
        let mut ra = ChaCha8Rng::seed_from_u64(1);
        let mut rb = ChaCha8Rng::seed_from_u64(2);
        for k in [4, 8, 16] {
            for _ in 0..500 {
                let mut ca = SamplingCoins::new(&mut ra);
                let mut cb = SamplingCoins::new(&mut rb);
                let run = key_exchange(0, 1, k, &mut ca, &mut cb).unwrap();
                assert_eq!(run.owner, run.peer);
            }
        }
    }
}
