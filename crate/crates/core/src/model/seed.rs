//! Deterministic derivation of per-party and public randomness streams.
//!
//! Every stream is a ChaCha8 generator keyed by a SHA-256 digest of a
//! domain-separation label and the master seed, so each (party, round)
//! stream is independent of every other party's inputs and consumption.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

fn derive(label: &[u8], parts: &[u64]) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update((label.len() as u64).to_be_bytes());
    h.update(label);
    for p in parts {
        h.update(p.to_be_bytes());
    }
    ChaCha8Rng::from_seed(h.finalize().into())
}

/// Stream for `party` in `round`.
pub fn party_stream(seed: u64, party: usize, round: usize) -> ChaCha8Rng {
    derive(b"party", &[seed, party as u64, round as u64])
}

/// Stream used to draw the public random string.
pub fn public_stream(seed: u64) -> ChaCha8Rng {
    derive(b"public", &[seed])
}

/// Independent stream for harness-level randomness (input sampling,
/// trial scheduling) identified by a label.
pub fn aux_stream(label: &str, seed: u64, index: u64) -> ChaCha8Rng {
    derive(label.as_bytes(), &[seed, index])
}

/// Stream expanded from the public string, for public objects such as hash
/// functions that every party must derive identically.
pub fn public_derived(w: &[u8], label: &str, index: u64) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update((label.len() as u64).to_be_bytes());
    h.update(label.as_bytes());
    h.update((w.len() as u64).to_be_bytes());
    h.update(w);
    h.update(index.to_be_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

/// Public random string of `bits` bits, stored in `ceil(bits / 8)` bytes
/// with unused trailing bits cleared.
pub fn public_randomness(seed: u64, bits: usize) -> Vec<u8> {
    let mut w = vec![0u8; bits.div_ceil(8)];
    public_stream(seed).fill_bytes(&mut w);
    mask_bits(&mut w, bits);
    w
}

pub(crate) fn mask_bits(w: &mut [u8], bits: usize) {
    let spare = w.len() * 8 - bits;
    if spare > 0 {
        if let Some(last) = w.last_mut() {
            *last &= 0xffu8 << spare;
        }
    }
}

/// A 64-bit value read from `w` starting at byte `offset` (zero-padded).
pub fn word(w: &[u8], offset: usize) -> u64 {
    let mut buf = [0u8; 8];
    for (i, b) in buf.iter_mut().enumerate() {
        *b = w.get(offset + i).copied().unwrap_or(0);
    }
    u64::from_be_bytes(buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_separated() {
        let a = party_stream(1, 0, 0).next_u64();
        assert_ne!(a, party_stream(1, 1, 0).next_u64());
        assert_ne!(a, party_stream(1, 0, 1).next_u64());
        assert_ne!(a, party_stream(2, 0, 0).next_u64());
        assert_eq!(a, party_stream(1, 0, 0).next_u64());
    }

    #[test]
    fn public_string_is_masked() {
        for bits in 0..40 {
            let w = public_randomness(9, bits);
            assert_eq!(w.len(), bits.div_ceil(8));
            let set: usize = w.iter().map(|b| b.count_ones() as usize).sum();
            assert!(set <= bits);
            if bits % 8 != 0 {
                assert_eq!(w.last().unwrap() & (0xff >> (bits % 8)), 0);
            }
        }
    }
}
