//! One-round secure message transmission.
//!
//! Sender and receiver each publish `7k` tagged bits as in key exchange.
//! The sender additionally publishes a Toeplitz hash `h: {0,1}^7k -> {0,1}^k`
//! and `c = h(a) xor pad(M)`. The receiver recovers every sender bit from
//! its own bits and the per-index multisets, hence `h(a)` and `M`.
//!
//! `pad(M)` is `M` zero-extended to `k` bits. The message length is part of
//! the ciphertext message and is therefore public.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_rational::BigRational;

use super::kx::PairTag;
use crate::model::{tag, Coins, Message};
use crate::primitives::ToeplitzHash;
use crate::{Error, Result};

/// Random choices of the sending endpoint of one instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SenderDraws {
    pub bits: Vec<bool>,
    pub hash: ToeplitzHash,
}

pub fn draw_sender(k: usize, coins: &mut dyn Coins) -> Result<SenderDraws> {
    Ok(SenderDraws {
        bits: coins.bits(7 * k)?,
        hash: ToeplitzHash::sample(k, 7 * k, coins)?,
    })
}

pub fn draw_receiver(k: usize, coins: &mut dyn Coins) -> Result<Vec<bool>> {
    coins.bits(7 * k)
}

/// Messages of one instance: `7k` from each endpoint plus the ciphertext.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmtBundle {
    pub sender: Vec<Message>,
    pub receiver: Vec<Message>,
}

impl SmtBundle {
    pub fn all(&self) -> impl Iterator<Item = &Message> {
        self.sender.iter().chain(&self.receiver)
    }
}

fn check_message(m: &[bool], k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::param("k", "security parameter must be at least 1"));
    }
    if m.len() > k {
        return Err(Error::param("message", format!("{} bits exceed k = {k}", m.len())));
    }
    Ok(())
}

fn xor(a: &[bool], b: &[bool]) -> Vec<bool> {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

fn pad(m: &[bool], k: usize) -> Vec<bool> {
    let mut p = m.to_vec();
    p.resize(k, false);
    p
}

/// The sender's `7k + 1` messages.
pub fn smt_send(pair: PairTag, message: &[bool], k: usize, draws: &SenderDraws) -> Result<Vec<Message>> {
    check_message(message, k)?;
    let mut out: Vec<Message> = draws
        .bits
        .iter()
        .enumerate()
        .map(|(i, &b)| pair.bit_message(i, b))
        .collect();
    let cipher = xor(&draws.hash.eval(&draws.bits)?, &pad(message, k));
    out.push(
        Message::builder(tag::CIPHERTEXT)
            .uint(pair.lo as u64)
            .uint(pair.hi as u64)
            .uint(pair.direction as u64)
            .uint(message.len() as u64)
            .bits(&draws.hash.to_bits())
            .bits(&cipher)
            .finish(),
    );
    Ok(out)
}

/// The receiver's `7k` messages.
pub fn smt_receiver_messages(pair: PairTag, bits: &[bool]) -> Vec<Message> {
    bits.iter().enumerate().map(|(i, &b)| pair.bit_message(i, b)).collect()
}

pub fn smt_bundle(
    pair: PairTag,
    message: &[bool],
    k: usize,
    sender: &SenderDraws,
    receiver: &[bool],
) -> Result<SmtBundle> {
    Ok(SmtBundle {
        sender: smt_send(pair, message, k, sender)?,
        receiver: smt_receiver_messages(pair, receiver),
    })
}

/// The ciphertext message of `pair` in a shuffle output, parsed.
pub fn find_ciphertext(pair: PairTag, k: usize, output: &[Message]) -> Result<(usize, ToeplitzHash, Vec<bool>)> {
    let mut found = None;
    for m in output.iter().filter(|m| m.tag() == tag::CIPHERTEXT) {
        if !pair.matches(m)? {
            continue;
        }
        if found.is_some() {
            return Err(Error::Decode(format!("pair {pair:?}: two ciphertexts")));
        }
        let len = m.field_u64(3)? as usize;
        let hash = ToeplitzHash::from_bits(k, 7 * k, &m.field_bits(4)?)?;
        let cipher = m.field_bits(5)?;
        if cipher.len() != k || len > k {
            return Err(Error::Decode("ciphertext has the wrong length".into()));
        }
        found = Some((len, hash, cipher));
    }
    found.ok_or_else(|| Error::Decode(format!("pair {pair:?}: no ciphertext")))
}

/// Recover the message from the receiver's own bits and the shuffle output.
pub fn smt_receive(pair: PairTag, k: usize, own_bits: &[bool], output: &[Message]) -> Result<Vec<bool>> {
    let ones = pair.ones_per_index(output, 7 * k)?;
    let sender_bits: Vec<bool> = ones
        .iter()
        .zip(own_bits)
        .map(|(&o, &b)| match o {
            0 => Ok(false),
            2 => Ok(true),
            1 => Ok(!b),
            _ => Err(Error::Decode("bad bit count".into())),
        })
        .collect::<Result<_>>()?;
    let (len, hash, cipher) = find_ciphertext(pair, k, output)?;
    let mut m = xor(&hash.eval(&sender_bits)?, &cipher);
    m.truncate(len);
    Ok(m)
}

/// Exact total variation distance between the shuffle outputs of one
/// instance carrying `m0` and `m1`, over every choice of both endpoints'
/// bits and the hash. This is the view of every party other than the two
/// endpoints. Cost is `2^(14k) * 2^(9k - 1)` evaluations.
pub fn smt_adversary_distance(k: usize, m0: &[bool], m1: &[bool]) -> Result<BigRational> {
    check_message(m0, k)?;
    check_message(m1, k)?;
    if 23 * k > 26 {
        return Err(Error::BudgetExceeded {
            branches: 1u128 << (23 * k - 1),
            budget: 1 << 26,
        });
    }
    let pair = PairTag::new(0, 1)?;
    let cols = 7 * k;
    let bits_of = |v: u64, len: usize| (0..len).map(|i| v >> i & 1 == 1).collect::<Vec<bool>>();

    // The key-bit part of the sorted output depends only on (a, b); intern it.
    let mut key_ids: HashMap<Vec<u8>, u32> = HashMap::new();
    let mut ids = vec![0u32; 1 << (2 * cols)];
    for a in 0..1u64 << cols {
        for b in 0..1u64 << cols {
            let mut msgs = smt_receiver_messages(pair, &bits_of(a, cols));
            msgs.extend(smt_receiver_messages(pair, &bits_of(b, cols)));
            msgs.sort_unstable();
            let enc: Vec<u8> = msgs.iter().flat_map(|m| m.as_bytes().to_vec()).collect();
            let next = key_ids.len() as u32;
            ids[((a << cols) | b) as usize] = *key_ids.entry(enc).or_insert(next);
        }
    }

    let hash_bits = ToeplitzHash::description_bits(k, cols);
    let mut counts: HashMap<(u32, Vec<u8>), [i64; 2]> = HashMap::new();
    for hv in 0..1u64 << hash_bits {
        let hash = ToeplitzHash::from_bits(k, cols, &bits_of(hv, hash_bits))?;
        for a in 0..1u64 << cols {
            let draws = SenderDraws {
                bits: bits_of(a, cols),
                hash: hash.clone(),
            };
            let c0 = smt_send(pair, m0, k, &draws)?.pop().expect("ciphertext");
            let c1 = smt_send(pair, m1, k, &draws)?.pop().expect("ciphertext");
            for b in 0..1u64 << cols {
                let id = ids[((a << cols) | b) as usize];
                counts.entry((id, c0.as_bytes().to_vec())).or_default()[0] += 1;
                counts.entry((id, c1.as_bytes().to_vec())).or_default()[1] += 1;
            }
        }
    }
    let diff: u64 = counts.values().map(|[x, y]| (x - y).unsigned_abs()).sum();
    let total = BigUint::from(1u8) << (2 * cols + hash_bits);
    Ok(BigRational::new(diff.into(), (total * 2u8).into()))
}
