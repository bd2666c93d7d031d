//! One-bit local-hashing frequency oracle.
//!
//! Party `i` holds a public hash `h_i: X -> {-1, +1}` derived from the
//! public string and publishes one bit `c_i = h_i(x_i) * r_i`, where `r_i`
//! is `+1` with probability `e^eps / (e^eps + 1)`. The estimate for `y` is
//! `D(y) = (e^eps + 1) / (e^eps - 1) * sum_i c_i h_i(y)`, which is unbiased.
//!
//! The keep probability is the exact rational `E / (E + 1)` where `E` is the
//! double-precision value of `e^eps`, so the two-point likelihood ratio of
//! each report is exactly `E`.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::model::{
    seed, tag, Analyzer, ChannelOutput, Coins, Message, Outcome, Prob, ProtocolSpec, Randomizer, RoundContext,
    RoundSpec,
};
use crate::primitives::AffineHash;
use crate::{Error, Result};

/// Bits of public randomness the oracle's hashes are derived from.
pub const PUBLIC_BITS: usize = 256;

const HASH_LABEL: &str = "ldp-party-hash";

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::param("epsilon", format!("{epsilon} must be positive")));
    }
    Ok(())
}

/// `e^eps` as an exact rational (the double-precision value).
pub fn exp_rational(epsilon: f64) -> Result<BigRational> {
    BigRational::from_float(epsilon.exp()).ok_or_else(|| Error::param("epsilon", "exp(epsilon) is not finite"))
}

/// Probability that a report keeps the true hash value.
pub fn keep_probability(epsilon: f64) -> Result<Prob> {
    check_epsilon(epsilon)?;
    let e = exp_rational(epsilon)?;
    let (num, den) = (e.numer().clone(), e.denom().clone());
    let total = &num + &den;
    match (num.to_u64(), total.to_u64()) {
        (Some(n), Some(t)) => Prob::ratio(n, t),
        _ => Prob::fixed(epsilon.exp() / (epsilon.exp() + 1.0)),
    }
}

/// `max_v Pr[c = v | x] / Pr[c = v | x']` over two inputs whose hashes
/// differ, computed exactly from the report distribution.
pub fn likelihood_ratio(epsilon: f64) -> Result<BigRational> {
    let keep = keep_probability(epsilon)?.to_rational();
    let flip = BigRational::from_integer(1.into()) - &keep;
    let a = &keep / &flip;
    let b = &flip / &keep;
    Ok(if a > b { a } else { b })
}

/// Debiasing factor `(e^eps + 1) / (e^eps - 1)`.
pub fn debias_factor(epsilon: f64) -> f64 {
    let e = epsilon.exp();
    (e + 1.0) / (e - 1.0)
}

/// The public `+-1` hash of `party` over a domain of `domain` values.
pub fn party_hash(w: &[u8], party: usize, domain: u64) -> Result<AffineHash> {
    AffineHash::sample(domain, 2, &mut seed::public_derived(w, HASH_LABEL, party as u64))
}

fn sign(v: u64) -> i64 {
    if v == 1 {
        1
    } else {
        -1
    }
}

/// One report: the bit encodes `+1` as `true`.
pub fn ldp_report(value: u64, hash: &AffineHash, keep: Prob, coins: &mut dyn Coins) -> Result<bool> {
    let h = hash.eval(value)? == 1;
    let kept = coins.bernoulli(keep)?;
    Ok(if kept { h } else { !h })
}

pub fn report_message(bit: bool) -> Message {
    Message::builder(tag::LDP_BIT).uint(bit as u64).finish()
}

pub fn parse_report(m: &Message) -> Result<bool> {
    if m.tag() != tag::LDP_BIT {
        return Err(Error::Decode(format!("not a report: {m:?}")));
    }
    match m.field_u64(0)? {
        0 => Ok(false),
        1 => Ok(true),
        v => Err(Error::Decode(format!("report bit {v}"))),
    }
}

/// The data structure `D` built from one report per party.
#[derive(Clone, Debug, Serialize)]
pub struct FrequencyOracle {
    pub epsilon: f64,
    pub n: usize,
    pub domain: u64,
    pub hashes: Vec<AffineHash>,
    /// `+1` reports are `true`.
    pub bits: Vec<bool>,
}

impl FrequencyOracle {
    pub fn new(epsilon: f64, domain: u64, hashes: Vec<AffineHash>, bits: Vec<bool>) -> Result<Self> {
        check_epsilon(epsilon)?;
        if hashes.len() != bits.len() {
            return Err(Error::param("bits", "one report per party required"));
        }
        Ok(FrequencyOracle {
            epsilon,
            n: bits.len(),
            domain,
            hashes,
            bits,
        })
    }

    /// Rebuild the oracle from a public-round output and the public string.
    pub fn from_channel(epsilon: f64, domain: u64, w: &[u8], output: &ChannelOutput) -> Result<Self> {
        let msgs = match output {
            ChannelOutput::Public(m) => m,
            ChannelOutput::Shuffle(_) => return Err(Error::Decode("reports travel on a public channel".into())),
        };
        let hashes = (0..msgs.len())
            .map(|i| party_hash(w, i, domain))
            .collect::<Result<Vec<_>>>()?;
        let bits = msgs.iter().map(parse_report).collect::<Result<Vec<_>>>()?;
        Self::new(epsilon, domain, hashes, bits)
    }

    /// Unscaled sum `sum_i c_i h_i(y)`.
    pub fn raw(&self, y: u64) -> Result<i64> {
        let mut s = 0i64;
        for (h, &c) in self.hashes.iter().zip(&self.bits) {
            s += sign(c as u64) * sign(h.eval(y)?);
        }
        Ok(s)
    }

    pub fn query(&self, y: u64) -> Result<f64> {
        Ok(debias_factor(self.epsilon) * self.raw(y)? as f64)
    }

    /// Estimates for every domain element.
    pub fn query_all(&self) -> Vec<f64> {
        let mut acc = vec![0i64; self.domain as usize];
        for (h, &c) in self.hashes.iter().zip(&self.bits) {
            let c = sign(c as u64);
            h.for_each_value(|y, v| acc[y] += c * sign(v));
        }
        let f = debias_factor(self.epsilon);
        acc.into_iter().map(|s| f * s as f64).collect()
    }

    /// Largest estimate over `candidates`, ties to the smallest candidate.
    pub fn argmax(&self, candidates: impl IntoIterator<Item = u64>) -> Result<Option<(u64, f64)>> {
        let mut best: Option<(u64, i64)> = None;
        for y in candidates {
            let r = self.raw(y)?;
            best = match best {
                Some((by, br)) if br > r || (br == r && by < y) => Some((by, br)),
                _ => Some((y, r)),
            };
        }
        Ok(best.map(|(y, r)| (y, debias_factor(self.epsilon) * r as f64)))
    }

    /// Argmax over the whole domain.
    pub fn argmax_all(&self) -> Option<(u64, f64)> {
        let est = self.query_all();
        let mut best: Option<(u64, f64)> = None;
        for (y, v) in est.into_iter().enumerate() {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((y as u64, v));
            }
        }
        best
    }
}

/// Randomizer for a domain-element input.
#[derive(Clone, Debug)]
pub struct LdpRandomizer {
    pub epsilon: f64,
    pub domain: u64,
    keep: Prob,
}

impl LdpRandomizer {
    pub fn new(epsilon: f64, domain: u64) -> Result<Self> {
        Ok(LdpRandomizer {
            epsilon,
            domain,
            keep: keep_probability(epsilon)?,
        })
    }
}

impl Randomizer for LdpRandomizer {
    fn message_count(&self, round: usize) -> usize {
        (round == 0) as usize
    }

    fn generate(&self, ctx: &RoundContext<'_>, coins: &mut dyn Coins) -> Result<Vec<Message>> {
        let h = party_hash(ctx.w, ctx.party, self.domain)?;
        let bit = ldp_report(ctx.input.element()?, &h, self.keep, coins)?;
        Ok(vec![report_message(bit)])
    }
}

/// Publishes every estimate, scaled by 10^6 and rounded, as values.
struct HistogramAnalyzer {
    epsilon: f64,
    domain: u64,
}

impl Analyzer for HistogramAnalyzer {
    fn analyze(&self, w: &[u8], outputs: &[ChannelOutput]) -> Result<Outcome> {
        let d = FrequencyOracle::from_channel(self.epsilon, self.domain, w, &outputs[0])?;
        Ok(Outcome::Element(d.argmax_all().map(|(y, _)| y).unwrap_or(0)))
    }
}

/// One public round of reports; the analyzer outputs the domain argmax.
pub fn ldp_histogram_spec(n: usize, epsilon: f64, domain: u64) -> Result<ProtocolSpec> {
    let rz = Arc::new(LdpRandomizer::new(epsilon, domain)?);
    ProtocolSpec::new(
        "ldp-histogram",
        vec![RoundSpec::public()],
        (0..n).map(|_| rz.clone() as Arc<dyn Randomizer>).collect(),
        Arc::new(HistogramAnalyzer { epsilon, domain }),
        PUBLIC_BITS,
    )
}

/// Build the oracle for `inputs` directly from the seed (same streams as a
/// protocol run).
pub fn ldp_histogram(inputs: &[u64], epsilon: f64, domain: u64, seed: u64) -> Result<FrequencyOracle> {
    let keep = keep_probability(epsilon)?;
    let w = seed::public_randomness(seed, PUBLIC_BITS);
    let mut hashes = Vec::with_capacity(inputs.len());
    let mut bits = Vec::with_capacity(inputs.len());
    for (i, &x) in inputs.iter().enumerate() {
        let h = party_hash(&w, i, domain)?;
        let mut rng = seed::party_stream(seed, i, 0);
        let mut coins = crate::model::SamplingCoins::new(&mut rng);
        bits.push(ldp_report(x, &h, keep, &mut coins)?);
        hashes.push(h);
    }
    FrequencyOracle::new(epsilon, domain, hashes, bits)
}

/// Exact expectation of `D(y)` for fixed hashes, averaging only over the
/// report coins.
pub fn expected_estimate(d: &FrequencyOracle, inputs: &[u64], y: u64) -> Result<BigRational> {
    let keep = keep_probability(d.epsilon)?.to_rational();
    let bias = &keep + &keep - BigRational::from_integer(1.into());
    let mut s = BigRational::zero();
    for (h, &x) in d.hashes.iter().zip(inputs) {
        s += BigRational::from_integer(BigInt::from(sign(h.eval(x)?) * sign(h.eval(y)?)));
    }
    Ok(s * bias)
}
