//! Two-round common element protocol with one message per party per round.
//!
//! Round 0 (public channel): every party hashes its input with a public
//! pairwise-independent hash into `[R]` and contributes one report to a
//! histogram over the hashed values. Round 1 (shuffle): if the heaviest
//! hashed value `y*` has estimate at least `98n/100`, parties whose hash is
//! `y*` send their input with probability 1/2; everyone else sends `⊥`.
//! The analyzer outputs the most frequent non-`⊥` value.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{classify, common_value, ElementOutcome};
use crate::histograms::ldp::{self, FrequencyOracle};
use crate::model::{
    run_protocol, seed, tag, Analyzer, ChannelOutput, Coins, Input, Message, Outcome, Prob, ProtocolSpec, Randomizer,
    RoundContext, RoundPreparer, RoundSpec, Transcript,
};
use crate::primitives::AffineHash;
use crate::{Error, Result};

/// Largest range searched exhaustively for the heaviest hashed value.
pub const FULL_RANGE_LIMIT: u64 = 1_000_000;

const HASH_LABEL: &str = "common-element-hash";

/// Substitute histogram that skips the local randomization: parties publish
/// their hashed value and the estimate is derived from exact counts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InjectedHistogram {
    Exact,
    /// `count + shift`.
    Shifted(f64),
    /// `count * factor`.
    Scaled(f64),
}

impl InjectedHistogram {
    pub fn estimate(&self, count: u64) -> f64 {
        match *self {
            InjectedHistogram::Exact => count as f64,
            InjectedHistogram::Shifted(s) => count as f64 + s,
            InjectedHistogram::Scaled(f) => count as f64 * f,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HistogramBackend {
    /// One-bit local hashing with the given privacy parameter.
    Ldp {
        epsilon: f64,
    },
    Injected(InjectedHistogram),
}

/// Where the heaviest hashed value is searched for.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Candidates {
    /// All of `[R]`; only allowed for `R <= FULL_RANGE_LIMIT`.
    FullRange,
    /// Hashes of every domain element.
    DomainImage,
    /// Caller-supplied hashed values.
    Explicit(Vec<u64>),
}

#[derive(Clone, Debug)]
pub struct TwoRoundParams {
    pub n: usize,
    pub domain: u64,
    pub delta: f64,
    /// Upper limit on the hash range `ceil(n^2 / delta)`.
    pub range_cap: Option<u64>,
    pub backend: HistogramBackend,
    pub candidates: Candidates,
}

/// `min(ceil(n^2 / delta), cap)`.
pub fn hash_range(n: usize, delta: f64, cap: Option<u64>) -> Result<u64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", format!("{delta} outside (0, 1)")));
    }
    let r = ((n as f64) * (n as f64) / delta).ceil();
    if !(r < 9.2e18) {
        return Err(Error::param(
            "delta",
            format!("range n^2/delta = {r:e} is not representable"),
        ));
    }
    let r = r as u64;
    Ok(cap.map_or(r, |c| r.min(c)).max(1))
}

/// Result of the round-0 decision, shared by every party.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decision {
    pub heaviest: u64,
    pub estimate: f64,
    /// `true` when the estimate clears `98n/100`.
    pub proceed: bool,
}

/// `estimate < 98n/100`.
pub fn below_threshold(estimate: f64, n: usize) -> bool {
    estimate < 98.0 * n as f64 / 100.0
}

#[derive(Debug)]
struct Shared {
    params: TwoRoundParams,
    range: u64,
    keep: Option<Prob>,
}

impl Shared {
    fn hash(&self, w: &[u8]) -> Result<AffineHash> {
        AffineHash::sample(
            self.params.domain,
            self.range,
            &mut seed::public_derived(w, HASH_LABEL, 0),
        )
    }

    fn candidates(&self, w: &[u8]) -> Result<Vec<u64>> {
        Ok(match &self.params.candidates {
            Candidates::FullRange => {
                if self.range > FULL_RANGE_LIMIT {
                    return Err(Error::param(
                        "candidates",
                        format!("range {} too large to search exhaustively", self.range),
                    ));
                }
                (0..self.range).collect()
            }
            Candidates::DomainImage => {
                let mut v: Vec<u64> = self.hash(w)?.eval_all().collect();
                v.sort_unstable();
                v.dedup();
                v
            }
            Candidates::Explicit(v) => {
                if let Some(y) = v.iter().find(|&&y| y >= self.range) {
                    return Err(Error::param("candidates", format!("{y} outside range {}", self.range)));
                }
                let mut v = v.clone();
                v.sort_unstable();
                v.dedup();
                v
            }
        })
    }

    fn decide(&self, w: &[u8], first: &ChannelOutput) -> Result<Decision> {
        let candidates = self.candidates(w)?;
        if candidates.is_empty() {
            return Err(Error::param("candidates", "empty candidate set"));
        }
        let (heaviest, estimate) = match self.params.backend {
            HistogramBackend::Ldp { epsilon } => {
                let d = FrequencyOracle::from_channel(epsilon, self.range, w, first)?;
                if matches!(self.params.candidates, Candidates::FullRange) {
                    d.argmax_all()
                } else {
                    d.argmax(candidates)?
                }
                .expect("candidates nonempty")
            }
            HistogramBackend::Injected(h) => {
                let mut counts = BTreeMap::new();
                for m in first.messages() {
                    if m.tag() != tag::HASHED {
                        return Err(Error::Decode(format!("expected a hashed value, got {m:?}")));
                    }
                    *counts.entry(m.field_u64(0)?).or_insert(0u64) += 1;
                }
                let mut best: Option<(u64, f64)> = None;
                for y in candidates {
                    let e = h.estimate(counts.get(&y).copied().unwrap_or(0));
                    if best.is_none_or(|(_, b)| e > b) {
                        best = Some((y, e));
                    }
                }
                best.expect("candidates nonempty")
            }
        };
        Ok(Decision {
            heaviest,
            estimate,
            proceed: !below_threshold(estimate, self.params.n),
        })
    }
}

struct Party {
    shared: Arc<Shared>,
}

impl Randomizer for Party {
    fn message_count(&self, round: usize) -> usize {
        (round < 2) as usize
    }

    fn generate(&self, ctx: &RoundContext<'_>, coins: &mut dyn Coins) -> Result<Vec<Message>> {
        let x = ctx.input.element()?;
        let y = self.shared.hash(ctx.w)?.eval(x)?;
        match ctx.round {
            0 => Ok(vec![match (self.shared.params.backend, self.shared.keep) {
                (HistogramBackend::Ldp { .. }, Some(keep)) => {
                    let h = ldp::party_hash(ctx.w, ctx.party, self.shared.range)?;
                    ldp::report_message(ldp::ldp_report(y, &h, keep, coins)?)
                }
                _ => Message::builder(tag::HASHED).uint(y).finish(),
            }]),
            1 => {
                let d = ctx.shared::<Decision>()?;
                let send = d.proceed && y == d.heaviest && coins.bernoulli(Prob::ratio(1, 2)?)?;
                Ok(vec![if send {
                    Message::builder(tag::ELEMENT).uint(x).finish()
                } else {
                    Message::bottom()
                }])
            }
            r => Err(Error::Internal(format!("no round {r}"))),
        }
    }
}

struct Preparer {
    shared: Arc<Shared>,
}

impl RoundPreparer for Preparer {
    fn prepare(
        &self,
        round: usize,
        w: &[u8],
        history: &[ChannelOutput],
    ) -> Result<Option<Arc<dyn std::any::Any + Send + Sync>>> {
        if round != 1 {
            return Ok(None);
        }
        Ok(Some(Arc::new(self.shared.decide(w, &history[0])?)))
    }
}

/// Most frequent value, ties to the smallest; `None` when `values` is empty.
pub fn plurality(values: impl IntoIterator<Item = u64>) -> Option<u64> {
    let mut counts = BTreeMap::new();
    for v in values {
        *counts.entry(v).or_insert(0u64) += 1;
    }
    let mut best: Option<(u64, u64)> = None;
    for (v, c) in counts {
        if best.is_none_or(|(_, bc)| c > bc) {
            best = Some((v, c));
        }
    }
    best.map(|(v, _)| v)
}

struct PluralityAnalyzer {
    shared: Arc<Shared>,
}

impl Analyzer for PluralityAnalyzer {
    fn analyze(&self, w: &[u8], outputs: &[ChannelOutput]) -> Result<Outcome> {
        let [first, second] = outputs else {
            return Err(Error::Internal("two rounds expected".into()));
        };
        if !self.shared.decide(w, first)?.proceed {
            return Ok(Outcome::Bottom);
        }
        let mut values = Vec::new();
        for m in second.messages() {
            if m.is_bottom() {
                continue;
            }
            if m.tag() != tag::ELEMENT {
                return Err(Error::Decode(format!("unexpected message {m:?}")));
            }
            values.push(m.field_u64(0)?);
        }
        Ok(plurality(values).map_or(Outcome::NoAnswer, Outcome::Element))
    }
}

/// Bits of public randomness: enough to seed the hashes.
pub const PUBLIC_BITS: usize = 256;

pub fn common_two_round_spec(params: TwoRoundParams) -> Result<ProtocolSpec> {
    if params.n < 2 {
        return Err(Error::param("n", "need at least two parties"));
    }
    if params.domain == 0 {
        return Err(Error::param("domain", "must be nonempty"));
    }
    let range = hash_range(params.n, params.delta, params.range_cap)?;
    let keep = match params.backend {
        HistogramBackend::Ldp { epsilon } => Some(ldp::keep_probability(epsilon)?),
        HistogramBackend::Injected(_) => None,
    };
    let shared = Arc::new(Shared { params, range, keep });
    let party = Arc::new(Party { shared: shared.clone() });
    Ok(ProtocolSpec::new(
        "common-two-round",
        vec![RoundSpec::public(), RoundSpec::shuffle(1)?],
        (0..shared.params.n)
            .map(|_| party.clone() as Arc<dyn Randomizer>)
            .collect(),
        Arc::new(PluralityAnalyzer { shared: shared.clone() }),
        PUBLIC_BITS,
    )?
    .with_preparer(Arc::new(Preparer { shared })))
}

/// The round-0 decision recorded in a transcript.
pub fn decision(params: &TwoRoundParams, t: &Transcript) -> Result<Decision> {
    let range = hash_range(params.n, params.delta, params.range_cap)?;
    let shared = Shared {
        params: params.clone(),
        range,
        keep: None,
    };
    shared.decide(&t.w, &t.channel_outputs[0])
}

/// Run CommonTwoRound on `inputs`.
pub fn common_two_round(
    inputs: &[u64],
    domain: u64,
    delta: f64,
    backend: HistogramBackend,
    candidates: Candidates,
    range_cap: Option<u64>,
    seed: u64,
) -> Result<(ElementOutcome, Transcript)> {
    let spec = common_two_round_spec(TwoRoundParams {
        n: inputs.len(),
        domain,
        delta,
        range_cap,
        backend,
        candidates,
    })?;
    let xs: Vec<Input> = inputs.iter().map(|&x| Input::Element(x)).collect();
    let t = run_protocol(&spec, &xs, seed)?;
    Ok((classify(&t.outcome, common_value(inputs)), t))
}
