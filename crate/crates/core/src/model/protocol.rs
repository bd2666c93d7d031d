//! Protocol specifications and their execution.
//!
//! A protocol is a fixed schedule of rounds. In each round every party
//! runs its randomizer on the public string, its input, the channel outputs
//! of earlier rounds and its own earlier tapes, and submits a message
//! vector. Shuffle rounds publish the sorted multiset of all messages;
//! public rounds publish the messages in party order. An analyzer then
//! post-processes the public part of the execution.

use std::any::Any;
use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::coins::{explore, Coins, Leaf, SamplingCoins, Tape};
use super::message::{write_varint, Message, Reader};
use super::seed;
use super::transcript::Transcript;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RoundKind {
    Shuffle,
    Public,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RoundSpec {
    pub kind: RoundKind,
    pub messages_per_party: usize,
}

impl RoundSpec {
    pub fn shuffle(messages_per_party: usize) -> Result<Self> {
        if messages_per_party == 0 {
            return Err(Error::param(
                "messages_per_party",
                "a shuffle round needs at least one message per party",
            ));
        }
        Ok(RoundSpec {
            kind: RoundKind::Shuffle,
            messages_per_party,
        })
    }

    pub fn public() -> Self {
        RoundSpec {
            kind: RoundKind::Public,
            messages_per_party: 1,
        }
    }
}

/// A party's private input.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Input {
    None,
    Element(u64),
    Vector(Vec<u64>),
    /// Per-recipient bit strings; `None` where nothing is sent.
    Payloads(Vec<Option<Vec<bool>>>),
}

impl Input {
    pub fn element(&self) -> Result<u64> {
        match self {
            Input::Element(x) => Ok(*x),
            other => Err(Error::param("input", format!("expected an element, got {other:?}"))),
        }
    }

    pub fn vector(&self) -> Result<&[u64]> {
        match self {
            Input::Vector(v) => Ok(v),
            other => Err(Error::param("input", format!("expected a vector, got {other:?}"))),
        }
    }

    pub fn encode(&self, out: &mut Vec<u8>) {
        match self {
            Input::None => out.push(0),
            Input::Element(x) => {
                out.push(1);
                write_varint(out, *x);
            }
            Input::Vector(v) => {
                out.push(2);
                write_varint(out, v.len() as u64);
                for x in v {
                    write_varint(out, *x);
                }
            }
            Input::Payloads(p) => {
                out.push(3);
                encode_payloads(out, p);
            }
        }
    }

    pub(crate) fn decode(r: &mut Reader<'_>) -> Result<Self> {
        Ok(match r.u8()? {
            0 => Input::None,
            1 => Input::Element(r.varint()?),
            2 => {
                let len = r.varint()?;
                Input::Vector((0..len).map(|_| r.varint()).collect::<Result<_>>()?)
            }
            3 => Input::Payloads(decode_payloads(r)?),
            t => return Err(Error::Decode(format!("input tag {t}"))),
        })
    }
}

fn encode_payloads(out: &mut Vec<u8>, p: &[Option<Vec<bool>>]) {
    write_varint(out, p.len() as u64);
    for slot in p {
        match slot {
            None => out.push(0),
            Some(bits) => {
                out.push(1);
                write_varint(out, bits.len() as u64);
                out.extend(bits.iter().map(|&b| b as u8));
            }
        }
    }
}

fn decode_payloads(r: &mut Reader<'_>) -> Result<Vec<Option<Vec<bool>>>> {
    let len = r.varint()?;
    (0..len)
        .map(|_| match r.u8()? {
            0 => Ok(None),
            1 => {
                let l = r.varint()? as usize;
                Ok(Some(decode_bits(r.take(l)?)?))
            }
            t => Err(Error::Decode(format!("payload slot tag {t}"))),
        })
        .collect()
}

fn decode_bits(b: &[u8]) -> Result<Vec<bool>> {
    b.iter()
        .map(|&x| match x {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(Error::Decode("bit byte not 0/1".into())),
        })
        .collect()
}

/// What the analyzer (or a party) outputs.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    /// The protocol produces no analyzer output.
    None,
    /// Explicit abstention (`⊥`).
    Bottom,
    /// The analyzer had nothing to choose from.
    NoAnswer,
    Element(u64),
    Values(Vec<u64>),
    Bits(Vec<bool>),
    /// Per-peer bit strings, as received over private channels.
    Payloads(Vec<Option<Vec<bool>>>),
}

impl Outcome {
    pub fn encode(&self, out: &mut Vec<u8>) {
        match self {
            Outcome::None => out.push(0),
            Outcome::Bottom => out.push(1),
            Outcome::NoAnswer => out.push(2),
            Outcome::Element(x) => {
                out.push(3);
                write_varint(out, *x);
            }
            Outcome::Values(v) => {
                out.push(4);
                write_varint(out, v.len() as u64);
                for x in v {
                    write_varint(out, *x);
                }
            }
            Outcome::Bits(b) => {
                out.push(5);
                write_varint(out, b.len() as u64);
                out.extend(b.iter().map(|&x| x as u8));
            }
            Outcome::Payloads(p) => {
                out.push(6);
                encode_payloads(out, p);
            }
        }
    }

    pub(crate) fn decode(r: &mut Reader<'_>) -> Result<Self> {
        Ok(match r.u8()? {
            0 => Outcome::None,
            1 => Outcome::Bottom,
            2 => Outcome::NoAnswer,
            3 => Outcome::Element(r.varint()?),
            4 => {
                let len = r.varint()?;
                Outcome::Values((0..len).map(|_| r.varint()).collect::<Result<_>>()?)
            }
            5 => {
                let len = r.varint()? as usize;
                Outcome::Bits(decode_bits(r.take(len)?)?)
            }
            6 => Outcome::Payloads(decode_payloads(r)?),
            t => return Err(Error::Decode(format!("outcome tag {t}"))),
        })
    }
}

/// The published result of one round.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChannelOutput {
    /// Sorted multiset of every message sent in the round.
    Shuffle(Vec<Message>),
    /// One message per party, in party order.
    Public(Vec<Message>),
}

impl ChannelOutput {
    pub fn messages(&self) -> &[Message] {
        match self {
            ChannelOutput::Shuffle(m) | ChannelOutput::Public(m) => m,
        }
    }

    pub fn encode(&self, out: &mut Vec<u8>) {
        let (kind, msgs) = match self {
            ChannelOutput::Shuffle(m) => (0, m),
            ChannelOutput::Public(m) => (1, m),
        };
        out.push(kind);
        write_varint(out, msgs.len() as u64);
        for m in msgs {
            write_varint(out, m.as_bytes().len() as u64);
            out.extend_from_slice(m.as_bytes());
        }
    }

    pub(crate) fn decode(r: &mut Reader<'_>) -> Result<Self> {
        let kind = r.u8()?;
        let len = r.varint()?;
        let mut msgs = Vec::new();
        for _ in 0..len {
            msgs.push(Message::decode(r.bytes()?)?);
        }
        match kind {
            0 => {
                if msgs.windows(2).any(|p| p[0] > p[1]) {
                    return Err(Error::Decode("shuffle output not sorted".into()));
                }
                Ok(ChannelOutput::Shuffle(msgs))
            }
            1 => Ok(ChannelOutput::Public(msgs)),
            t => Err(Error::Decode(format!("channel kind {t}"))),
        }
    }
}

/// Everything a randomizer may look at when producing its next messages.
#[derive(Clone, Copy)]
pub struct RoundContext<'a> {
    pub party: usize,
    pub round: usize,
    pub n: usize,
    pub w: &'a [u8],
    pub input: &'a Input,
    pub history: &'a [ChannelOutput],
    /// The party's tapes from earlier rounds.
    pub own_tapes: &'a [Tape],
    /// Public per-round data computed once by the protocol's preparer.
    pub shared: Option<&'a (dyn Any + Send + Sync)>,
}

impl<'a> RoundContext<'a> {
    pub fn shared<T: 'static>(&self) -> Result<&'a T> {
        self.shared
            .and_then(|s| s.downcast_ref::<T>())
            .ok_or_else(|| Error::Internal(format!("round {} has no prepared state", self.round)))
    }
}

/// A party's message-generating functionality.
pub trait Randomizer: Send + Sync {
    /// Number of messages emitted in `round`.
    fn message_count(&self, round: usize) -> usize;

    /// Produce the round's messages, drawing all randomness from `coins`.
    fn generate(&self, ctx: &RoundContext<'_>, coins: &mut dyn Coins) -> Result<Vec<Message>>;

    /// For protocols built on secure summation: the vector this party feeds
    /// to the summation, drawn with the same coins `generate` uses first.
    fn contribution(&self, _ctx: &RoundContext<'_>, _coins: &mut dyn Coins) -> Result<Option<Vec<u64>>> {
        Ok(None)
    }

    /// The party's own output after the last round, if it has one.
    fn local_output(&self, _ctx: &RoundContext<'_>) -> Result<Option<Outcome>> {
        Ok(None)
    }

    fn sample(&self, ctx: &RoundContext<'_>, rng: &mut dyn RngCore) -> Result<(Vec<Message>, Tape)> {
        let mut coins = SamplingCoins::new(rng);
        let msgs = self.generate(ctx, &mut coins)?;
        Ok((msgs, coins.into_tape()))
    }

    /// Exact output distribution as leaves with rational probabilities.
    fn enumerate(&self, ctx: &RoundContext<'_>, budget: u128) -> Result<Vec<Leaf<Vec<Message>>>> {
        explore(budget, |c| self.generate(ctx, c))
    }
}

/// Post-processing of the public part of an execution.
pub trait Analyzer: Send + Sync {
    fn analyze(&self, w: &[u8], outputs: &[ChannelOutput]) -> Result<Outcome>;

    /// Outcome computed directly from an ideal sum of contributions.
    fn analyze_sum(&self, _w: &[u8], _sum: &[u64]) -> Result<Outcome> {
        Err(Error::Internal("analyzer has no ideal-sum form".into()))
    }
}

/// Public data derived once per round from `w` and earlier channel outputs,
/// shared by every party (for example an argmax over a frequency oracle).
pub trait RoundPreparer: Send + Sync {
    fn prepare(&self, round: usize, w: &[u8], history: &[ChannelOutput]) -> Result<Option<Arc<dyn Any + Send + Sync>>>;
}

/// The group in which contributions are summed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IdealSum {
    pub modulus: u64,
    pub dim: usize,
}

#[derive(Clone)]
pub struct ProtocolSpec {
    pub name: String,
    pub n: usize,
    pub rounds: Vec<RoundSpec>,
    pub randomizers: Vec<Arc<dyn Randomizer>>,
    pub analyzer: Arc<dyn Analyzer>,
    pub public_randomness_bits: usize,
    pub preparer: Option<Arc<dyn RoundPreparer>>,
    pub ideal_sum: Option<IdealSum>,
}

impl std::fmt::Debug for ProtocolSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProtocolSpec")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("rounds", &self.rounds)
            .field("public_randomness_bits", &self.public_randomness_bits)
            .field("ideal_sum", &self.ideal_sum)
            .finish_non_exhaustive()
    }
}

impl ProtocolSpec {
    pub fn new(
        name: impl Into<String>,
        rounds: Vec<RoundSpec>,
        randomizers: Vec<Arc<dyn Randomizer>>,
        analyzer: Arc<dyn Analyzer>,
        public_randomness_bits: usize,
    ) -> Result<Self> {
        let spec = ProtocolSpec {
            name: name.into(),
            n: randomizers.len(),
            rounds,
            randomizers,
            analyzer,
            public_randomness_bits,
            preparer: None,
            ideal_sum: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_preparer(mut self, p: Arc<dyn RoundPreparer>) -> Self {
        self.preparer = Some(p);
        self
    }

    pub fn with_ideal_sum(mut self, s: IdealSum) -> Self {
        self.ideal_sum = Some(s);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::param("n", "a protocol needs at least one party"));
        }
        for (j, r) in self.rounds.iter().enumerate() {
            if r.messages_per_party == 0 || (r.kind == RoundKind::Public && r.messages_per_party != 1) {
                return Err(Error::Structure {
                    party: 0,
                    round: j,
                    reason: format!("invalid round spec {r:?}"),
                });
            }
            for (i, rz) in self.randomizers.iter().enumerate() {
                let c = rz.message_count(j);
                if c != r.messages_per_party {
                    return Err(Error::Structure {
                        party: i,
                        round: j,
                        reason: format!(
                            "randomizer declares {c} messages, round expects {}",
                            r.messages_per_party
                        ),
                    });
                }
            }
        }
        Ok(())
    }

    pub(crate) fn check_inputs(&self, inputs: &[Input]) -> Result<()> {
        if inputs.len() != self.n {
            return Err(Error::param(
                "inputs",
                format!("{} inputs for {} parties", inputs.len(), self.n),
            ));
        }
        Ok(())
    }

    pub fn prepare(
        &self,
        round: usize,
        w: &[u8],
        history: &[ChannelOutput],
    ) -> Result<Option<Arc<dyn Any + Send + Sync>>> {
        match &self.preparer {
            Some(p) => p.prepare(round, w, history),
            None => Ok(None),
        }
    }

    /// Publish one round's messages through its channel.
    pub fn deliver(&self, round: usize, per_party: Vec<Vec<Message>>) -> Result<ChannelOutput> {
        let spec = self.rounds[round];
        match spec.kind {
            RoundKind::Shuffle => Ok(ChannelOutput::Shuffle(shuffle_round(
                round,
                spec.messages_per_party,
                per_party,
            )?)),
            RoundKind::Public => Ok(ChannelOutput::Public(public_round(round, per_party)?)),
        }
    }
}

/// Shuffle channel: the sorted concatenation of every party's messages.
pub fn shuffle_round(round: usize, messages_per_party: usize, per_party: Vec<Vec<Message>>) -> Result<Vec<Message>> {
    let mut all = Vec::with_capacity(per_party.len() * messages_per_party);
    for (party, msgs) in per_party.into_iter().enumerate() {
        if msgs.len() != messages_per_party {
            return Err(Error::Structure {
                party,
                round,
                reason: format!(
                    "sent {} messages to a shuffle round of {messages_per_party}",
                    msgs.len()
                ),
            });
        }
        all.extend(msgs);
    }
    all.sort_unstable();
    Ok(all)
}

/// Public channel: one message per party, kept in party order.
pub fn public_round(round: usize, per_party: Vec<Vec<Message>>) -> Result<Vec<Message>> {
    per_party
        .into_iter()
        .enumerate()
        .map(|(party, mut msgs)| {
            if msgs.len() != 1 {
                return Err(Error::Structure {
                    party,
                    round,
                    reason: format!("sent {} messages to a public round", msgs.len()),
                });
            }
            Ok(msgs.pop().expect("length checked"))
        })
        .collect()
}

/// Execute `spec` on `inputs`. The result is a deterministic function of
/// `(spec, inputs, seed)`.
pub fn run_protocol(spec: &ProtocolSpec, inputs: &[Input], seed: u64) -> Result<Transcript> {
    spec.check_inputs(inputs)?;
    let w = seed::public_randomness(seed, spec.public_randomness_bits);
    let mut tapes: Vec<Vec<Tape>> = vec![Vec::with_capacity(spec.rounds.len()); spec.n];
    let mut history = Vec::with_capacity(spec.rounds.len());
    for round in 0..spec.rounds.len() {
        let shared = spec.prepare(round, &w, &history)?;
        let mut per_party = Vec::with_capacity(spec.n);
        for party in 0..spec.n {
            let ctx = RoundContext {
                party,
                round,
                n: spec.n,
                w: &w,
                input: &inputs[party],
                history: &history,
                own_tapes: &tapes[party],
                shared: shared.as_deref(),
            };
            let mut rng = seed::party_stream(seed, party, round);
            let (msgs, tape) = spec.randomizers[party].sample(&ctx, &mut rng)?;
            tapes[party].push(tape);
            per_party.push(msgs);
        }
        history.push(spec.deliver(round, per_party)?);
    }
    let outcome = spec.analyzer.analyze(&w, &history)?;
    Ok(Transcript {
        w,
        inputs: inputs.to_vec(),
        tapes,
        channel_outputs: history,
        outcome,
    })
}

/// Execute a single-round summation protocol with the summation replaced by
/// its ideal functionality: each party's contribution is drawn from the same
/// stream `run_protocol` would use, and the analyzer sees only the sum.
pub fn run_ideal_sum(spec: &ProtocolSpec, inputs: &[Input], seed: u64) -> Result<(Vec<u64>, Outcome)> {
    spec.check_inputs(inputs)?;
    let group = spec
        .ideal_sum
        .ok_or_else(|| Error::param("spec", format!("{} has no summation form", spec.name)))?;
    let w = seed::public_randomness(seed, spec.public_randomness_bits);
    let mut sum = vec![0u64; group.dim];
    for party in 0..spec.n {
        let ctx = RoundContext {
            party,
            round: 0,
            n: spec.n,
            w: &w,
            input: &inputs[party],
            history: &[],
            own_tapes: &[],
            shared: None,
        };
        let mut rng = seed::party_stream(seed, party, 0);
        let mut coins = SamplingCoins::new(&mut rng);
        let z = spec.randomizers[party]
            .contribution(&ctx, &mut coins)?
            .ok_or_else(|| Error::Internal(format!("party {party} has no contribution")))?;
        add_into(&mut sum, &z, group.modulus)?;
    }
    let outcome = spec.analyzer.analyze_sum(&w, &sum)?;
    Ok((sum, outcome))
}

pub(crate) fn add_into(acc: &mut [u64], z: &[u64], q: u64) -> Result<()> {
    if acc.len() != z.len() {
        return Err(Error::Internal(format!(
            "contribution has length {}, expected {}",
            z.len(),
            acc.len()
        )));
    }
    for (a, &b) in acc.iter_mut().zip(z) {
        *a = ((*a as u128 + b as u128) % q as u128) as u64;
    }
    Ok(())
}

/// Recompute the analyzer outcome from a recorded transcript.
pub fn replay_outcome(spec: &ProtocolSpec, t: &Transcript) -> Result<Outcome> {
    spec.analyzer.analyze(&t.w, &t.channel_outputs)
}

/// Regenerate every party's messages from the recorded tapes and check that
/// the channel outputs match.
pub fn replay_channels(spec: &ProtocolSpec, t: &Transcript) -> Result<()> {
    use super::coins::ReplayCoins;
    spec.check_inputs(&t.inputs)?;
    if t.channel_outputs.len() != spec.rounds.len() {
        return Err(Error::Replay("round count differs".into()));
    }
    for round in 0..spec.rounds.len() {
        let history = &t.channel_outputs[..round];
        let shared = spec.prepare(round, &t.w, history)?;
        let mut per_party = Vec::with_capacity(spec.n);
        for party in 0..spec.n {
            let ctx = RoundContext {
                party,
                round,
                n: spec.n,
                w: &t.w,
                input: &t.inputs[party],
                history,
                own_tapes: &t.tapes[party][..round],
                shared: shared.as_deref(),
            };
            let mut coins = ReplayCoins::new(&t.tapes[party][round]);
            per_party.push(spec.randomizers[party].generate(&ctx, &mut coins)?);
            coins.finish()?;
        }
        if spec.deliver(round, per_party)? != t.channel_outputs[round] {
            return Err(Error::Replay(format!("round {round} output differs")));
        }
    }
    Ok(())
}

/// Every party's local output after the last round.
pub fn local_outputs(spec: &ProtocolSpec, t: &Transcript) -> Result<Vec<Option<Outcome>>> {
    (0..spec.n)
        .map(|party| {
            let ctx = RoundContext {
                party,
                round: spec.rounds.len(),
                n: spec.n,
                w: &t.w,
                input: &t.inputs[party],
                history: &t.channel_outputs,
                own_tapes: &t.tapes[party],
                shared: None,
            };
            spec.randomizers[party].local_output(&ctx)
        })
        .collect()
}
