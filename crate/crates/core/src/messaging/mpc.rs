//! A multi-round protocol that assumes private channels, run in the shuffle
//! model by replacing every round's channels with a pairwise channel round.
//!
//! The inner protocol is pluggable. Parties keep no state besides their own
//! tapes: at each round they replay earlier rounds from their tapes to
//! recover what they sent and received.

use std::sync::Arc;

use super::channels::{channel_messages, draw_channels, messages_per_party, receive_all, PayloadRow};
use crate::model::{
    Analyzer, ChannelOutput, Coins, Input, Message, Outcome, ProtocolSpec, Randomizer, ReplayCoins, RoundContext,
    RoundSpec,
};
use crate::primitives::group::{add_mod, sub_mod};
use crate::{Error, Result};

/// What an inner party knows at the start of a round.
pub struct InnerState<'a> {
    pub party: usize,
    pub n: usize,
    pub input: &'a Input,
    /// `sent[r][j]`: what this party sent to `j` in round `r`.
    pub sent: &'a [PayloadRow],
    /// `received[r][j]`: what this party got from `j` in round `r`.
    pub received: &'a [PayloadRow],
}

/// A protocol written against private point-to-point channels.
pub trait InnerProtocol: Send + Sync {
    fn parties(&self) -> usize;
    fn rounds(&self) -> usize;
    /// Longest payload, in bits, sent over any channel.
    fn payload_bits(&self) -> usize;
    fn messages(&self, st: &InnerState<'_>, round: usize, coins: &mut dyn Coins) -> Result<PayloadRow>;
    fn output(&self, st: &InnerState<'_>) -> Result<Outcome>;
}

struct ShellParty {
    inner: Arc<dyn InnerProtocol>,
    k: usize,
}

impl ShellParty {
    /// Replay rounds `< upto` from the party's tapes.
    fn replay(&self, ctx: &RoundContext<'_>, upto: usize) -> Result<(Vec<PayloadRow>, Vec<PayloadRow>)> {
        let n = self.inner.parties();
        let mut sent = Vec::new();
        let mut received = Vec::new();
        for r in 0..upto {
            let tape = ctx
                .own_tapes
                .get(r)
                .ok_or_else(|| Error::Replay(format!("missing tape for round {r}")))?;
            let mut coins = ReplayCoins::new(tape);
            let st = InnerState {
                party: ctx.party,
                n,
                input: ctx.input,
                sent: &sent,
                received: &received,
            };
            let row = self.inner.messages(&st, r, &mut coins)?;
            let draws = draw_channels(ctx.party, n, self.k, &mut coins)?;
            coins.finish()?;
            let got = receive_all(ctx.party, n, self.k, &draws, ctx.history[r].messages())?;
            sent.push(row);
            received.push(got);
        }
        Ok((sent, received))
    }
}

impl Randomizer for ShellParty {
    fn message_count(&self, round: usize) -> usize {
        if round < self.inner.rounds() {
            messages_per_party(self.inner.parties(), self.k)
        } else {
            0
        }
    }

    fn generate(&self, ctx: &RoundContext<'_>, coins: &mut dyn Coins) -> Result<Vec<Message>> {
        let n = self.inner.parties();
        let (sent, received) = self.replay(ctx, ctx.round)?;
        let st = InnerState {
            party: ctx.party,
            n,
            input: ctx.input,
            sent: &sent,
            received: &received,
        };
        let row = self.inner.messages(&st, ctx.round, coins)?;
        if let Some(long) = row.iter().flatten().find(|p| p.len() > self.k) {
            return Err(Error::param(
                "payload",
                format!("{} bits exceed k = {}", long.len(), self.k),
            ));
        }
        let draws = draw_channels(ctx.party, n, self.k, coins)?;
        channel_messages(ctx.party, n, self.k, &row, &draws)
    }

    fn local_output(&self, ctx: &RoundContext<'_>) -> Result<Option<Outcome>> {
        let (sent, received) = self.replay(ctx, self.inner.rounds())?;
        let st = InnerState {
            party: ctx.party,
            n: self.inner.parties(),
            input: ctx.input,
            sent: &sent,
            received: &received,
        };
        self.inner.output(&st).map(Some)
    }
}

struct ShellAnalyzer;

impl Analyzer for ShellAnalyzer {
    fn analyze(&self, _w: &[u8], _outputs: &[ChannelOutput]) -> Result<Outcome> {
        Ok(Outcome::None)
    }
}

/// Run `inner` with every private channel replaced by message transmission
/// through the shuffle, one shuffle round per inner round.
pub fn mpc_in_shuffle_spec(inner: Arc<dyn InnerProtocol>, k: usize) -> Result<ProtocolSpec> {
    let n = inner.parties();
    if n < 2 {
        return Err(Error::param("n", "need at least two parties"));
    }
    if inner.payload_bits() > k {
        return Err(Error::param(
            "k",
            format!("payloads of {} bits exceed k = {k}", inner.payload_bits()),
        ));
    }
    let rounds = (0..inner.rounds())
        .map(|_| RoundSpec::shuffle(messages_per_party(n, k)))
        .collect::<Result<Vec<_>>>()?;
    let party = Arc::new(ShellParty { inner, k });
    ProtocolSpec::new(
        "mpc-in-shuffle",
        rounds,
        (0..n).map(|_| party.clone() as Arc<dyn Randomizer>).collect(),
        Arc::new(ShellAnalyzer),
        0,
    )
}

/// Demo inner protocol: every party learns `sum x_i mod q`.
///
/// Round 0: each party splits its input into `n` additive shares and sends
/// share `j` to party `j`. Round 1: each party adds its own share to those
/// received and sends the partial sum to everyone. Output: the sum of all
/// partial sums.
pub struct AdditionInner {
    pub n: usize,
    pub modulus: u64,
}

impl AdditionInner {
    fn width(&self) -> usize {
        (64 - (self.modulus - 1).leading_zeros()).max(1) as usize
    }

    fn encode(&self, v: u64) -> Vec<bool> {
        (0..self.width()).map(|i| v >> i & 1 == 1).collect()
    }

    fn decode(&self, bits: &[bool]) -> Result<u64> {
        let v = bits.iter().enumerate().fold(0u64, |acc, (i, &b)| acc | (b as u64) << i);
        if bits.len() != self.width() || v >= self.modulus {
            return Err(Error::Decode("bad group element payload".into()));
        }
        Ok(v)
    }

    fn own_share(&self, st: &InnerState<'_>) -> Result<u64> {
        let x = st.input.element()? % self.modulus;
        let mut s = x;
        for bits in st.sent[0].iter().flatten() {
            s = sub_mod(s, self.decode(bits)?, self.modulus);
        }
        Ok(s)
    }

    fn received_sum(&self, row: &PayloadRow) -> Result<u64> {
        row.iter()
            .flatten()
            .try_fold(0u64, |acc, b| Ok(add_mod(acc, self.decode(b)?, self.modulus)))
    }
}

impl InnerProtocol for AdditionInner {
    fn parties(&self) -> usize {
        self.n
    }

    fn rounds(&self) -> usize {
        2
    }

    fn payload_bits(&self) -> usize {
        self.width()
    }

    fn messages(&self, st: &InnerState<'_>, round: usize, coins: &mut dyn Coins) -> Result<PayloadRow> {
        match round {
            0 => (0..self.n)
                .map(|j| {
                    if j == st.party {
                        Ok(None)
                    } else {
                        Ok(Some(self.encode(coins.uniform(self.modulus)?)))
                    }
                })
                .collect(),
            1 => {
                let partial = add_mod(self.own_share(st)?, self.received_sum(&st.received[0])?, self.modulus);
                Ok((0..self.n)
                    .map(|j| (j != st.party).then(|| self.encode(partial)))
                    .collect())
            }
            _ => Err(Error::Internal(format!("no round {round}"))),
        }
    }

    fn output(&self, st: &InnerState<'_>) -> Result<Outcome> {
        let mine = add_mod(self.own_share(st)?, self.received_sum(&st.received[0])?, self.modulus);
        Ok(Outcome::Element(add_mod(
            mine,
            self.received_sum(&st.received[1])?,
            self.modulus,
        )))
    }
}
