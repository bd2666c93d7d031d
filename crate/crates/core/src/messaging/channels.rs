//! Private channels between every ordered pair of parties, realised by
//! running all `n(n-1)` message-transmission instances in one shuffle round.
//!
//! Each party draws, for every other party `j` in ascending order, its
//! sender randomness for the instance `party -> j` followed by its receiver
//! bits for `j -> party`. A party therefore emits `(n-1)(14k+1)` messages.
//!
//! Tag layout (all integer fields minimal big-endian):
//!
//! ```text
//! KEY_BIT    0x20 | lo | hi | direction | index | bit
//! CIPHERTEXT 0x21 | lo | hi | direction | length | hash bits | cipher bits
//! ```
//!
//! `direction` is 0 when `lo` sends. Messages of `(i, j)` and `(j, i)`
//! differ in `direction`, so instances never collide.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::kx::PairTag;
use super::smt::{draw_receiver, draw_sender, smt_receive, smt_receiver_messages, smt_send, SenderDraws};
use crate::model::{
    seed, shuffle_round, tag, Analyzer, ChannelOutput, Coins, Input, Message, Outcome, ProtocolSpec, Randomizer,
    RoundContext, RoundSpec, SamplingCoins,
};
use crate::{Error, Result};

/// Per-recipient (or per-sender) bit strings; the own slot is `None`.
pub type PayloadRow = Vec<Option<Vec<bool>>>;

/// How the shuffle is applied to the instances.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShuffleLayout {
    /// One shuffle over every message of the round.
    #[default]
    Global,
    /// A separate two-message shuffle per (pair, index), plus the lone
    /// ciphertext of each instance.
    PerIndex,
}

pub fn messages_per_party(n: usize, k: usize) -> usize {
    (n - 1) * (14 * k + 1)
}

/// All random choices one party makes in a channel round.
#[derive(Clone, Debug)]
pub struct ChannelDraws {
    pub send: BTreeMap<usize, SenderDraws>,
    pub recv: BTreeMap<usize, Vec<bool>>,
}

pub fn draw_channels(party: usize, n: usize, k: usize, coins: &mut dyn Coins) -> Result<ChannelDraws> {
    let mut send = BTreeMap::new();
    let mut recv = BTreeMap::new();
    for j in (0..n).filter(|&j| j != party) {
        send.insert(j, draw_sender(k, coins)?);
        recv.insert(j, draw_receiver(k, coins)?);
    }
    Ok(ChannelDraws { send, recv })
}

/// The messages `party` sends when its outgoing payloads are `row`.
pub fn channel_messages(
    party: usize,
    n: usize,
    k: usize,
    row: &[Option<Vec<bool>>],
    draws: &ChannelDraws,
) -> Result<Vec<Message>> {
    if row.len() != n {
        return Err(Error::param(
            "payloads",
            format!("row has {} slots, expected {n}", row.len()),
        ));
    }
    let mut out = Vec::with_capacity(messages_per_party(n, k));
    for j in (0..n).filter(|&j| j != party) {
        let m = row[j].as_deref().unwrap_or(&[]);
        out.extend(smt_send(PairTag::new(party, j)?, m, k, &draws.send[&j])?);
        out.extend(smt_receiver_messages(PairTag::new(j, party)?, &draws.recv[&j]));
    }
    Ok(out)
}

/// What `party` receives from every other party.
pub fn receive_all(party: usize, n: usize, k: usize, draws: &ChannelDraws, output: &[Message]) -> Result<PayloadRow> {
    (0..n)
        .map(|j| {
            if j == party {
                Ok(None)
            } else {
                smt_receive(PairTag::new(j, party)?, k, &draws.recv[&j], output).map(Some)
            }
        })
        .collect()
}

/// Deliver through independent per-index shuffles. Because every message
/// carries its full tag, the concatenation in tag order equals the global
/// sorted output.
pub fn per_index_shuffle(per_party: Vec<Vec<Message>>) -> Result<Vec<Message>> {
    let mut groups: BTreeMap<Vec<u8>, Vec<Message>> = BTreeMap::new();
    for m in per_party.into_iter().flatten() {
        let key = match m.tag() {
            tag::KEY_BIT => {
                let f = m.fields();
                let mut key = vec![tag::KEY_BIT];
                for field in &f[..4] {
                    key.push(field.len() as u8);
                    key.extend_from_slice(field);
                }
                key
            }
            _ => m.as_bytes().to_vec(),
        };
        groups.entry(key).or_default().push(m);
    }
    let mut out = Vec::new();
    for (_, mut g) in groups {
        if g.len() > 2 {
            return Err(Error::Internal("tag collision between channel instances".into()));
        }
        g.sort_unstable();
        out.extend(g);
    }
    Ok(out)
}

struct ChannelRandomizer {
    n: usize,
    k: usize,
}

impl ChannelRandomizer {
    fn row<'a>(&self, input: &'a Input) -> Result<&'a [Option<Vec<bool>>]> {
        match input {
            Input::Payloads(p) => Ok(p),
            other => Err(Error::param("input", format!("{other:?} is not a payload row"))),
        }
    }
}

impl Randomizer for ChannelRandomizer {
    fn message_count(&self, round: usize) -> usize {
        if round == 0 {
            messages_per_party(self.n, self.k)
        } else {
            0
        }
    }

    fn generate(&self, ctx: &RoundContext<'_>, coins: &mut dyn Coins) -> Result<Vec<Message>> {
        let draws = draw_channels(ctx.party, self.n, self.k, coins)?;
        channel_messages(ctx.party, self.n, self.k, self.row(ctx.input)?, &draws)
    }

    fn local_output(&self, ctx: &RoundContext<'_>) -> Result<Option<Outcome>> {
        let (Some(tape), Some(out)) = (ctx.own_tapes.first(), ctx.history.first()) else {
            return Ok(None);
        };
        let mut coins = crate::model::ReplayCoins::new(tape);
        let draws = draw_channels(ctx.party, self.n, self.k, &mut coins)?;
        Ok(Some(Outcome::Payloads(receive_all(
            ctx.party,
            self.n,
            self.k,
            &draws,
            out.messages(),
        )?)))
    }
}

struct NoOutput;

impl Analyzer for NoOutput {
    fn analyze(&self, _w: &[u8], _outputs: &[ChannelOutput]) -> Result<Outcome> {
        Ok(Outcome::None)
    }
}

/// One shuffle round carrying every pairwise instance.
pub fn pairwise_channels_spec(n: usize, k: usize) -> Result<ProtocolSpec> {
    if n < 2 || k == 0 {
        return Err(Error::param("n/k", "need n >= 2 and k >= 1"));
    }
    let rz = Arc::new(ChannelRandomizer { n, k });
    ProtocolSpec::new(
        "pairwise-channels",
        vec![RoundSpec::shuffle(messages_per_party(n, k))?],
        (0..n).map(|_| rz.clone() as Arc<dyn Randomizer>).collect(),
        Arc::new(NoOutput),
        0,
    )
}

/// Deliver `payloads[i][j]` from `i` to `j` for every ordered pair.
/// Returns `delivered[j][i]`, what `j` received from `i`.
pub fn pairwise_channels_round(
    payloads: &[PayloadRow],
    k: usize,
    layout: ShuffleLayout,
    seed: u64,
) -> Result<Vec<PayloadRow>> {
    let n = payloads.len();
    if n < 2 || k == 0 {
        return Err(Error::param("n/k", "need n >= 2 and k >= 1"));
    }
    let mut all_draws = Vec::with_capacity(n);
    let mut per_party = Vec::with_capacity(n);
    for (i, row) in payloads.iter().enumerate() {
        let mut rng = seed::party_stream(seed, i, 0);
        let mut coins = SamplingCoins::new(&mut rng);
        let draws = draw_channels(i, n, k, &mut coins)?;
        per_party.push(channel_messages(i, n, k, row, &draws)?);
        all_draws.push(draws);
    }
    let output = match layout {
        ShuffleLayout::Global => shuffle_round(0, messages_per_party(n, k), per_party)?,
        ShuffleLayout::PerIndex => per_index_shuffle(per_party)?,
    };
    (0..n).map(|j| receive_all(j, n, k, &all_draws[j], &output)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::protocol::local_outputs;
    use crate::model::run_protocol;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_payloads(n: usize, k: usize, rng: &mut impl Rng) -> Vec<PayloadRow> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (i != j).then(|| (0..rng.gen_range(0..=k)).map(|_| rng.gen()).collect()))
                    .collect()
            })
            .collect()
    }

    fn expect_delivered(p: &[PayloadRow]) -> Vec<PayloadRow> {
        let n = p.len();
        (0..n).map(|j| (0..n).map(|i| p[i][j].clone()).collect()).collect()
    }

    #[test]
    fn two_parties_one_payload() {
        let p = vec![vec![None, Some(vec![true, false, true])], vec![None, None]];
        let got = pairwise_channels_round(&p, 4, ShuffleLayout::Global, 1).unwrap();
        assert_eq!(got[1][0], Some(vec![true, false, true]));
        assert_eq!(got[0][1], Some(vec![]));
    }

    #[test]
    fn layouts_agree_and_deliver() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for seed in 0..20 {
            let p = random_payloads(4, 3, &mut rng);
            let g = pairwise_channels_round(&p, 3, ShuffleLayout::Global, seed).unwrap();
            let l = pairwise_channels_round(&p, 3, ShuffleLayout::PerIndex, seed).unwrap();
            let mut want = expect_delivered(&p);
            for (j, row) in want.iter_mut().enumerate() {
                for (i, slot) in row.iter_mut().enumerate() {
                    if i != j && slot.is_none() {
                        *slot = Some(vec![]);
                    }
                }
            }
            assert_eq!(g, want);
            assert_eq!(l, want);
        }
    }

    #[test]
    fn per_index_output_equals_global_sort() {
        let n = 3;
        let k = 2;
        let mut per_party = Vec::new();
        for i in 0..n {
            let mut rng = seed::party_stream(4, i, 0);
            let mut c = SamplingCoins::new(&mut rng);
            let d = draw_channels(i, n, k, &mut c).unwrap();
            let row: PayloadRow = (0..n).map(|j| (j != i).then(|| vec![true])).collect();
            per_party.push(channel_messages(i, n, k, &row, &d).unwrap());
        }
        assert_eq!(
            per_index_shuffle(per_party.clone()).unwrap(),
            shuffle_round(0, messages_per_party(n, k), per_party).unwrap()
        );
    }

    #[test]
    fn spec_run_matches_direct_round() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_payloads(3, 4, &mut rng);
        let spec = pairwise_channels_spec(3, 4).unwrap();
        let inputs: Vec<Input> = p.iter().map(|r| Input::Payloads(r.clone())).collect();
        let t = run_protocol(&spec, &inputs, 77).unwrap();
        let outs = local_outputs(&spec, &t).unwrap();
        let direct = pairwise_channels_round(&p, 4, ShuffleLayout::Global, 77).unwrap();
        for j in 0..3 {
            assert_eq!(outs[j], Some(Outcome::Payloads(direct[j].clone())));
        }
        assert_eq!(t.channel_outputs[0].messages().len(), 3 * messages_per_party(3, 4));
    }
}
