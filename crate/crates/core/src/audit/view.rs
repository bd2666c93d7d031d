//! Exact distributions of coalition views.
//!
//! Single-round protocols are folded party by party: every party's leaves
//! are enumerated once and the running state keeps only the coalition's
//! tapes and the channel output so far (a sorted multiset, a list in party
//! order, or a partial sum), merging equal states. Multi-round protocols are
//! explored jointly, since later rounds depend on earlier outputs.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::dist::ExactDistribution;
use crate::model::message::write_varint;
use crate::model::protocol::add_into;
use crate::model::seed::public_randomness;
use crate::model::{
    explore, ChannelOutput, CoalitionView, Coins, Input, Message, Prob, ProtocolSpec, RoundContext, RoundKind, Tape,
};
use crate::{Error, Result};

pub const DEFAULT_BUDGET: u128 = 100_000_000;

/// What the channel reveals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViewMode {
    /// The channel as specified: shuffled multisets or public lists.
    FullShuffle,
    /// Only the sum of the parties' contributions.
    IdealSum,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum PartyOut {
    Messages(Vec<Message>),
    Sum(Vec<u64>),
}

#[derive(Clone, Debug)]
struct PartyLeaf {
    prob: BigRational,
    tape: Tape,
    out: PartyOut,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Acc {
    Sorted(Vec<Message>),
    Ordered(Vec<Message>),
    Sum(Vec<u64>),
}

impl Acc {
    fn absorb(&self, out: &PartyOut, modulus: u64) -> Result<Acc> {
        Ok(match (self, out) {
            (Acc::Sorted(ms), PartyOut::Messages(add)) => {
                let mut v = ms.clone();
                for m in add {
                    let pos = v.partition_point(|x| x <= m);
                    v.insert(pos, m.clone());
                }
                Acc::Sorted(v)
            }
            (Acc::Ordered(ms), PartyOut::Messages(add)) => {
                let mut v = ms.clone();
                v.extend(add.iter().cloned());
                Acc::Ordered(v)
            }
            (Acc::Sum(s), PartyOut::Sum(z)) => {
                let mut v = s.clone();
                add_into(&mut v, z, modulus)?;
                Acc::Sum(v)
            }
            _ => return Err(Error::Internal("mixed view modes".into())),
        })
    }

    fn encode(&self, out: &mut Vec<u8>) {
        match self {
            Acc::Sorted(ms) => ChannelOutput::Shuffle(ms.clone()).encode(out),
            Acc::Ordered(ms) => ChannelOutput::Public(ms.clone()).encode(out),
            Acc::Sum(s) => {
                out.push(2);
                write_varint(out, s.len() as u64);
                for &v in s {
                    write_varint(out, v);
                }
            }
        }
    }
}

type State = (Vec<Tape>, Acc);

/// Exact view enumeration for one protocol under a fixed public string.
///
/// Per-party leaf sets are cached by `(party, input)`, so repeated queries
/// over neighbouring inputs share work.
pub struct ViewEnumerator<'a> {
    spec: &'a ProtocolSpec,
    w: Vec<u8>,
    mode: ViewMode,
    budget: u128,
    cache: Mutex<HashMap<(usize, Input), Arc<Vec<PartyLeaf>>>>,
}

impl<'a> ViewEnumerator<'a> {
    /// The public string is the one `run_protocol` would draw for `seed`.
    pub fn new(spec: &'a ProtocolSpec, mode: ViewMode, seed: u64, budget: u128) -> Result<Self> {
        spec.validate()?;
        if mode == ViewMode::IdealSum && (spec.ideal_sum.is_none() || spec.rounds.len() != 1) {
            return Err(Error::param(
                "mode",
                format!("{} has no single-round summation form", spec.name),
            ));
        }
        Ok(ViewEnumerator {
            spec,
            w: public_randomness(seed, spec.public_randomness_bits),
            mode,
            budget,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn w(&self) -> &[u8] {
        &self.w
    }

    fn check_coalition(&self, inputs: &[Input], coalition: &BTreeSet<usize>) -> Result<()> {
        self.spec.check_inputs(inputs)?;
        if let Some(&bad) = coalition.iter().find(|&&p| p >= self.spec.n) {
            return Err(Error::param(
                "coalition",
                format!("party {bad} not in [0, {})", self.spec.n),
            ));
        }
        Ok(())
    }

    fn party_leaves(&self, party: usize, input: &Input) -> Result<Arc<Vec<PartyLeaf>>> {
        let key = (party, input.clone());
        if let Some(l) = self.cache.lock().expect("poisoned").get(&key) {
            return Ok(l.clone());
        }
        let shared = self.spec.prepare(0, &self.w, &[])?;
        let ctx = RoundContext {
            party,
            round: 0,
            n: self.spec.n,
            w: &self.w,
            input,
            history: &[],
            own_tapes: &[],
            shared: shared.as_deref(),
        };
        let r = &self.spec.randomizers[party];
        let leaves = match self.mode {
            ViewMode::FullShuffle => explore(self.budget, |c| r.generate(&ctx, c).map(PartyOut::Messages))?,
            ViewMode::IdealSum => explore(self.budget, |c| {
                r.contribution(&ctx, c)?
                    .map(PartyOut::Sum)
                    .ok_or_else(|| Error::Internal(format!("party {party} has no contribution")))
            })?,
        };
        let leaves = Arc::new(
            leaves
                .into_iter()
                .map(|l| PartyLeaf {
                    prob: l.prob,
                    tape: l.tape,
                    out: l.value,
                })
                .collect::<Vec<_>>(),
        );
        self.cache.lock().expect("poisoned").insert(key, leaves.clone());
        Ok(leaves)
    }

    fn empty_acc(&self) -> Acc {
        match (self.mode, self.spec.rounds.first().map(|r| r.kind)) {
            (ViewMode::IdealSum, _) => Acc::Sum(vec![0; self.spec.ideal_sum.expect("checked").dim]),
            (_, Some(RoundKind::Public)) => Acc::Ordered(Vec::new()),
            _ => Acc::Sorted(Vec::new()),
        }
    }

    /// Fold the listed parties in order; tapes are kept for `keep_tapes`.
    fn fold(
        &self,
        parties: &[usize],
        inputs: &[Input],
        keep_tapes: &BTreeSet<usize>,
    ) -> Result<BTreeMap<State, BigRational>> {
        let modulus = self.spec.ideal_sum.map_or(1, |g| g.modulus);
        let mut states: BTreeMap<State, BigRational> = BTreeMap::new();
        states.insert((Vec::new(), self.empty_acc()), BigRational::one());
        let mut work: u128 = 0;
        for &party in parties {
            let keep = keep_tapes.contains(&party);
            let mut merged: BTreeMap<(Option<Tape>, PartyOut), BigRational> = BTreeMap::new();
            for l in self.party_leaves(party, &inputs[party])?.iter() {
                let tape = keep.then(|| l.tape.clone());
                *merged.entry((tape, l.out.clone())).or_insert_with(BigRational::zero) += &l.prob;
            }
            work += states.len() as u128 * merged.len() as u128;
            if work > self.budget {
                return Err(Error::BudgetExceeded {
                    branches: work,
                    budget: self.budget,
                });
            }
            let mut next: BTreeMap<State, BigRational> = BTreeMap::new();
            for ((tapes, acc), p) in &states {
                for ((tape, out), q) in &merged {
                    let mut t = tapes.clone();
                    t.extend(tape.iter().cloned());
                    let key = (t, acc.absorb(out, modulus)?);
                    *next.entry(key).or_insert_with(BigRational::zero) += p * q;
                }
            }
            states = next;
        }
        Ok(states)
    }

    /// Exact distribution of the coalition's view on `inputs`, keyed by
    /// canonical view encodings. In full mode keys equal
    /// `coalition_view(run).encode()` for a run with the same public string.
    pub fn view_distribution(&self, inputs: &[Input], coalition: &BTreeSet<usize>) -> Result<ExactDistribution> {
        self.check_coalition(inputs, coalition)?;
        if self.spec.rounds.len() != 1 {
            return self.joint_view_distribution(inputs, coalition);
        }
        let parties: Vec<usize> = (0..self.spec.n).collect();
        let states = self.fold(&parties, inputs, coalition)?;
        let members: Vec<usize> = coalition.iter().copied().collect();
        let pairs = states.into_iter().map(|((tapes, acc), p)| {
            let view = CoalitionView {
                w: self.w.clone(),
                members: members.clone(),
                inputs: members.iter().map(|&m| inputs[m].clone()).collect(),
                tapes: tapes.into_iter().map(|t| vec![t]).collect(),
                channel_outputs: Vec::new(),
            };
            let mut key = view.encode();
            // the encoding ends with the (empty) channel-output count
            key.pop();
            write_varint(&mut key, 1);
            acc.encode(&mut key);
            (key, p)
        });
        ExactDistribution::from_pairs(pairs)
    }

    /// Distribution of the non-coalition parties' part of the channel
    /// output: their message multiset, their messages in party order, or
    /// their partial sum. For one-round protocols the coalition's view is
    /// an injective function of its own tapes (independent of everything
    /// else) and this part, so hockey-stick divergences between
    /// neighbouring view distributions equal those between these.
    pub fn honest_part_distribution(&self, inputs: &[Input], coalition: &BTreeSet<usize>) -> Result<ExactDistribution> {
        self.check_coalition(inputs, coalition)?;
        if self.spec.rounds.len() != 1 {
            return Err(Error::param("spec", "the honest-part reduction needs a single round"));
        }
        let honest: Vec<usize> = (0..self.spec.n).filter(|p| !coalition.contains(p)).collect();
        let states = self.fold(&honest, inputs, &BTreeSet::new())?;
        ExactDistribution::from_pairs(states.into_iter().map(|((_, acc), p)| {
            let mut key = Vec::new();
            acc.encode(&mut key);
            (key, p)
        }))
    }

    fn joint_view_distribution(&self, inputs: &[Input], coalition: &BTreeSet<usize>) -> Result<ExactDistribution> {
        let spec = self.spec;
        let leaves = explore(self.budget, |coins| {
            let mut tapes: Vec<Vec<Tape>> = vec![Vec::new(); spec.n];
            let mut history: Vec<ChannelOutput> = Vec::new();
            for round in 0..spec.rounds.len() {
                let shared = spec.prepare(round, &self.w, &history)?;
                let mut per_party = Vec::with_capacity(spec.n);
                for party in 0..spec.n {
                    let ctx = RoundContext {
                        party,
                        round,
                        n: spec.n,
                        w: &self.w,
                        input: &inputs[party],
                        history: &history,
                        own_tapes: &tapes[party],
                        shared: shared.as_deref(),
                    };
                    let mut rec = RecordingCoins {
                        inner: &mut *coins,
                        tape: Vec::new(),
                    };
                    per_party.push(spec.randomizers[party].generate(&ctx, &mut rec)?);
                    let tape = Tape(rec.tape);
                    tapes[party].push(tape);
                }
                history.push(spec.deliver(round, per_party)?);
            }
            Ok(CoalitionView {
                w: self.w.clone(),
                members: coalition.iter().copied().collect(),
                inputs: coalition.iter().map(|&p| inputs[p].clone()).collect(),
                tapes: coalition.iter().map(|&p| tapes[p].clone()).collect(),
                channel_outputs: history,
            }
            .encode())
        })?;
        ExactDistribution::from_pairs(leaves.into_iter().map(|l| (l.value, l.prob)))
    }
}

/// Records one party's draws in the tape format of sampling coins.
struct RecordingCoins<'c> {
    inner: &'c mut dyn Coins,
    tape: Vec<u64>,
}

impl Coins for RecordingCoins<'_> {
    fn uniform(&mut self, n: u64) -> Result<u64> {
        let v = self.inner.uniform(n)?;
        self.tape.push(v);
        Ok(v)
    }

    fn bernoulli(&mut self, p: Prob) -> Result<bool> {
        let b = self.inner.bernoulli(p)?;
        self.tape.push(b as u64);
        Ok(b)
    }
}

/// Exact distribution of `coalition`'s view on `inputs`.
pub fn exact_view_distribution(
    spec: &ProtocolSpec,
    inputs: &[Input],
    coalition: &BTreeSet<usize>,
    mode: ViewMode,
    seed: u64,
    budget: u128,
) -> Result<ExactDistribution> {
    ViewEnumerator::new(spec, mode, seed, budget)?.view_distribution(inputs, coalition)
}
