//! A single-input mechanism built from one party of a one-round protocol.
//!
//! On input `x` and public string `w`: run the party's randomizer on `x`,
//! run every other randomizer on a uniform domain element, and return `l`
//! of the `l * n` messages chosen uniformly without repetition (`l` is the
//! per-party message count), sorted, together with `w`. Choosing positions
//! of the concatenation directly is the same as choosing them from a
//! uniform permutation of it.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::RngCore;

use crate::model::{
    explore, uniform_subset, Coins, Input, Leaf, Message, ProtocolSpec, RoundContext, RoundKind, SamplingCoins,
};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocalOutput {
    /// The drawn messages, sorted.
    pub selected: Vec<Message>,
    pub w: Vec<u8>,
    /// The party's own messages, sorted.
    pub own: Vec<Message>,
    /// Whether the draw hit exactly the party's own positions.
    pub own_selected: bool,
}

pub struct LocalRandomizer<'a> {
    spec: &'a ProtocolSpec,
    party: usize,
    domain: Vec<Input>,
}

impl<'a> LocalRandomizer<'a> {
    /// `domain` is the input set the other parties draw from.
    pub fn new(spec: &'a ProtocolSpec, party: usize, domain: Vec<Input>) -> Result<Self> {
        spec.validate()?;
        if spec.rounds.len() != 1 || spec.rounds[0].kind != RoundKind::Shuffle {
            return Err(Error::param(
                "spec",
                format!("{} is not a one-round shuffle protocol", spec.name),
            ));
        }
        if party >= spec.n {
            return Err(Error::param("party", format!("{party} not in [0, {})", spec.n)));
        }
        if domain.is_empty() {
            return Err(Error::param("domain", "empty"));
        }
        Ok(LocalRandomizer { spec, party, domain })
    }

    pub fn messages_per_party(&self) -> usize {
        self.spec.rounds[0].messages_per_party
    }

    fn messages(&self, party: usize, input: &Input, w: &[u8], coins: &mut dyn Coins) -> Result<Vec<Message>> {
        let shared = self.spec.prepare(0, w, &[])?;
        let ctx = RoundContext {
            party,
            round: 0,
            n: self.spec.n,
            w,
            input,
            history: &[],
            own_tapes: &[],
            shared: shared.as_deref(),
        };
        self.spec.randomizers[party].generate(&ctx, coins)
    }

    pub fn run(&self, input: &Input, w: &[u8], coins: &mut dyn Coins) -> Result<LocalOutput> {
        let l = self.messages_per_party();
        let n = self.spec.n;
        let mut own = self.messages(self.party, input, w, coins)?;
        let mut all: Vec<Vec<Message>> = vec![Vec::new(); n];
        for j in (0..n).filter(|&j| j != self.party) {
            let x = &self.domain[coins.uniform(self.domain.len() as u64)? as usize];
            all[j] = self.messages(j, x, w, coins)?;
        }
        all[self.party] = own.clone();
        let flat: Vec<Message> = all.into_iter().flatten().collect();
        let picks = uniform_subset(l, l * n, coins)?;
        let own_selected = picks.iter().enumerate().all(|(k, &p)| p == self.party * l + k);
        let mut selected: Vec<Message> = picks.into_iter().map(|p| flat[p].clone()).collect();
        selected.sort_unstable();
        own.sort_unstable();
        Ok(LocalOutput {
            selected,
            w: w.to_vec(),
            own,
            own_selected,
        })
    }

    pub fn sample(&self, input: &Input, w: &[u8], rng: &mut dyn RngCore) -> Result<LocalOutput> {
        self.run(input, w, &mut SamplingCoins::new(rng))
    }

    pub fn enumerate(&self, input: &Input, w: &[u8], budget: u128) -> Result<Vec<Leaf<LocalOutput>>> {
        explore(budget, |c| self.run(input, w, c))
    }

    /// Exact probability that the draw is exactly the party's own bundle.
    pub fn own_selection_probability(&self, input: &Input, w: &[u8], budget: u128) -> Result<BigRational> {
        Ok(self
            .enumerate(input, w, budget)?
            .into_iter()
            .filter(|l| l.value.own_selected)
            .fold(BigRational::zero(), |acc, l| acc + l.prob))
    }
}

fn binomial(n: u64, k: u64) -> BigUint {
    (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// `1 / C(l * n, l)`.
pub fn bundle_probability(n: usize, l: usize) -> BigRational {
    let c = binomial((l * n) as u64, l as u64);
    BigRational::new(1.into(), c.into())
}
