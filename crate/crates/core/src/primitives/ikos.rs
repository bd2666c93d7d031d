//! Split-and-mix summation over `Z_q^d` in one shuffle round.
//!
//! Every party splits each coordinate of its vector into `shares` additive
//! shares and sends them all, tagged with their coordinate, through the
//! shuffle. The analyzer adds everything up per coordinate. Correctness is
//! unconditional.

use std::sync::Arc;

use super::group::{add_mod, sample_uniform_group, sub_mod, GroupVector, ZqElement};
use crate::model::{
    run_protocol, tag, Analyzer, ChannelOutput, Coins, IdealSum, Input, Message, Outcome, ProtocolSpec, Randomizer,
    RoundContext, RoundSpec, Transcript,
};
use crate::{Error, Result};

/// Default statistical security parameter.
pub const DEFAULT_SIGMA: u32 = 40;

fn ceil_log2(v: u64) -> u32 {
    if v <= 1 {
        0
    } else {
        64 - (v - 1).leading_zeros()
    }
}

/// Shares per coordinate: `sigma + ceil(log2 q) + ceil(log2 n)`.
pub fn share_count(sigma: u32, q: u64, n: usize) -> usize {
    (sigma + ceil_log2(q) + ceil_log2(n as u64)) as usize
}

/// Split `x` into `shares` additive shares: all but the last uniform, the
/// last completing the sum.
pub fn ikos_split(x: ZqElement, shares: usize, coins: &mut dyn Coins) -> Result<Vec<ZqElement>> {
    if shares == 0 {
        return Err(Error::param("shares", "need at least one share"));
    }
    let q = x.modulus();
    let mut out = Vec::with_capacity(shares);
    let mut partial = 0u64;
    for _ in 1..shares {
        let s = sample_uniform_group(q, coins)?;
        partial = add_mod(partial, s.value(), q);
        out.push(s);
    }
    out.push(ZqElement::new(sub_mod(x.value(), partial, q), q)?);
    Ok(out)
}

/// Share messages for a whole vector, coordinate by coordinate.
pub fn share_messages(z: &[u64], q: u64, shares: usize, coins: &mut dyn Coins) -> Result<Vec<Message>> {
    let mut msgs = Vec::with_capacity(z.len() * shares);
    for (coord, &v) in z.iter().enumerate() {
        for s in ikos_split(ZqElement::new(v, q)?, shares, coins)? {
            msgs.push(Message::builder(tag::SHARE).uint(coord as u64).uint(s.value()).finish());
        }
    }
    Ok(msgs)
}

/// Per-coordinate sums of the share messages in a shuffle output.
pub fn sum_shares(output: &ChannelOutput, q: u64, dim: usize) -> Result<Vec<u64>> {
    let mut sum = vec![0u64; dim];
    for m in output.messages() {
        if m.tag() != tag::SHARE {
            return Err(Error::Decode(format!("unexpected message {m:?}")));
        }
        let coord = m.field_u64(0)? as usize;
        let v = m.field_u64(1)?;
        if coord >= dim || v >= q {
            return Err(Error::Decode(format!("share out of range: {m:?}")));
        }
        sum[coord] = add_mod(sum[coord], v, q);
    }
    Ok(sum)
}

/// Reads a party's vector input and shares it.
#[derive(Clone, Debug)]
pub struct SummationRandomizer {
    pub modulus: u64,
    pub dim: usize,
    pub shares: usize,
}

impl SummationRandomizer {
    fn input_vector(&self, input: &Input) -> Result<Vec<u64>> {
        let v = match input {
            Input::Element(x) => vec![*x],
            Input::Vector(v) => v.clone(),
            other => return Err(Error::param("input", format!("{other:?} is not a group vector"))),
        };
        Ok(GroupVector::new(v, self.modulus)?.into_entries())
    }
}

impl Randomizer for SummationRandomizer {
    fn message_count(&self, round: usize) -> usize {
        if round == 0 {
            self.dim * self.shares
        } else {
            0
        }
    }

    fn generate(&self, ctx: &RoundContext<'_>, coins: &mut dyn Coins) -> Result<Vec<Message>> {
        let z = self.input_vector(ctx.input)?;
        if z.len() != self.dim {
            return Err(Error::param("input", format!("length {} != {}", z.len(), self.dim)));
        }
        share_messages(&z, self.modulus, self.shares, coins)
    }

    fn contribution(&self, ctx: &RoundContext<'_>, _coins: &mut dyn Coins) -> Result<Option<Vec<u64>>> {
        self.input_vector(ctx.input).map(Some)
    }
}

#[derive(Clone, Debug)]
pub struct SummationAnalyzer {
    pub modulus: u64,
    pub dim: usize,
}

impl Analyzer for SummationAnalyzer {
    fn analyze(&self, _w: &[u8], outputs: &[ChannelOutput]) -> Result<Outcome> {
        let out = outputs
            .first()
            .ok_or_else(|| Error::Internal("summation has one round".into()))?;
        Ok(Outcome::Values(sum_shares(out, self.modulus, self.dim)?))
    }

    fn analyze_sum(&self, _w: &[u8], sum: &[u64]) -> Result<Outcome> {
        Ok(Outcome::Values(sum.to_vec()))
    }
}

/// The one-round summation protocol for `n` parties over `Z_q^dim`.
pub fn ikos_sum_spec(n: usize, modulus: u64, dim: usize, shares: usize) -> Result<ProtocolSpec> {
    if modulus < 2 {
        return Err(Error::param("q", "modulus below 2"));
    }
    if dim == 0 || shares == 0 {
        return Err(Error::param("dim/shares", "must be at least 1"));
    }
    let rz = Arc::new(SummationRandomizer { modulus, dim, shares });
    Ok(ProtocolSpec::new(
        "ikos-sum",
        vec![RoundSpec::shuffle(dim * shares)?],
        (0..n).map(|_| rz.clone() as Arc<dyn Randomizer>).collect(),
        Arc::new(SummationAnalyzer { modulus, dim }),
        0,
    )?
    .with_ideal_sum(IdealSum { modulus, dim }))
}

/// Sum `inputs` through the shuffle with the default share count for `sigma`.
pub fn ikos_sum(inputs: &[GroupVector], sigma: u32, seed: u64) -> Result<(GroupVector, Transcript)> {
    let first = inputs
        .first()
        .ok_or_else(|| Error::param("inputs", "need at least one party"))?;
    let (q, dim) = (first.modulus(), first.len());
    for v in inputs {
        if v.modulus() != q {
            return Err(Error::ModulusMismatch {
                left: q,
                right: v.modulus(),
            });
        }
        if v.len() != dim {
            return Err(Error::param("inputs", "vectors differ in length"));
        }
    }
    let spec = ikos_sum_spec(inputs.len(), q, dim, share_count(sigma, q, inputs.len()))?;
    let t = run_protocol(
        &spec,
        &inputs
            .iter()
            .map(|v| Input::Vector(v.entries().to_vec()))
            .collect::<Vec<_>>(),
        seed,
    )?;
    let Outcome::Values(sum) = &t.outcome else {
        return Err(Error::Internal("summation produced no values".into()));
    };
    Ok((GroupVector::new(sum.clone(), q)?, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{explore, SamplingCoins};
    use num_rational::BigRational;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn share_count_formula() {
        assert_eq!(share_count(40, 131, 20), 40 + 8 + 5);
        assert_eq!(share_count(0, 2, 1), 1);
        assert_eq!(share_count(40, 8, 4), 45);
    }

    #[test]
    fn one_share_is_the_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut c = SamplingCoins::new(&mut rng);
        let x = ZqElement::new(4, 7).unwrap();
        assert_eq!(ikos_split(x, 1, &mut c).unwrap(), vec![x]);
    }

    #[test]
    fn first_share_marginal_is_uniform() {
        let x = ZqElement::new(2, 3).unwrap();
        let leaves = explore(100, |c| Ok(ikos_split(x, 2, c)?[0].value())).unwrap();
        let mut per = [
            BigRational::from_integer(0.into()),
            BigRational::from_integer(0.into()),
            BigRational::from_integer(0.into()),
        ];
        for l in leaves {
            per[l.value as usize] += l.prob;
        }
        for p in per {
            assert_eq!(p, BigRational::new(1.into(), 3.into()));
        }
    }

    #[test]
    fn single_party_sum_is_its_input() {
        let x = GroupVector::new(vec![3, 0, 6], 7).unwrap();
        let (sum, _) = ikos_sum(&[x.clone()], 40, 9).unwrap();
        assert_eq!(sum, x);
    }

    #[test]
    fn mismatched_moduli_rejected() {
        let a = GroupVector::new(vec![1], 5).unwrap();
        let b = GroupVector::new(vec![1], 7).unwrap();
        assert!(matches!(ikos_sum(&[a, b], 40, 0), Err(Error::ModulusMismatch { .. })));
    }

    proptest! {
        #[test]
        fn split_reconstructs(
            qi in 0usize..4, li in 0usize..3, x in any::<u64>(), seed in any::<u64>()
        ) {
            let q = [2u64, 3, 16, 257][qi];
            let l = [1usize, 2, 5][li];
            let x = ZqElement::reduce(x, q).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut c = SamplingCoins::new(&mut rng);
            let shares = ikos_split(x, l, &mut c).unwrap();
            prop_assert_eq!(shares.len(), l);
            let sum = shares.into_iter().fold(ZqElement::zero(q).unwrap(), |a, b| a + b);
            prop_assert_eq!(sum, x);
        }

        #[test]
        fn summation_is_exact(
            q in 2u64..1000, n in 1usize..6, dim in 1usize..4, sigma in 0u32..6, seed in any::<u64>(),
            raw in prop::collection::vec(any::<u64>(), 24),
        ) {
            let inputs: Vec<GroupVector> = (0..n)
                .map(|i| GroupVector::new((0..dim).map(|d| raw[i * 4 + d] % q).collect(), q).unwrap())
                .collect();
            let expect = inputs.iter().skip(1).fold(inputs[0].clone(), |a, b| a.try_add(b).unwrap());
            let (sum, t) = ikos_sum(&inputs, sigma, seed).unwrap();
            prop_assert_eq!(sum, expect);
            prop_assert_eq!(t.channel_outputs[0].messages().len(), n * dim * share_count(sigma, q, n));
        }
    }
}
