//! Small reference protocols with known privacy behavior.

use std::sync::Arc;

use crate::histograms::ldp::keep_probability;
use crate::model::{
    tag, Analyzer, ChannelOutput, Coins, Message, Outcome, Prob, ProtocolSpec, Randomizer, RoundContext, RoundSpec,
};
use crate::{Error, Result};

fn bit_message(b: bool) -> Message {
    Message::builder(tag::RAW).uint(b as u64).finish()
}

fn read_bit(m: &Message) -> Result<bool> {
    Ok(m.field_u64(0)? == 1)
}

/// Sends `width` fair coins and never looks at its input.
struct CoinParty {
    width: usize,
}

impl Randomizer for CoinParty {
    fn message_count(&self, round: usize) -> usize {
        if round == 0 {
            self.width
        } else {
            0
        }
    }

    fn generate(&self, _ctx: &RoundContext<'_>, coins: &mut dyn Coins) -> Result<Vec<Message>> {
        (0..self.width).map(|_| Ok(bit_message(coins.bit()?))).collect()
    }
}

/// Outputs the number of one-bits.
struct OnesAnalyzer;

impl Analyzer for OnesAnalyzer {
    fn analyze(&self, _w: &[u8], outputs: &[ChannelOutput]) -> Result<Outcome> {
        let mut ones = 0;
        for o in outputs {
            for m in o.messages() {
                ones += read_bit(m)? as u64;
            }
        }
        Ok(Outcome::Element(ones))
    }
}

/// One shuffle round of fair coins.
pub fn input_ignoring_spec(n: usize, width: usize) -> Result<ProtocolSpec> {
    if width == 0 {
        return Err(Error::param("width", "must be at least 1"));
    }
    let p = Arc::new(CoinParty { width });
    ProtocolSpec::new(
        "input-ignoring",
        vec![RoundSpec::shuffle(width)?],
        (0..n).map(|_| p.clone() as Arc<dyn Randomizer>).collect(),
        Arc::new(OnesAnalyzer),
        0,
    )
}

/// Publishes its input bit, flipped with probability `1 - keep`.
struct ResponseParty {
    keep: Prob,
}

impl Randomizer for ResponseParty {
    fn message_count(&self, round: usize) -> usize {
        (round == 0) as usize
    }

    fn generate(&self, ctx: &RoundContext<'_>, coins: &mut dyn Coins) -> Result<Vec<Message>> {
        let x = ctx.input.element()?;
        if x > 1 {
            return Err(Error::param("input", format!("{x} is not a bit")));
        }
        let kept = coins.bernoulli(self.keep)?;
        Ok(vec![bit_message((x == 1) == kept)])
    }
}

struct BitsAnalyzer;

impl Analyzer for BitsAnalyzer {
    fn analyze(&self, _w: &[u8], outputs: &[ChannelOutput]) -> Result<Outcome> {
        let bits = outputs
            .iter()
            .flat_map(|o| o.messages())
            .map(read_bit)
            .collect::<Result<Vec<_>>>()?;
        Ok(Outcome::Bits(bits))
    }
}

/// Randomized response on a public channel; the flip probability is
/// `1 / (1 + e^eps)`.
pub fn randomized_response_spec(n: usize, epsilon: f64) -> Result<ProtocolSpec> {
    let p = Arc::new(ResponseParty {
        keep: keep_probability(epsilon)?,
    });
    ProtocolSpec::new(
        "randomized-response",
        vec![RoundSpec::public()],
        (0..n).map(|_| p.clone() as Arc<dyn Randomizer>).collect(),
        Arc::new(BitsAnalyzer),
        0,
    )
}

/// Sends its input unchanged.
struct IdentityParty;

impl Randomizer for IdentityParty {
    fn message_count(&self, round: usize) -> usize {
        (round == 0) as usize
    }

    fn generate(&self, ctx: &RoundContext<'_>, _coins: &mut dyn Coins) -> Result<Vec<Message>> {
        Ok(vec![Message::builder(tag::ELEMENT).uint(ctx.input.element()?).finish()])
    }
}

struct CountAnalyzer;

impl Analyzer for CountAnalyzer {
    fn analyze(&self, _w: &[u8], outputs: &[ChannelOutput]) -> Result<Outcome> {
        Ok(Outcome::Element(
            outputs.iter().map(|o| o.messages().len() as u64).sum(),
        ))
    }
}

/// One shuffle round where every party sends its input.
pub fn identity_spec(n: usize) -> Result<ProtocolSpec> {
    let p = Arc::new(IdentityParty);
    ProtocolSpec::new(
        "identity",
        vec![RoundSpec::shuffle(1)?],
        (0..n).map(|_| p.clone() as Arc<dyn Randomizer>).collect(),
        Arc::new(CountAnalyzer),
        0,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{run_protocol, Input};

    #[test]
    fn toys_run() {
        let t = run_protocol(
            &input_ignoring_spec(3, 2).unwrap(),
            &[Input::None, Input::None, Input::None],
            1,
        )
        .unwrap();
        assert!(matches!(t.outcome, Outcome::Element(k) if k <= 6));
        let t = run_protocol(
            &randomized_response_spec(2, 40.0).unwrap(),
            &[Input::Element(1), Input::Element(0)],
            1,
        )
        .unwrap();
        assert_eq!(t.outcome, Outcome::Bits(vec![true, false]));
        assert!(run_protocol(&randomized_response_spec(1, 1.0).unwrap(), &[Input::Element(2)], 1).is_err());
        let t = run_protocol(&identity_spec(2).unwrap(), &[Input::Element(5), Input::Element(3)], 0).unwrap();
        assert_eq!(t.channel_outputs[0].messages().len(), 2);
    }
}
