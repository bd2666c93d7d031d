//! Vectors of group elements with a planted zero, summed through the shuffle.
//!
//! Each party either abstains (all zeros, probability 1/4) or fills every
//! cell outside its *target* set with uniform group elements and then sets
//! the target cells to zero, except with probability `1/(6n)` where it fills
//! them with uniform elements as well. The analyzer looks for a unique zero
//! in the sum.
//!
//! Draw order on the tape: participation coin, free cells ascending, noise
//! coin, noise cells ascending, then the summation shares.

use crate::model::{tag, Analyzer, ChannelOutput, Coins, Input, Message, Outcome, Prob, Randomizer, RoundContext};
use crate::primitives::ikos::{share_messages, sum_shares};
use crate::{Error, Result};

/// Which branch a party's draw took.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Branch {
    Absent,
    Zero,
    Noise,
}

/// How a party's input selects its target cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Layout {
    /// One cell per domain element; the target is the input.
    Common { domain: u64 },
    /// Cell `x * |Y| + y`; the target is the whole row of the input.
    NestedRow { x_domain: u64, y_domain: u64 },
    /// Cell `x * |Y| + y`; the targets are the cells `(x, v[x])`.
    NestedColumn { x_domain: u64, y_domain: u64 },
}

impl Layout {
    pub fn dim(&self) -> usize {
        match *self {
            Layout::Common { domain } => domain as usize,
            Layout::NestedRow { x_domain, y_domain } | Layout::NestedColumn { x_domain, y_domain } => {
                (x_domain * y_domain) as usize
            }
        }
    }

    /// Target cells for `input`, ascending.
    pub fn targets(&self, input: &Input) -> Result<Vec<usize>> {
        match *self {
            Layout::Common { domain } => {
                let x = input.element()?;
                if x >= domain {
                    return Err(Error::param("input", format!("{x} outside domain of size {domain}")));
                }
                Ok(vec![x as usize])
            }
            Layout::NestedRow { x_domain, y_domain } => {
                let x = input.element()?;
                if x >= x_domain {
                    return Err(Error::param("input", format!("{x} outside domain of size {x_domain}")));
                }
                let start = (x * y_domain) as usize;
                Ok((start..start + y_domain as usize).collect())
            }
            Layout::NestedColumn { x_domain, y_domain } => {
                let v = input.vector()?;
                if v.len() as u64 != x_domain {
                    return Err(Error::param(
                        "input",
                        format!("vector of length {}, expected {x_domain}", v.len()),
                    ));
                }
                v.iter()
                    .enumerate()
                    .map(|(x, &y)| {
                        if y >= y_domain {
                            return Err(Error::param("input", format!("{y} outside domain of size {y_domain}")));
                        }
                        Ok(x * y_domain as usize + y as usize)
                    })
                    .collect()
            }
        }
    }
}

/// One party of a zero-cell protocol.
#[derive(Clone, Debug)]
pub struct CellParty {
    pub layout: Layout,
    pub modulus: u64,
    pub shares: usize,
    /// Total number of parties, for the noise probability.
    pub n: usize,
}

impl CellParty {
    pub fn noise_probability(&self) -> Result<Prob> {
        Prob::ratio(1, 6 * self.n as u64)
    }

    /// The party's vector and the branch it took.
    pub fn draw(&self, input: &Input, coins: &mut dyn Coins) -> Result<(Vec<u64>, Branch)> {
        let targets = self.layout.targets(input)?;
        let dim = self.layout.dim();
        let mut z = vec![0u64; dim];
        if !coins.bernoulli(Prob::ratio(3, 4)?)? {
            return Ok((z, Branch::Absent));
        }
        let mut t = targets.iter().peekable();
        for (cell, slot) in z.iter_mut().enumerate() {
            if t.peek() == Some(&&cell) {
                t.next();
                continue;
            }
            *slot = coins.uniform(self.modulus)?;
        }
        if coins.bernoulli(self.noise_probability()?)? {
            for &cell in &targets {
                z[cell] = coins.uniform(self.modulus)?;
            }
            return Ok((z, Branch::Noise));
        }
        Ok((z, Branch::Zero))
    }
}

impl Randomizer for CellParty {
    fn message_count(&self, round: usize) -> usize {
        if round == 0 {
            self.layout.dim() * self.shares
        } else {
            0
        }
    }

    fn generate(&self, ctx: &RoundContext<'_>, coins: &mut dyn Coins) -> Result<Vec<Message>> {
        let (z, _) = self.draw(ctx.input, coins)?;
        share_messages(&z, self.modulus, self.shares, coins)
    }

    fn contribution(&self, ctx: &RoundContext<'_>, coins: &mut dyn Coins) -> Result<Option<Vec<u64>>> {
        self.draw(ctx.input, coins).map(|(z, _)| Some(z))
    }
}

/// The unique zero cell of `sum`, if there is exactly one.
pub fn unique_zero(sum: &[u64]) -> Option<usize> {
    let mut zeros = sum.iter().enumerate().filter(|(_, &v)| v == 0).map(|(i, _)| i);
    match (zeros.next(), zeros.next()) {
        (Some(i), None) => Some(i),
        _ => None,
    }
}

/// Outputs the unique zero cell (reduced mod `row` for nested layouts), or
/// `Bottom` when there is none or more than one.
#[derive(Clone, Debug)]
pub struct ZeroCellAnalyzer {
    pub modulus: u64,
    pub dim: usize,
    /// `Some(|Y|)` to output the column of the zero cell.
    pub row: Option<u64>,
}

impl Analyzer for ZeroCellAnalyzer {
    fn analyze(&self, w: &[u8], outputs: &[ChannelOutput]) -> Result<Outcome> {
        let out = outputs
            .first()
            .ok_or_else(|| Error::Internal("summation output missing".into()))?;
        if let Some(m) = out.messages().iter().find(|m| m.tag() != tag::SHARE) {
            return Err(Error::Decode(format!("unexpected message {m:?}")));
        }
        self.analyze_sum(w, &sum_shares(out, self.modulus, self.dim)?)
    }

    fn analyze_sum(&self, _w: &[u8], sum: &[u64]) -> Result<Outcome> {
        if sum.len() != self.dim {
            return Err(Error::Internal(format!("sum of length {}", sum.len())));
        }
        Ok(match unique_zero(sum) {
            Some(cell) => Outcome::Element(match self.row {
                Some(r) => cell as u64 % r,
                None => cell as u64,
            }),
            None => Outcome::Bottom,
        })
    }
}
