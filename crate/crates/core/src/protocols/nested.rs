//! Nested common element: one-round zero-cell protocol and the two-round
//! composition of two common element sub-protocols.

use serde::{Deserialize, Serialize};

use super::cells::{Branch, CellParty, Layout, ZeroCellAnalyzer};
use super::prelude::{CellProtocol, CellTrial};
use super::two_round::{common_two_round, Candidates, HistogramBackend};
use super::{classify, ElementOutcome};
use crate::model::{seed, Input, Outcome, Transcript};
use crate::{Error, Result};
use rand::RngCore;

/// Inputs split at `floor(alpha * n)`: the first parties hold elements of
/// `X`, the rest hold vectors in `Y^|X|`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NestedInput {
    pub x_domain: u64,
    pub y_domain: u64,
    pub xs: Vec<u64>,
    pub ys: Vec<Vec<u64>>,
}

/// `floor(alpha * n)`.
pub fn split_point(alpha: f64, n: usize) -> Result<usize> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha", format!("{alpha} outside (0, 1)")));
    }
    Ok((alpha * n as f64).floor() as usize)
}

impl NestedInput {
    pub fn new(x_domain: u64, y_domain: u64, xs: Vec<u64>, ys: Vec<Vec<u64>>) -> Result<Self> {
        if xs.is_empty() || ys.is_empty() {
            return Err(Error::param("split", "both sides need at least one party"));
        }
        if x_domain == 0 || y_domain == 0 {
            return Err(Error::param("domain", "must be nonempty"));
        }
        if let Some(x) = xs.iter().find(|&&x| x >= x_domain) {
            return Err(Error::param("xs", format!("{x} outside domain of size {x_domain}")));
        }
        for v in &ys {
            if v.len() as u64 != x_domain || v.iter().any(|&y| y >= y_domain) {
                return Err(Error::param("ys", format!("{v:?} is not a vector in Y^{x_domain}")));
            }
        }
        Ok(NestedInput {
            x_domain,
            y_domain,
            xs,
            ys,
        })
    }

    /// Split `n` parties by `alpha` and fill both sides from `x` and `y`.
    pub fn uniform(alpha: f64, n: usize, x_domain: u64, y_domain: u64, x: u64, y: Vec<u64>) -> Result<Self> {
        let k = split_point(alpha, n)?;
        Self::new(x_domain, y_domain, vec![x; k], vec![y; n - k])
    }

    pub fn n(&self) -> usize {
        self.xs.len() + self.ys.len()
    }

    pub fn to_inputs(&self) -> Vec<Input> {
        self.xs
            .iter()
            .map(|&x| Input::Element(x))
            .chain(self.ys.iter().map(|v| Input::Vector(v.clone())))
            .collect()
    }

    /// The required answer, when the instance is a valid one.
    pub fn expected(&self) -> Option<u64> {
        let x = self.xs[0];
        if self.xs.iter().any(|&v| v != x) {
            return None;
        }
        let y = self.ys[0][x as usize];
        self.ys.iter().all(|v| v[x as usize] == y).then_some(y)
    }
}

/// The one-round nested protocol for `x_parties` element holders followed
/// by `y_parties` vector holders.
pub fn nested_one_round_protocol(
    x_parties: usize,
    y_parties: usize,
    x_domain: u64,
    y_domain: u64,
    q: u64,
    shares: usize,
) -> Result<CellProtocol> {
    if q < 2 {
        return Err(Error::param("q", format!("{q} is not a group size")));
    }
    if x_parties == 0 || y_parties == 0 {
        return Err(Error::param("split", "both sides need at least one party"));
    }
    if x_domain == 0 || y_domain == 0 || shares == 0 {
        return Err(Error::param("domain/shares", "must be at least 1"));
    }
    let n = x_parties + y_parties;
    let party = |layout| CellParty {
        layout,
        modulus: q,
        shares,
        n,
    };
    let mut parties = vec![party(Layout::NestedRow { x_domain, y_domain }); x_parties];
    parties.extend(vec![party(Layout::NestedColumn { x_domain, y_domain }); y_parties]);
    Ok(CellProtocol {
        name: "nested-one-round",
        parties,
        analyzer: ZeroCellAnalyzer {
            modulus: q,
            dim: (x_domain * y_domain) as usize,
            row: Some(y_domain),
        },
    })
}

/// `Some(message)` unless `n >= 6 * max(1/alpha, 1/(1 - alpha))`.
pub fn size_warning(x_parties: usize, y_parties: usize) -> Option<String> {
    let n = (x_parties + y_parties) as f64;
    let alpha = x_parties as f64 / n;
    let need = 6.0 * (1.0 / alpha).max(1.0 / (1.0 - alpha));
    (n < need).then(|| format!("n = {n} is below 6 * max(1/alpha, 1/(1-alpha)) = {need:.2}"))
}

pub fn nested_one_round(input: &NestedInput, q: u64, shares: usize, seed: u64) -> Result<(ElementOutcome, Transcript)> {
    let p = nested_one_round_protocol(
        input.xs.len(),
        input.ys.len(),
        input.x_domain,
        input.y_domain,
        q,
        shares,
    )?;
    let t = p.run(&input.to_inputs(), seed)?;
    Ok((classify(&t.outcome, input.expected()), t))
}

/// Events behind a nested one-round failure on a valid instance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct NestedEvents {
    pub noise: bool,
    /// No element holder or no vector holder participated.
    pub side_absent: bool,
    /// A cell other than the answer cell summed to zero.
    pub accidental_zero: bool,
}

pub fn nested_events(trial: &CellTrial, input: &NestedInput) -> NestedEvents {
    let k = input.xs.len();
    let absent = |bs: &[Branch]| bs.iter().all(|&b| b == Branch::Absent);
    let answer = input.expected().map(|y| (input.xs[0] * input.y_domain + y) as usize);
    NestedEvents {
        noise: trial.branches.contains(&Branch::Noise),
        side_absent: absent(&trial.branches[..k]) || absent(&trial.branches[k..]),
        accidental_zero: trial.sum.iter().enumerate().any(|(c, &v)| Some(c) != answer && v == 0),
    }
}

pub fn nested_failure_mode(e: &NestedEvents) -> &'static str {
    if e.noise {
        "noise-branch"
    } else if e.side_absent {
        "side-absent"
    } else {
        "accidental-zero"
    }
}

/// A protocol for the common element problem among a subset of parties.
pub trait CommonElementSolver: Send + Sync {
    fn solve(&self, inputs: &[u64], domain: u64, seed: u64) -> Result<Outcome>;
}

/// CommonTwoRound run on the subset.
#[derive(Clone, Debug)]
pub struct TwoRoundSolver {
    pub delta: f64,
    pub backend: HistogramBackend,
    pub candidates: Candidates,
    pub range_cap: Option<u64>,
}

impl CommonElementSolver for TwoRoundSolver {
    fn solve(&self, inputs: &[u64], domain: u64, seed: u64) -> Result<Outcome> {
        if inputs.len() < 2 {
            return Err(Error::param("split", "sub-protocol needs at least two parties"));
        }
        let (_, t) = common_two_round(
            inputs,
            domain,
            self.delta,
            self.backend,
            self.candidates.clone(),
            self.range_cap,
            seed,
        )?;
        Ok(t.outcome)
    }
}

/// Both stages of a two-round nested execution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NestedTwoRoundRun {
    pub first: Outcome,
    /// The `x0` column of every vector, when the first stage found `x0`.
    pub column: Option<Vec<u64>>,
    pub second: Option<Outcome>,
    pub outcome: Outcome,
}

/// Stage seeds, independent of each other and of the caller's seed use.
pub fn stage_seed(seed: u64, stage: u64) -> u64 {
    seed::aux_stream("nested-stage", seed, stage).next_u64()
}

/// Find `x0` among element holders, then the common `v[x0]` among vector
/// holders. An abstention or an out-of-domain answer in the first stage
/// ends the run with `Bottom`.
pub fn nested_two_round(
    input: &NestedInput,
    first: &dyn CommonElementSolver,
    second: &dyn CommonElementSolver,
    seed: u64,
) -> Result<NestedTwoRoundRun> {
    let o1 = first.solve(&input.xs, input.x_domain, stage_seed(seed, 0))?;
    let x0 = match o1 {
        Outcome::Element(x) if x < input.x_domain => x,
        _ => {
            return Ok(NestedTwoRoundRun {
                first: o1,
                column: None,
                second: None,
                outcome: Outcome::Bottom,
            })
        }
    };
    let column: Vec<u64> = input.ys.iter().map(|v| v[x0 as usize]).collect();
    let o2 = second.solve(&column, input.y_domain, stage_seed(seed, 1))?;
    let outcome = match o2 {
        Outcome::Element(_) | Outcome::NoAnswer => o2.clone(),
        _ => Outcome::Bottom,
    };
    Ok(NestedTwoRoundRun {
        first: o1,
        column: Some(column),
        second: Some(o2),
        outcome,
    })
}
