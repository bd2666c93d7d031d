//! One-round common element protocol built on secure summation.

use std::sync::Arc;

use super::cells::{Branch, CellParty, Layout, ZeroCellAnalyzer};
use super::{classify, common_value, ElementOutcome};
use crate::model::protocol::add_into;
use crate::model::{
    run_protocol, seed, IdealSum, Input, Outcome, ProtocolSpec, Randomizer, RoundSpec, SamplingCoins, Transcript,
};
use crate::primitives::{share_count, smallest_prime_at_least};
use crate::{Error, Result};

/// A zero-cell protocol: its parties, analyzer and summation group.
#[derive(Clone, Debug)]
pub struct CellProtocol {
    pub name: &'static str,
    pub parties: Vec<CellParty>,
    pub analyzer: ZeroCellAnalyzer,
}

/// One execution with the summation replaced by its ideal functionality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellTrial {
    pub outcome: Outcome,
    pub branches: Vec<Branch>,
    pub sum: Vec<u64>,
}

impl CellProtocol {
    pub fn modulus(&self) -> u64 {
        self.analyzer.modulus
    }

    pub fn dim(&self) -> usize {
        self.analyzer.dim
    }

    pub fn spec(&self) -> Result<ProtocolSpec> {
        let shares = self.parties[0].shares;
        Ok(ProtocolSpec::new(
            self.name,
            vec![RoundSpec::shuffle(self.dim() * shares)?],
            self.parties
                .iter()
                .map(|p| Arc::new(p.clone()) as Arc<dyn Randomizer>)
                .collect(),
            Arc::new(self.analyzer.clone()),
            0,
        )?
        .with_ideal_sum(IdealSum {
            modulus: self.modulus(),
            dim: self.dim(),
        }))
    }

    /// Same party streams as [`crate::model::run_ideal_sum`], keeping each
    /// party's branch.
    pub fn trial(&self, inputs: &[Input], seed: u64) -> Result<CellTrial> {
        if inputs.len() != self.parties.len() {
            return Err(Error::param(
                "inputs",
                format!("{} inputs for {} parties", inputs.len(), self.parties.len()),
            ));
        }
        let mut sum = vec![0u64; self.dim()];
        let mut branches = Vec::with_capacity(inputs.len());
        for (i, (p, x)) in self.parties.iter().zip(inputs).enumerate() {
            let mut rng = seed::party_stream(seed, i, 0);
            let mut coins = SamplingCoins::new(&mut rng);
            let (z, b) = p.draw(x, &mut coins)?;
            add_into(&mut sum, &z, self.modulus())?;
            branches.push(b);
        }
        let outcome = crate::model::Analyzer::analyze_sum(&self.analyzer, &[], &sum)?;
        Ok(CellTrial { outcome, branches, sum })
    }

    /// Full execution through the shuffle.
    pub fn run(&self, inputs: &[Input], seed: u64) -> Result<Transcript> {
        run_protocol(&self.spec()?, inputs, seed)
    }
}

/// `Some(message)` when `q` is below the size that bounds accidental zeros.
pub fn correctness_warning(q: u64, cells: usize) -> Option<String> {
    let need = 16 * cells as u64;
    (q < need).then(|| format!("q = {q} is below 16 * {cells} = {need}; correctness is not guaranteed"))
}

/// Smallest prime modulus meeting the correctness bound for `cells` cells.
pub fn default_modulus(cells: usize) -> Result<u64> {
    smallest_prime_at_least(16 * cells as u64)
}

/// CommonPrelude over a domain of `domain` elements.
pub fn common_prelude_protocol(n: usize, domain: u64, q: u64, shares: usize) -> Result<CellProtocol> {
    if q < 2 {
        return Err(Error::param("q", format!("{q} is not a group size")));
    }
    if domain == 0 {
        return Err(Error::param("domain", "must be nonempty"));
    }
    if n == 0 || shares == 0 {
        return Err(Error::param("n/shares", "must be at least 1"));
    }
    let party = CellParty {
        layout: Layout::Common { domain },
        modulus: q,
        shares,
        n,
    };
    Ok(CellProtocol {
        name: "common-prelude",
        parties: vec![party; n],
        analyzer: ZeroCellAnalyzer {
            modulus: q,
            dim: domain as usize,
            row: None,
        },
    })
}

/// Run CommonPrelude on `inputs` through the shuffle with the share count
/// for `sigma`.
pub fn common_prelude(
    inputs: &[u64],
    domain: u64,
    q: u64,
    sigma: u32,
    seed: u64,
) -> Result<(ElementOutcome, Transcript)> {
    let n = inputs.len();
    let proto = common_prelude_protocol(n, domain, q, share_count(sigma, q, n))?;
    let xs: Vec<Input> = inputs.iter().map(|&x| Input::Element(x)).collect();
    let t = proto.run(&xs, seed)?;
    Ok((classify(&t.outcome, common_value(inputs)), t))
}

/// Events behind a CommonPrelude failure on all-equal inputs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PreludeEvents {
    /// Some party took the noise branch.
    pub noise: bool,
    /// Every party abstained.
    pub nobody: bool,
    /// A coordinate other than the common input summed to zero.
    pub accidental_zero: bool,
}

pub fn prelude_events(trial: &CellTrial, common: u64) -> PreludeEvents {
    PreludeEvents {
        noise: trial.branches.contains(&Branch::Noise),
        nobody: trial.branches.iter().all(|&b| b == Branch::Absent),
        accidental_zero: trial.sum.iter().enumerate().any(|(x, &v)| x as u64 != common && v == 0),
    }
}

/// Name of the first event that explains a failed trial.
pub fn prelude_failure_mode(e: &PreludeEvents) -> &'static str {
    if e.noise {
        "noise-branch"
    } else if e.nobody {
        "nobody-participated"
    } else {
        "accidental-zero"
    }
}
