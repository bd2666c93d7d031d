//! Element-finding protocols.

pub mod cells;
pub mod nested;
pub mod prelude;
pub mod toy;
pub mod two_round;

use serde::Serialize;

use crate::model::Outcome;

pub use cells::{unique_zero, Branch, CellParty, Layout, ZeroCellAnalyzer};
pub use nested::{
    nested_one_round, nested_one_round_protocol, nested_two_round, CommonElementSolver, NestedInput, NestedTwoRoundRun,
    TwoRoundSolver,
};
pub use prelude::{common_prelude, common_prelude_protocol, CellProtocol, CellTrial};
pub use two_round::{
    common_two_round, common_two_round_spec, Candidates, HistogramBackend, InjectedHistogram, TwoRoundParams,
};

/// An analyzer outcome judged against the required answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ElementOutcome {
    Found(u64),
    /// The analyzer abstained.
    Bottom,
    /// A wrong element, or no answer where one was required.
    Fail,
}

/// `expected` is the required answer, or `None` when any answer is allowed.
pub fn classify(outcome: &Outcome, expected: Option<u64>) -> ElementOutcome {
    match (outcome, expected) {
        (Outcome::Element(x), Some(e)) if *x != e => ElementOutcome::Fail,
        (Outcome::Element(x), _) => ElementOutcome::Found(*x),
        (Outcome::Bottom, _) => ElementOutcome::Bottom,
        (_, Some(_)) => ElementOutcome::Fail,
        (_, None) => ElementOutcome::Bottom,
    }
}

/// The shared value when all inputs are equal.
pub fn common_value(inputs: &[u64]) -> Option<u64> {
    let first = *inputs.first()?;
    inputs.iter().all(|&x| x == first).then_some(first)
}
