//! Protocols the tool knows by name.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::config::CommandKind;
use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolName {
    CommonPrelude,
    CommonTwoRound,
    NestedOneRound,
    NestedTwoRound,
    IkosSum,
    PairwiseChannels,
    InputIgnoring,
    RandomizedResponse,
}

impl ProtocolName {
    pub const ALL: [ProtocolName; 8] = [
        ProtocolName::CommonPrelude,
        ProtocolName::CommonTwoRound,
        ProtocolName::NestedOneRound,
        ProtocolName::NestedTwoRound,
        ProtocolName::IkosSum,
        ProtocolName::PairwiseChannels,
        ProtocolName::InputIgnoring,
        ProtocolName::RandomizedResponse,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolName::CommonPrelude => "common-prelude",
            ProtocolName::CommonTwoRound => "common-two-round",
            ProtocolName::NestedOneRound => "nested-one-round",
            ProtocolName::NestedTwoRound => "nested-two-round",
            ProtocolName::IkosSum => "ikos-sum",
            ProtocolName::PairwiseChannels => "pairwise-channels",
            ProtocolName::InputIgnoring => "input-ignoring",
            ProtocolName::RandomizedResponse => "randomized-response",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ProtocolName::CommonPrelude => "one-round common element via zero cells of a secure sum",
            ProtocolName::CommonTwoRound => "public histogram round, then a shuffled plurality vote",
            ProtocolName::NestedOneRound => "one-round nested common element via zero cells",
            ProtocolName::NestedTwoRound => "two common-two-round stages: find x0, then v[x0]",
            ProtocolName::IkosSum => "split-and-mix secure summation over Z_q",
            ProtocolName::PairwiseChannels => "private channels between all pairs through one shuffle",
            ProtocolName::InputIgnoring => "toy: uniform coins, inputs ignored",
            ProtocolName::RandomizedResponse => "toy: publishes a randomized input bit",
        }
    }

    pub fn supports(self, command: CommandKind) -> bool {
        match command {
            CommandKind::Run | CommandKind::Info => true,
            CommandKind::Mc => !matches!(self, ProtocolName::InputIgnoring | ProtocolName::RandomizedResponse),
            CommandKind::Audit => self != ProtocolName::NestedTwoRound,
        }
    }

    pub fn registry() -> String {
        Self::ALL.map(Self::as_str).join(", ")
    }
}

impl fmt::Display for ProtocolName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProtocolName {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| CliError::UnknownProtocol {
                name: s.to_string(),
                registry: Self::registry(),
            })
    }
}
