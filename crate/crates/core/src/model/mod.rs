//! Execution model: parties with stateful randomizers, shuffle and public
//! channels, transcripts and coalition views.

pub mod coins;
pub mod message;
pub mod protocol;
pub mod seed;
pub mod transcript;
pub mod view;

pub use coins::{explore, uniform_subset, Coins, Leaf, Prob, ReplayCoins, SamplingCoins, Tape};
pub use message::{tag, Message, MessageBuilder};
pub use protocol::{
    public_round, run_ideal_sum, run_protocol, shuffle_round, Analyzer, ChannelOutput, IdealSum, Input, Outcome,
    ProtocolSpec, Randomizer, RoundContext, RoundKind, RoundPreparer, RoundSpec,
};
pub use transcript::Transcript;
pub use view::{coalition_view, CoalitionView};
