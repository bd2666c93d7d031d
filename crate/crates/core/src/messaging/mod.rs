//! Key exchange, secure message transmission and private channels, all
//! in a single shuffle round.

pub mod channels;
pub mod kx;
pub mod mpc;
pub mod smt;

pub use channels::{pairwise_channels_round, pairwise_channels_spec, PayloadRow, ShuffleLayout};
pub use kx::{key_exchange, kx_failure_probability, kx_failure_within_bound, KeyExchangeOutcome, PairTag};
pub use mpc::{mpc_in_shuffle_spec, AdditionInner, InnerProtocol, InnerState};
pub use smt::{smt_adversary_distance, smt_receive, smt_send, SmtBundle};
