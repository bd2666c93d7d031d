//! Simulation and privacy-audit workbench for differentially private
//! protocols in the shuffle model.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: parties with stateful randomizers, shuffle and public
//!   channels, deterministic execution, transcripts and coalition views.
//! * [`primitives`]: arithmetic in `Z_q`, pairwise-independent hash families
//!   and split-and-mix summation.
//! * [`messaging`]: one-round key exchange, secure message transmission and
//!   the pairwise private-channel layer built on top of them.
//! * [`histograms`]: a one-bit local-hashing frequency oracle and the
//!   subsampling amplification wrapper.
//! * [`protocols`]: the common-element and nested-common-element protocols.
//! * [`audit`]: exact view enumeration, hockey-stick divergence, information
//!   theory and Monte Carlo statistics.
//!
//! Randomness is drawn from seeded ChaCha streams. It is a simulation
//! device and makes no cryptographic claims.

pub mod audit;
mod error;
pub mod histograms;
pub mod messaging;
pub mod model;
pub mod primitives;
pub mod protocols;

pub use error::{Error, Result};
