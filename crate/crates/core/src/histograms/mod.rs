//! Local-model frequency oracle and subsampling amplification.

pub mod ldp;
pub mod subsample;

pub use ldp::{
    keep_probability, ldp_histogram, ldp_histogram_spec, likelihood_ratio, party_hash, FrequencyOracle, LdpRandomizer,
};
pub use subsample::{
    amplified_delta, output_distribution, subsample_size, ConstantCoin, Mechanism, RandomizedResponse, Subsampled,
};
