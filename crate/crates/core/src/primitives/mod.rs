//! Group arithmetic, hash families and split-and-mix summation.

pub mod group;
pub mod hash;
pub mod ikos;
pub mod prime;

pub use group::{sample_uniform_group, GroupVector, ZqElement};
pub use hash::{AffineHash, ToeplitzHash};
pub use ikos::{ikos_split, ikos_sum, ikos_sum_spec, share_count, DEFAULT_SIGMA};
pub use prime::{is_prime, smallest_prime_at_least};
