//! How much one party's messages reveal about its input.
//!
//! The measured quantity is `I(Y_i, W; Z_i)` for a one-round protocol,
//! where `Z_i` is uniform on the supplied domain, `W` the public string and
//! `Y_i` the party's sorted messages. It is reported next to
//!
//! ```text
//! (e n)^l (eps^2 + (delta/eps) log|X| + (delta/eps) log(eps/delta)) + l log(4 e n)
//! ```
//!
//! with the unspecified leading constant set to one. The reference value
//! is not a bound and nothing is judged against it.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use serde::Serialize;

use super::dist::JointDistribution;
use super::info::mutual_information;
use super::view::DEFAULT_BUDGET;
use crate::model::message::write_varint;
use crate::model::seed::public_randomness;
use crate::model::{explore, Input, ProtocolSpec, RoundContext};
use crate::{Error, Result};

/// Public strings up to this many bits are enumerated; longer ones are
/// fixed from the seed.
pub const MAX_ENUMERATED_W_BITS: usize = 16;

pub const MI_NOTE: &str = "reference value uses a unit constant and is not a bound";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MiDiagnostic {
    pub party: usize,
    pub messages_per_party: usize,
    pub domain_size: usize,
    /// Bits.
    pub measured: f64,
    pub reference: f64,
    pub ratio: f64,
    /// Whether `W` was enumerated or fixed.
    pub w_enumerated: bool,
    pub note: &'static str,
}

/// Unit-constant reference value, in bits.
pub fn reference_value(n: usize, l: usize, domain_size: usize, epsilon: f64, delta: f64) -> f64 {
    let e = std::f64::consts::E;
    let core = epsilon * epsilon
        + (delta / epsilon) * (domain_size as f64).log2()
        + (delta / epsilon) * (epsilon / delta).log2();
    (e * n as f64).powi(l as i32) * core + l as f64 * (4.0 * e * n as f64).log2()
}

fn all_strings(bits: usize) -> Vec<Vec<u8>> {
    let bytes = bits.div_ceil(8);
    (0..1u64 << bits)
        .map(|v| (0..bytes).map(|k| (v >> (8 * k)) as u8).collect())
        .collect()
}

pub fn mi_diagnostic(
    spec: &ProtocolSpec,
    party: usize,
    domain: &[Input],
    epsilon: f64,
    delta: f64,
    seed: u64,
) -> Result<MiDiagnostic> {
    spec.validate()?;
    if spec.rounds.len() != 1 {
        return Err(Error::param("spec", "needs a single round"));
    }
    if party >= spec.n || domain.is_empty() {
        return Err(Error::param("party", "party out of range or empty domain"));
    }
    if !(epsilon > 0.0 && delta > 0.0) {
        return Err(Error::param("epsilon", "epsilon and delta must be positive"));
    }
    let bits = spec.public_randomness_bits;
    let w_enumerated = bits <= MAX_ENUMERATED_W_BITS;
    let ws = if w_enumerated {
        all_strings(bits)
    } else {
        vec![public_randomness(seed, bits)]
    };
    let weight = 1.0 / (ws.len() * domain.len()) as f64;
    let mut ids: BTreeMap<Vec<u8>, u64> = BTreeMap::new();
    let mut pairs = Vec::new();
    for w in &ws {
        let shared = spec.prepare(0, w, &[])?;
        for (z, input) in domain.iter().enumerate() {
            let ctx = RoundContext {
                party,
                round: 0,
                n: spec.n,
                w,
                input,
                history: &[],
                own_tapes: &[],
                shared: shared.as_deref(),
            };
            let leaves = explore(DEFAULT_BUDGET, |c| spec.randomizers[party].generate(&ctx, c))?;
            for l in leaves {
                let mut msgs = l.value;
                msgs.sort_unstable();
                let mut key = w.clone();
                write_varint(&mut key, msgs.len() as u64);
                for m in &msgs {
                    key.extend_from_slice(m.as_bytes());
                }
                let next = ids.len() as u64;
                let id = *ids.entry(key).or_insert(next);
                pairs.push((vec![id, z as u64], weight * l.prob.to_f64().unwrap_or(0.0)));
            }
        }
    }
    let joint = JointDistribution::from_pairs(2, pairs)?;
    let measured = mutual_information(&joint, &[0], &[1])?;
    let l = spec.rounds[0].messages_per_party;
    let reference = reference_value(spec.n, l, domain.len(), epsilon, delta);
    Ok(MiDiagnostic {
        party,
        messages_per_party: l,
        domain_size: domain.len(),
        measured,
        reference,
        ratio: measured / reference,
        w_enumerated,
        note: MI_NOTE,
    })
}
