//! What a coalition observes: the public string, its members' inputs and
//! randomness, and every channel output.

use std::collections::BTreeSet;

use super::coins::Tape;
use super::message::write_varint;
use super::protocol::{ChannelOutput, Input};
use super::transcript::{write_bytes, write_tape, Transcript};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CoalitionView {
    pub w: Vec<u8>,
    pub members: Vec<usize>,
    pub inputs: Vec<Input>,
    /// `tapes[k][round]` for the `k`-th member.
    pub tapes: Vec<Vec<Tape>>,
    pub channel_outputs: Vec<ChannelOutput>,
}

impl CoalitionView {
    /// Canonical encoding; equal views encode equally.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        write_bytes(&mut out, &self.w);
        write_varint(&mut out, self.members.len() as u64);
        for (k, &m) in self.members.iter().enumerate() {
            write_varint(&mut out, m as u64);
            self.inputs[k].encode(&mut out);
            write_varint(&mut out, self.tapes[k].len() as u64);
            for t in &self.tapes[k] {
                write_tape(&mut out, t);
            }
        }
        write_varint(&mut out, self.channel_outputs.len() as u64);
        for c in &self.channel_outputs {
            c.encode(&mut out);
        }
        out
    }
}

/// Project a transcript onto the view of `coalition`.
pub fn coalition_view(t: &Transcript, coalition: &BTreeSet<usize>) -> Result<CoalitionView> {
    let n = t.inputs.len();
    if let Some(&bad) = coalition.iter().find(|&&p| p >= n) {
        return Err(Error::param("coalition", format!("party {bad} not in [0, {n})")));
    }
    Ok(CoalitionView {
        w: t.w.clone(),
        members: coalition.iter().copied().collect(),
        inputs: coalition.iter().map(|&p| t.inputs[p].clone()).collect(),
        tapes: coalition.iter().map(|&p| t.tapes[p].clone()).collect(),
        channel_outputs: t.channel_outputs.clone(),
    })
}
