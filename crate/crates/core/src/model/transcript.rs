//! Full record of one execution and its versioned binary encoding.
//!
//! ```text
//! "SDPT" | version: u8 | w: bytes | n: varint | inputs
//!        | per party: round count, tapes | round count, channel outputs
//!        | outcome
//! ```
//!
//! Equal transcripts encode to equal bytes and decoding accepts only
//! canonical encodings.

use super::coins::Tape;
use super::message::{write_varint, Reader};
use super::protocol::{ChannelOutput, Input, Outcome};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"SDPT";
pub const TRANSCRIPT_VERSION: u8 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript {
    pub w: Vec<u8>,
    pub inputs: Vec<Input>,
    /// `tapes[party][round]`.
    pub tapes: Vec<Vec<Tape>>,
    pub channel_outputs: Vec<ChannelOutput>,
    pub outcome: Outcome,
}

pub(crate) fn write_bytes(out: &mut Vec<u8>, b: &[u8]) {
    write_varint(out, b.len() as u64);
    out.extend_from_slice(b);
}

pub(crate) fn write_tape(out: &mut Vec<u8>, t: &Tape) {
    write_varint(out, t.0.len() as u64);
    for &d in &t.0 {
        write_varint(out, d);
    }
}

pub(crate) fn read_tape(r: &mut Reader<'_>) -> Result<Tape> {
    let len = r.varint()?;
    Ok(Tape((0..len).map(|_| r.varint()).collect::<Result<_>>()?))
}

impl Transcript {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = MAGIC.to_vec();
        out.push(TRANSCRIPT_VERSION);
        write_bytes(&mut out, &self.w);
        write_varint(&mut out, self.inputs.len() as u64);
        for x in &self.inputs {
            x.encode(&mut out);
        }
        for party in &self.tapes {
            write_varint(&mut out, party.len() as u64);
            for t in party {
                write_tape(&mut out, t);
            }
        }
        write_varint(&mut out, self.channel_outputs.len() as u64);
        for c in &self.channel_outputs {
            c.encode(&mut out);
        }
        self.outcome.encode(&mut out);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        if r.take(4)? != MAGIC {
            return Err(Error::Decode("not a transcript".into()));
        }
        let version = r.u8()?;
        if version != TRANSCRIPT_VERSION {
            return Err(Error::Decode(format!("unsupported transcript version {version}")));
        }
        let w = r.bytes()?.to_vec();
        let n = r.varint()? as usize;
        let inputs = (0..n).map(|_| Input::decode(&mut r)).collect::<Result<Vec<_>>>()?;
        let mut tapes = Vec::with_capacity(n);
        for _ in 0..n {
            let rounds = r.varint()?;
            tapes.push((0..rounds).map(|_| read_tape(&mut r)).collect::<Result<Vec<_>>>()?);
        }
        let rounds = r.varint()?;
        let channel_outputs = (0..rounds)
            .map(|_| ChannelOutput::decode(&mut r))
            .collect::<Result<Vec<_>>>()?;
        let outcome = Outcome::decode(&mut r)?;
        if !r.is_empty() {
            return Err(Error::Decode("trailing bytes after transcript".into()));
        }
        let t = Transcript {
            w,
            inputs,
            tapes,
            channel_outputs,
            outcome,
        };
        if t.encode() != bytes {
            return Err(Error::Decode("non-canonical transcript encoding".into()));
        }
        Ok(t)
    }
}
