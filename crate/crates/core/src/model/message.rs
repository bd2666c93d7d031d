//! Canonical message encoding.
//!
//! A message is a tagged tuple of byte fields:
//!
//! ```text
//! tag: u8 | field_count: varint | (len: varint | bytes)*
//! ```
//!
//! Varints are unsigned LEB128 in their minimal form. Integer fields are
//! big-endian with no leading zero bytes (zero is the empty field). Bit
//! fields store one byte per bit, each `0` or `1`. Decoding rejects anything
//! that the encoder would not produce, so `encode(decode(b)) == b` for every
//! accepted `b`, and the byte order of encodings is the canonical order used
//! by the shuffle.

use std::fmt;

use crate::{Error, Result};

/// Message kinds used by the built-in protocols.
pub mod tag {
    /// Free-form payload, used by tests and toy protocols.
    pub const RAW: u8 = 0x00;
    /// `⊥`: an explicit empty message.
    pub const BOTTOM: u8 = 0x01;
    /// Additive share `(coordinate, value)` of split-and-mix summation.
    pub const SHARE: u8 = 0x10;
    /// Key-exchange bit `(lo, hi, direction, index, bit)`.
    pub const KEY_BIT: u8 = 0x20;
    /// Secure transmission ciphertext `(lo, hi, direction, hash, cipher)`.
    pub const CIPHERTEXT: u8 = 0x21;
    /// One-bit local-hashing report.
    pub const LDP_BIT: u8 = 0x30;
    /// A hashed element published in the clear.
    pub const HASHED: u8 = 0x31;
    /// A domain element.
    pub const ELEMENT: u8 = 0x32;
}

/// A canonically encoded protocol message. Ordering is byte-lexicographic.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Message(Vec<u8>);

impl Message {
    pub fn builder(tag: u8) -> MessageBuilder {
        MessageBuilder {
            tag,
            fields: Vec::new(),
        }
    }

    /// A message with raw byte fields.
    pub fn new(tag: u8, fields: &[&[u8]]) -> Self {
        let mut b = Self::builder(tag);
        for f in fields {
            b = b.bytes(f);
        }
        b.finish()
    }

    pub fn bottom() -> Self {
        Self::builder(tag::BOTTOM).finish()
    }

    pub fn is_bottom(&self) -> bool {
        self.0 == [tag::BOTTOM, 0]
    }

    /// Parse and validate a canonical encoding.
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.u8()?;
        let count = r.varint()?;
        for _ in 0..count {
            let len = r.varint()? as usize;
            r.take(len)?;
        }
        if !r.is_empty() {
            return Err(Error::Decode("trailing bytes after message".into()));
        }
        Ok(Message(bytes.to_vec()))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn tag(&self) -> u8 {
        self.0[0]
    }

    pub fn fields(&self) -> Vec<&[u8]> {
        let mut r = Reader::new(&self.0[1..]);
        let count = r.varint().expect("validated");
        (0..count)
            .map(|_| {
                let len = r.varint().expect("validated") as usize;
                r.take(len).expect("validated")
            })
            .collect()
    }

    pub fn field(&self, idx: usize) -> Result<&[u8]> {
        self.fields()
            .get(idx)
            .copied()
            .ok_or_else(|| Error::Decode(format!("message has no field {idx}")))
    }

    pub fn field_u64(&self, idx: usize) -> Result<u64> {
        decode_uint(self.field(idx)?)
    }

    pub fn field_bits(&self, idx: usize) -> Result<Vec<bool>> {
        self.field(idx)?
            .iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::Decode(format!("bit field holds byte {other}"))),
            })
            .collect()
    }
}

impl fmt::Debug for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Message({:#04x}", self.tag())?;
        for field in self.fields() {
            write!(f, " ")?;
            for b in field {
                write!(f, "{b:02x}")?;
            }
        }
        write!(f, ")")
    }
}

pub struct MessageBuilder {
    tag: u8,
    fields: Vec<Vec<u8>>,
}

impl MessageBuilder {
    pub fn bytes(mut self, b: &[u8]) -> Self {
        self.fields.push(b.to_vec());
        self
    }

    pub fn uint(mut self, v: u64) -> Self {
        self.fields.push(encode_uint(v));
        self
    }

    pub fn bits(mut self, bits: &[bool]) -> Self {
        self.fields.push(bits.iter().map(|&b| b as u8).collect());
        self
    }

    pub fn finish(self) -> Message {
        let mut out = vec![self.tag];
        write_varint(&mut out, self.fields.len() as u64);
        for f in &self.fields {
            write_varint(&mut out, f.len() as u64);
            out.extend_from_slice(f);
        }
        Message(out)
    }
}

pub(crate) fn encode_uint(v: u64) -> Vec<u8> {
    let bytes = v.to_be_bytes();
    let skip = bytes.iter().take_while(|&&b| b == 0).count();
    bytes[skip..].to_vec()
}

pub(crate) fn decode_uint(b: &[u8]) -> Result<u64> {
    if b.len() > 8 {
        return Err(Error::Decode("integer field longer than 8 bytes".into()));
    }
    if b.first() == Some(&0) {
        return Err(Error::Decode("integer field has a leading zero".into()));
    }
    Ok(b.iter().fold(0u64, |acc, &x| (acc << 8) | x as u64))
}

pub(crate) fn write_varint(out: &mut Vec<u8>, mut v: u64) {
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

/// Cursor over a canonical byte encoding.
pub(crate) struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    pub(crate) fn new(buf: &'a [u8]) -> Self {
        Reader { buf }
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub(crate) fn u8(&mut self) -> Result<u8> {
        let (&b, rest) = self
            .buf
            .split_first()
            .ok_or_else(|| Error::Decode("unexpected end of input".into()))?;
        self.buf = rest;
        Ok(b)
    }

    pub(crate) fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.buf.len() < len {
            return Err(Error::Decode("unexpected end of input".into()));
        }
        let (head, rest) = self.buf.split_at(len);
        self.buf = rest;
        Ok(head)
    }

    pub(crate) fn varint(&mut self) -> Result<u64> {
        let mut v = 0u64;
        for i in 0..10 {
            let b = self.u8()?;
            let chunk = (b & 0x7f) as u64;
            if i == 9 && chunk > 1 {
                return Err(Error::Decode("varint overflows u64".into()));
            }
            v |= chunk << (7 * i);
            if b & 0x80 == 0 {
                if i > 0 && b == 0 {
                    return Err(Error::Decode("non-minimal varint".into()));
                }
                return Ok(v);
            }
        }
        Err(Error::Decode("varint too long".into()))
    }

    pub(crate) fn bytes(&mut self) -> Result<&'a [u8]> {
        let len = self.varint()? as usize;
        self.take(len)
    }
}
