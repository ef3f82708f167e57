//! Detector events to bits, and the two-stage debiasing cascade.

use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::sim::{Detector, TimeTag};

mod debias;

pub use debias::{debias_cascade, debias_stage1, debias_von_neumann, Cascade, PairExtractor, PairRule, RateReport};

/// Where a bit stream sits in the extraction chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Origin {
    Raw,
    Stage1,
    Unbiased,
}

impl Origin {
    pub fn name(self) -> &'static str {
        match self {
            Origin::Raw => "raw",
            Origin::Stage1 => "stage1",
            Origin::Unbiased => "unbiased",
        }
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitError {
    #[error("{needed} bytes needed for {len} bits, got {got}")]
    Length { len: u64, needed: usize, got: usize },
    #[error("pad bits after bit {len} are not zero")]
    NonZeroPad { len: u64 },
    #[error("invalid character {ch:?} at offset {offset}, expected 0 or 1")]
    BadChar { ch: char, offset: usize },
}

/// Packed bit sequence, most significant bit first within each byte. Pad
/// bits past `len` are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitStream {
    bytes: Vec<u8>,
    len: usize,
    origin: Origin,
}

impl fmt::Debug for BitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitStream({}, {} bits", self.origin, self.len)?;
        if self.len <= 64 {
            f.write_str(", ")?;
            for b in self.iter() {
                f.write_str(if b { "1" } else { "0" })?;
            }
        }
        f.write_str(")")
    }
}

impl BitStream {
    pub fn new(origin: Origin) -> Self {
        BitStream {
            bytes: Vec::new(),
            len: 0,
            origin,
        }
    }

    pub fn with_capacity(origin: Origin, bits: usize) -> Self {
        BitStream {
            bytes: Vec::with_capacity(bits.div_ceil(8)),
            len: 0,
            origin,
        }
    }

    /// Wraps packed bytes. Fails if the byte count does not match `len` or a
    /// pad bit is set.
    pub fn from_bytes(bytes: Vec<u8>, len: usize, origin: Origin) -> Result<Self, BitError> {
        let needed = len.div_ceil(8);
        if bytes.len() != needed {
            return Err(BitError::Length {
                len: len as u64,
                needed,
                got: bytes.len(),
            });
        }
        if !len.is_multiple_of(8) {
            let mask = 0xFFu8 >> (len % 8);
            if bytes[needed - 1] & mask != 0 {
                return Err(BitError::NonZeroPad { len: len as u64 });
            }
        }
        Ok(BitStream { bytes, len, origin })
    }

    /// Parses `0`/`1` characters; whitespace and commas are ignored.
    pub fn parse_ascii(text: &str, origin: Origin) -> Result<Self, BitError> {
        let mut out = BitStream::with_capacity(origin, text.len());
        for (offset, ch) in text.char_indices() {
            match ch {
                '0' => out.push(false),
                '1' => out.push(true),
                c if c.is_whitespace() || c == ',' => {}
                c => return Err(BitError::BadChar { ch: c, offset }),
            }
        }
        Ok(out)
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I, origin: Origin) -> Self {
        let mut out = BitStream::new(origin);
        out.extend(bits);
        out
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn set_origin(&mut self, origin: Origin) {
        self.origin = origin;
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    #[inline]
    pub fn get(&self, i: usize) -> Option<bool> {
        (i < self.len).then(|| self.bytes[i / 8] >> (7 - i % 8) & 1 == 1)
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        let shift = 7 - (self.len % 8);
        if shift == 7 {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 1 << shift;
        }
        self.len += 1;
    }

    /// Appends the low `n` bits of `value` (`n <= 8`), most significant first.
    #[inline]
    pub fn push_bits(&mut self, value: u8, n: u32) {
        if n == 0 {
            return;
        }
        let value = (value as u16) & ((1u16 << n) - 1);
        let used = (self.len % 8) as u32;
        if used == 0 {
            self.bytes.push((value << (8 - n)) as u8);
        } else {
            let free = 8 - used;
            let last = self.bytes.last_mut().unwrap();
            if n <= free {
                *last |= (value << (free - n)) as u8;
            } else {
                *last |= (value >> (n - free)) as u8;
                self.bytes.push((value << (8 - (n - free))) as u8);
            }
        }
        self.len += n as usize;
    }

    /// Appends a whole byte.
    #[inline]
    pub fn push_byte(&mut self, byte: u8) {
        if self.len.is_multiple_of(8) {
            self.bytes.push(byte);
            self.len += 8;
        } else {
            self.push_bits(byte, 8);
        }
    }

    /// Eight bits starting at `offset`, zero padded past the end.
    #[inline]
    pub(crate) fn byte_at(&self, offset: usize) -> u8 {
        let i = offset / 8;
        let s = offset % 8;
        let hi = self.bytes.get(i).copied().unwrap_or(0);
        if s == 0 {
            hi
        } else {
            let lo = self.bytes.get(i + 1).copied().unwrap_or(0);
            (hi << s) | (lo >> (8 - s))
        }
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.bytes[i / 8] >> (7 - i % 8) & 1 == 1)
    }

    pub fn count_ones(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    /// One byte per bit with value 0 or 1.
    pub fn unpack(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.len);
        for &b in &self.bytes {
            for s in (0..8).rev() {
                out.push(b >> s & 1);
            }
        }
        out.truncate(self.len);
        out
    }

    /// First `len` bits (or all of them).
    pub fn prefix(&self, len: usize) -> BitStream {
        let len = len.min(self.len);
        let mut bytes = self.bytes[..len.div_ceil(8)].to_vec();
        if !len.is_multiple_of(8) {
            *bytes.last_mut().unwrap() &= !(0xFFu8 >> (len % 8));
        }
        BitStream {
            bytes,
            len,
            origin: self.origin,
        }
    }

    /// `0`/`1` characters.
    pub fn to_ascii(&self) -> alloc::string::String {
        self.iter().map(|b| if b { '1' } else { '0' }).collect()
    }
}

impl Extend<bool> for BitStream {
    fn extend<I: IntoIterator<Item = bool>>(&mut self, iter: I) {
        for b in iter {
            self.push(b);
        }
    }
}

/// Assignment of detectors to bit values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EncodingRule {
    zero: [bool; 3],
    one: [bool; 3],
    discard: [bool; 3],
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("detector {0} is assigned to more than one set")]
    Overlap(Detector),
    #[error("tag {index} comes from {detector}, which the rule does not cover")]
    Uncovered { index: usize, detector: Detector },
    #[error("tag stream is not sorted at index {0}")]
    Unsorted(usize),
}

impl EncodingRule {
    pub fn new(zero: &[Detector], one: &[Detector], discard: &[Detector]) -> Result<Self, EncodeError> {
        let mut rule = EncodingRule {
            zero: [false; 3],
            one: [false; 3],
            discard: [false; 3],
        };
        for (set, members) in [
            (&mut rule.zero, zero),
            (&mut rule.one, one),
            (&mut rule.discard, discard),
        ] {
            for &d in members {
                set[d.index()] = true;
            }
        }
        for d in Detector::ALL {
            let i = d.index();
            if u8::from(rule.zero[i]) + u8::from(rule.one[i]) + u8::from(rule.discard[i]) > 1 {
                return Err(EncodeError::Overlap(d));
            }
        }
        Ok(rule)
    }

    /// R1 to 0, R2 to 1, T1 discarded: the reflection-path split.
    pub fn reflection_pair() -> Self {
        Self::new(&[Detector::R1], &[Detector::R2], &[Detector::T1]).unwrap()
    }

    /// Reflection to 0, transmission to 1.
    pub fn reflection_transmission() -> Self {
        Self::new(&[Detector::R1, Detector::R2], &[Detector::T1], &[]).unwrap()
    }

    /// Bit for a detector: `Some(Some(bit))`, `Some(None)` when discarded and
    /// `None` when the rule does not cover it.
    pub fn classify(&self, d: Detector) -> Option<Option<bool>> {
        let i = d.index();
        if self.zero[i] {
            Some(Some(false))
        } else if self.one[i] {
            Some(Some(true))
        } else if self.discard[i] {
            Some(None)
        } else {
            None
        }
    }

    pub fn members(&self, bit: Option<bool>) -> impl Iterator<Item = Detector> + '_ {
        let set = match bit {
            Some(false) => &self.zero,
            Some(true) => &self.one,
            None => &self.discard,
        };
        Detector::ALL.into_iter().filter(move |d| set[d.index()])
    }
}

/// One bit per non-discarded tag, in stream order.
pub fn encode_bits(tags: &[TimeTag], rule: &EncodingRule) -> Result<BitStream, EncodeError> {
    if let Some(i) = tags.windows(2).position(|w| w[1].timestamp_ps < w[0].timestamp_ps) {
        return Err(EncodeError::Unsorted(i + 1));
    }
    let mut out = BitStream::with_capacity(Origin::Raw, tags.len());
    for (index, tag) in tags.iter().enumerate() {
        match rule.classify(tag.detector) {
            Some(Some(bit)) => out.push(bit),
            Some(None) => {}
            None => {
                return Err(EncodeError::Uncovered {
                    index,
                    detector: tag.detector,
                })
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use Detector::*;

    fn tags(ds: &[Detector]) -> Vec<TimeTag> {
        ds.iter()
            .enumerate()
            .map(|(i, &d)| TimeTag::new(i as u64 * 10, d))
            .collect()
    }

    #[test]
    fn direct_mapping() {
        let rule = EncodingRule::new(&[R1], &[R2], &[T1]).unwrap();
        let bits = encode_bits(&tags(&[R1, R2, R2, R1]), &rule).unwrap();
        assert_eq!(bits.to_ascii(), "0110");
        assert_eq!(bits.origin(), Origin::Raw);
    }

    #[test]
    fn forward_backward_encoding() {
        let rule = EncodingRule::new(&[R1], &[T1], &[R2]).unwrap();
        assert_eq!(encode_bits(&tags(&[R1, T1, R1]), &rule).unwrap().to_ascii(), "010");
    }

    #[test]
    fn all_discarded_is_empty() {
        let rule = EncodingRule::new(&[], &[], &[R1, R2, T1]).unwrap();
        assert!(encode_bits(&tags(&[R1, T1, R2]), &rule).unwrap().is_empty());
    }

    #[test]
    fn rule_errors() {
        assert_eq!(EncodingRule::new(&[R1], &[R1], &[]), Err(EncodeError::Overlap(R1)));
        let rule = EncodingRule::new(&[R1], &[R2], &[]).unwrap();
        assert_eq!(
            encode_bits(&tags(&[R1, T1]), &rule),
            Err(EncodeError::Uncovered { index: 1, detector: T1 })
        );
        let unsorted = vec![TimeTag::new(5, R1), TimeTag::new(4, R2)];
        assert_eq!(encode_bits(&unsorted, &rule), Err(EncodeError::Unsorted(1)));
    }

    #[test]
    fn packing_is_msb_first_with_zero_pad() {
        let b = BitStream::parse_ascii("1010 0001 11", Origin::Raw).unwrap();
        assert_eq!(b.as_bytes(), &[0xA1, 0xC0]);
        assert_eq!(b.len(), 10);
        assert!(BitStream::from_bytes(vec![0xA1, 0xC1], 10, Origin::Raw).is_err());
        assert!(BitStream::from_bytes(vec![0xA1], 10, Origin::Raw).is_err());
        assert!(BitStream::parse_ascii("10x", Origin::Raw).is_err());
    }

    #[test]
    fn push_bits_across_byte_boundaries() {
        let mut b = BitStream::new(Origin::Raw);
        b.push(true);
        b.push_bits(0b101, 3);
        b.push_bits(0b110011, 6);
        b.push_byte(0xFF);
        assert_eq!(b.to_ascii(), "110111001111111111");
        assert_eq!(b.len(), 18);
        assert_eq!(b.byte_at(1), 0b1011_1001);
        assert_eq!(b.prefix(5).to_ascii(), "11011");
    }
}
