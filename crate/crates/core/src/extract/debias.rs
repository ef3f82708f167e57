//! Pairwise bit extractors.
//!
//! Both stages read non-overlapping two-bit blocks aligned to the start of the
//! stream and emit at most one bit per block; a trailing odd bit is dropped.
//! Stage 1 maps `11 -> 1`, `10 -> 0` and drops `00`, `01`. The von Neumann
//! stage maps `01 -> 0`, `10 -> 1` and drops `00`, `11`. The cascade runs
//! stage 1 first, then von Neumann.

use super::{BitStream, Origin};

/// Output for each block value `(first << 1) | second`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairRule(pub [Option<bool>; 4]);

impl PairRule {
    pub const STAGE1: PairRule = PairRule([None, None, Some(false), Some(true)]);
    pub const VON_NEUMANN: PairRule = PairRule([None, Some(false), Some(true), None]);

    #[inline]
    pub fn apply(&self, first: bool, second: bool) -> Option<bool> {
        self.0[(usize::from(first) << 1) | usize::from(second)]
    }

    /// For every input byte (four blocks), the packed output bits and their
    /// count.
    const fn byte_table(&self) -> [(u8, u8); 256] {
        let mut table = [(0u8, 0u8); 256];
        let mut byte = 0;
        while byte < 256 {
            let mut bits = 0u8;
            let mut n = 0u8;
            let mut j = 0;
            while j < 4 {
                let pair = (byte >> (6 - 2 * j)) & 3;
                if let Some(b) = self.0[pair] {
                    bits = (bits << 1) | b as u8;
                    n += 1;
                }
                j += 1;
            }
            table[byte] = (bits, n);
            byte += 1;
        }
        table
    }
}

const STAGE1_TABLE: [(u8, u8); 256] = PairRule::STAGE1.byte_table();
const VON_NEUMANN_TABLE: [(u8, u8); 256] = PairRule::VON_NEUMANN.byte_table();

/// Streaming pair extractor with one bit of carry between chunks.
#[derive(Debug, Clone)]
pub struct PairExtractor {
    rule: PairRule,
    table: [(u8, u8); 256],
    carry: Option<bool>,
}

impl PairExtractor {
    pub fn new(rule: PairRule) -> Self {
        let table = if rule == PairRule::STAGE1 {
            STAGE1_TABLE
        } else if rule == PairRule::VON_NEUMANN {
            VON_NEUMANN_TABLE
        } else {
            rule.byte_table()
        };
        PairExtractor {
            rule,
            table,
            carry: None,
        }
    }

    pub fn stage1() -> Self {
        Self::new(PairRule::STAGE1)
    }

    pub fn von_neumann() -> Self {
        Self::new(PairRule::VON_NEUMANN)
    }

    /// Processes `input`, appending extracted bits to `out`. Chunk boundaries
    /// do not change the result.
    pub fn feed(&mut self, input: &BitStream, out: &mut BitStream) {
        let len = input.len();
        let mut pos = 0;
        if let Some(first) = self.carry {
            let Some(second) = input.get(0) else { return };
            self.carry = None;
            if let Some(b) = self.rule.apply(first, second) {
                out.push(b);
            }
            pos = 1;
        }
        let whole = (len - pos) / 8;
        if pos == 0 {
            for &byte in &input.as_bytes()[..whole] {
                let (bits, n) = self.table[byte as usize];
                out.push_bits(bits, u32::from(n));
            }
        } else {
            for k in 0..whole {
                let (bits, n) = self.table[input.byte_at(pos + 8 * k) as usize];
                out.push_bits(bits, u32::from(n));
            }
        }
        pos += 8 * whole;
        while pos + 2 <= len {
            let (a, b) = (input.get(pos).unwrap(), input.get(pos + 1).unwrap());
            if let Some(bit) = self.rule.apply(a, b) {
                out.push(bit);
            }
            pos += 2;
        }
        if pos < len {
            self.carry = input.get(pos);
        }
    }

    /// Whether an unpaired bit is pending.
    pub fn has_carry(&self) -> bool {
        self.carry.is_some()
    }
}

fn run(rule: PairRule, input: &BitStream, origin: Origin) -> BitStream {
    let mut out = BitStream::with_capacity(origin, input.len() / 2);
    PairExtractor::new(rule).feed(input, &mut out);
    out
}

/// `11 -> 1`, `10 -> 0`, other blocks dropped.
pub fn debias_stage1(raw: &BitStream) -> BitStream {
    run(PairRule::STAGE1, raw, Origin::Stage1)
}

/// `01 -> 0`, `10 -> 1`, other blocks dropped.
pub fn debias_von_neumann(stage1: &BitStream) -> BitStream {
    run(PairRule::VON_NEUMANN, stage1, Origin::Unbiased)
}

/// Bit counts through the cascade.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RateReport {
    pub raw_bits: u64,
    pub stage1_bits: u64,
    pub unbiased_bits: u64,
    /// `stage1 / raw`, undefined for empty input.
    pub stage1_retention: Option<f64>,
    /// `unbiased / stage1`.
    pub von_neumann_retention: Option<f64>,
    /// `unbiased / raw`.
    pub retention: Option<f64>,
}

impl RateReport {
    pub fn new(raw_bits: u64, stage1_bits: u64, unbiased_bits: u64) -> Self {
        let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
        RateReport {
            raw_bits,
            stage1_bits,
            unbiased_bits,
            stage1_retention: ratio(stage1_bits, raw_bits),
            von_neumann_retention: ratio(unbiased_bits, stage1_bits),
            retention: ratio(unbiased_bits, raw_bits),
        }
    }
}

/// Stage 1 followed by von Neumann.
pub fn debias_cascade(raw: &BitStream) -> (BitStream, RateReport) {
    let stage1 = debias_stage1(raw);
    let unbiased = debias_von_neumann(&stage1);
    let report = RateReport::new(raw.len() as u64, stage1.len() as u64, unbiased.len() as u64);
    (unbiased, report)
}

/// Constant-memory cascade over a chunked raw stream.
#[derive(Debug, Clone)]
pub struct Cascade {
    stage1: PairExtractor,
    von_neumann: PairExtractor,
    scratch: BitStream,
    counts: [u64; 3],
}

impl Default for Cascade {
    fn default() -> Self {
        Self::new()
    }
}

impl Cascade {
    pub fn new() -> Self {
        Cascade {
            stage1: PairExtractor::stage1(),
            von_neumann: PairExtractor::von_neumann(),
            scratch: BitStream::new(Origin::Stage1),
            counts: [0; 3],
        }
    }

    /// Feeds a raw chunk, appending unbiased bits to `out`.
    pub fn feed(&mut self, raw: &BitStream, out: &mut BitStream) {
        self.scratch = BitStream::with_capacity(Origin::Stage1, raw.len() / 4 + 8);
        self.stage1.feed(raw, &mut self.scratch);
        let before = out.len();
        self.von_neumann.feed(&self.scratch, out);
        self.counts[0] += raw.len() as u64;
        self.counts[1] += self.scratch.len() as u64;
        self.counts[2] += (out.len() - before) as u64;
    }

    pub fn report(&self) -> RateReport {
        RateReport::new(self.counts[0], self.counts[1], self.counts[2])
    }
}
