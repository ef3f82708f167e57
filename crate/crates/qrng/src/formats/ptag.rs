//! PTAG time-tag files.
//!
//! A 16-byte header (`PTAG1\0`, `u16` version, 8 reserved zero bytes) followed
//! by fixed 9-byte records: `u64` timestamp in ps and a `u8` detector id
//! (0 = R1, 1 = R2, 2 = T1). Records are sorted by timestamp, ties by
//! detector id.

use std::io::{self, Write};

use qrng_core::{Detector, TimeTag};

use super::{check_magic, u16_at, u64_at, FormatError};

pub const MAGIC: &[u8; 6] = b"PTAG1\0";
pub const MAGIC_TEXT: &str = "PTAG1\\0";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 16;
pub const RECORD_LEN: usize = 9;

pub fn write<W: Write>(mut w: W, tags: &[TimeTag]) -> io::Result<()> {
    let mut header = [0u8; HEADER_LEN];
    header[..6].copy_from_slice(MAGIC);
    header[6..8].copy_from_slice(&VERSION.to_le_bytes());
    w.write_all(&header)?;
    let mut buf = Vec::with_capacity(RECORD_LEN * 4096);
    for chunk in tags.chunks(4096) {
        buf.clear();
        for tag in chunk {
            buf.extend_from_slice(&tag.timestamp_ps.to_le_bytes());
            buf.push(tag.detector as u8);
        }
        w.write_all(&buf)?;
    }
    w.flush()
}

pub fn to_bytes(tags: &[TimeTag]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + RECORD_LEN * tags.len());
    write(&mut out, tags).expect("writing to a Vec cannot fail");
    out
}

pub fn parse(data: &[u8]) -> Result<Vec<TimeTag>, FormatError> {
    check_magic(data, MAGIC, MAGIC_TEXT)?;
    if data.len() < HEADER_LEN {
        return Err(FormatError::Truncated {
            what: "header",
            offset: 0,
            needed: HEADER_LEN as u64,
            available: data.len() as u64,
        });
    }
    let version = u16_at(data, 6);
    if version != VERSION {
        return Err(FormatError::Version {
            offset: 6,
            found: version,
            supported: VERSION,
        });
    }
    if let Some(i) = data[8..HEADER_LEN].iter().position(|&b| b != 0) {
        return Err(FormatError::Reserved {
            offset: 8 + i as u64,
            value: data[8 + i],
        });
    }
    let body = &data[HEADER_LEN..];
    let whole = body.len() / RECORD_LEN;
    if !body.len().is_multiple_of(RECORD_LEN) {
        let offset = HEADER_LEN + whole * RECORD_LEN;
        return Err(FormatError::Truncated {
            what: "record",
            offset: offset as u64,
            needed: RECORD_LEN as u64,
            available: (data.len() - offset) as u64,
        });
    }
    let mut tags = Vec::with_capacity(whole);
    let mut prev: Option<TimeTag> = None;
    for (i, rec) in body.chunks_exact(RECORD_LEN).enumerate() {
        let offset = (HEADER_LEN + i * RECORD_LEN) as u64;
        let detector = Detector::from_id(rec[8]).ok_or(FormatError::Detector {
            offset: offset + 8,
            id: rec[8],
        })?;
        let tag = TimeTag::new(u64_at(rec, 0), detector);
        if let Some(p) = prev {
            if (tag.timestamp_ps, tag.detector as u8) <= (p.timestamp_ps, p.detector as u8) {
                return Err(FormatError::Order {
                    offset,
                    timestamp_ps: tag.timestamp_ps,
                    detector: tag.detector.to_string(),
                    prev_timestamp_ps: p.timestamp_ps,
                    prev_detector: p.detector.to_string(),
                });
            }
        }
        prev = Some(tag);
        tags.push(tag);
    }
    Ok(tags)
}
