//! On-disk formats: PTAG time tags, QBIT bit files and their CSV equivalents.
//!
//! All binary integers are little-endian.

use thiserror::Error;

pub mod csv;
pub mod ptag;
pub mod qbit;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("bad magic at byte 0: expected {expected}, found {found}")]
    BadMagic { expected: &'static str, found: String },
    #[error("truncated {what} at byte {offset}: need {needed} bytes, {available} available")]
    Truncated {
        what: &'static str,
        offset: u64,
        needed: u64,
        available: u64,
    },
    #[error("unsupported version {found} at byte {offset}, expected {supported}")]
    Version { offset: u64, found: u16, supported: u16 },
    #[error("reserved byte {offset} is {value:#04x}, expected 0")]
    Reserved { offset: u64, value: u8 },
    #[error("unknown detector id {id} at byte {offset}, expected 0 (R1), 1 (R2) or 2 (T1)")]
    Detector { offset: u64, id: u8 },
    #[error("record at byte {offset} is out of order: ({timestamp_ps} ps, {detector}) follows ({prev_timestamp_ps} ps, {prev_detector})")]
    Order {
        offset: u64,
        timestamp_ps: u64,
        detector: String,
        prev_timestamp_ps: u64,
        prev_detector: String,
    },
    #[error("payload at byte {offset} holds {found} bytes, {expected} expected for {bits} bits")]
    PayloadLength {
        offset: u64,
        bits: u64,
        expected: u64,
        found: u64,
    },
    #[error("pad bits of the last byte (byte {offset}) are not zero")]
    Pad { offset: u64 },
    #[error("invalid character {ch:?} at byte {offset}, expected 0 or 1")]
    BitChar { offset: u64, ch: char },
    #[error("line {line} (byte {offset}): {message}")]
    Csv { line: u64, offset: u64, message: String },
}

/// Printable form of a magic prefix, e.g. `PTAG1\0`.
pub(crate) fn escape(bytes: &[u8]) -> String {
    bytes
        .iter()
        .flat_map(|&b| std::ascii::escape_default(b))
        .map(char::from)
        .collect::<String>()
        .replace("\\x00", "\\0")
}

pub(crate) fn check_magic(data: &[u8], magic: &[u8; 6], expected: &'static str) -> Result<(), FormatError> {
    let head = &data[..data.len().min(magic.len())];
    if head != magic {
        return Err(FormatError::BadMagic {
            expected,
            found: if head.is_empty() {
                "an empty file".into()
            } else {
                escape(head)
            },
        });
    }
    Ok(())
}

pub(crate) fn u16_at(data: &[u8], offset: usize) -> u16 {
    u16::from_le_bytes([data[offset], data[offset + 1]])
}

pub(crate) fn u64_at(data: &[u8], offset: usize) -> u64 {
    u64::from_le_bytes(data[offset..offset + 8].try_into().unwrap())
}
