//! QBIT bit files: a 16-byte header (`QBIT1\0`, `u16` version, `u64` bit
//! length) followed by the packed bits, most significant bit first, with the
//! unused low bits of the last byte zero.

use std::io::{self, Write};

use qrng_core::{BitStream, Origin};

use super::{check_magic, u16_at, u64_at, FormatError};

pub const MAGIC: &[u8; 6] = b"QBIT1\0";
pub const MAGIC_TEXT: &str = "QBIT1\\0";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 16;

pub fn write<W: Write>(mut w: W, bits: &BitStream) -> io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(bits.len() as u64).to_le_bytes())?;
    w.write_all(bits.as_bytes())?;
    w.flush()
}

pub fn to_bytes(bits: &BitStream) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + bits.as_bytes().len());
    write(&mut out, bits).expect("writing to a Vec cannot fail");
    out
}

pub fn parse(data: &[u8], origin: Origin) -> Result<BitStream, FormatError> {
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
    let bits = u64_at(data, 8);
    let payload = &data[HEADER_LEN..];
    let expected = bits.div_ceil(8);
    if payload.len() as u64 != expected {
        return Err(FormatError::PayloadLength {
            offset: HEADER_LEN as u64,
            bits,
            expected,
            found: payload.len() as u64,
        });
    }
    BitStream::from_bytes(payload.to_vec(), bits as usize, origin).map_err(|_| FormatError::Pad {
        offset: (data.len() - 1) as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let bits = BitStream::parse_ascii("1011 0010 111", Origin::Unbiased).unwrap();
        let bytes = to_bytes(&bits);
        assert_eq!(&bytes[..16], b"QBIT1\0\x01\x00\x0b\0\0\0\0\0\0\0");
        assert_eq!(&bytes[16..], &[0b1011_0010, 0b1110_0000]);
        assert_eq!(parse(&bytes, Origin::Unbiased).unwrap(), bits);
        let empty = BitStream::new(Origin::Raw);
        assert_eq!(parse(&to_bytes(&empty), Origin::Raw).unwrap(), empty);
    }

    #[test]
    fn rejects_malformed_files() {
        let bits = BitStream::parse_ascii("101", Origin::Raw).unwrap();
        let good = to_bytes(&bits);

        let msg = parse(b"PTAG1\0\x01\0", Origin::Raw).unwrap_err().to_string();
        assert!(msg.contains("expected QBIT1\\0") && msg.contains("PTAG1\\0"), "{msg}");

        let mut bad = good.clone();
        bad[16] |= 1;
        assert_eq!(parse(&bad, Origin::Raw).unwrap_err(), FormatError::Pad { offset: 16 });

        let mut bad = good.clone();
        bad.push(0);
        assert!(matches!(
            parse(&bad, Origin::Raw).unwrap_err(),
            FormatError::PayloadLength {
                expected: 1,
                found: 2,
                ..
            }
        ));

        let mut bad = good;
        bad[8] = 0xff;
        assert!(parse(&bad, Origin::Raw).is_err());
    }
}
