//! CSV time tags (`timestamp_ps,detector`) and ASCII `0`/`1` bit files.

use std::io::{self, Write};

use qrng_core::{BitStream, Origin, TimeTag};

use super::FormatError;

pub const TAG_HEADER: [&str; 2] = ["timestamp_ps", "detector"];

pub fn write_tags<W: Write>(w: W, tags: &[TimeTag]) -> io::Result<()> {
    let mut out = ::csv::Writer::from_writer(w);
    for tag in tags {
        out.serialize(tag)?;
    }
    if tags.is_empty() {
        out.write_record(TAG_HEADER)?;
    }
    out.flush()
}

fn csv_error(e: &::csv::Error) -> FormatError {
    let (line, offset) = e.position().map_or((0, 0), |p| (p.line(), p.byte()));
    let message = match e.kind() {
        ::csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
        _ => e.to_string(),
    };
    FormatError::Csv { line, offset, message }
}

/// Parses tag CSV with a `timestamp_ps,detector` header. Detectors are
/// written by name (`R1`, `R2`, `T1`).
pub fn parse_tags(data: &[u8]) -> Result<Vec<TimeTag>, FormatError> {
    let mut reader = ::csv::ReaderBuilder::new().trim(::csv::Trim::All).from_reader(data);
    let header = reader.headers().map_err(|e| csv_error(&e))?.clone();
    if header.iter().collect::<Vec<_>>() != TAG_HEADER {
        return Err(FormatError::Csv {
            line: 1,
            offset: 0,
            message: format!(
                "expected header {:?}, found {:?}",
                TAG_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut tags: Vec<TimeTag> = Vec::new();
    let mut record = ::csv::StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => return Err(csv_error(&e)),
        }
        let tag: TimeTag = record.deserialize(Some(&header)).map_err(|e| csv_error(&e))?;
        if let Some(p) = tags.last() {
            if (tag.timestamp_ps, tag.detector as u8) <= (p.timestamp_ps, p.detector as u8) {
                let pos = record.position().expect("records read from a reader have positions");
                return Err(FormatError::Csv {
                    line: pos.line(),
                    offset: pos.byte(),
                    message: format!(
                        "({} ps, {}) is out of order after ({} ps, {})",
                        tag.timestamp_ps, tag.detector, p.timestamp_ps, p.detector
                    ),
                });
            }
        }
        tags.push(tag);
    }
    Ok(tags)
}

/// Writes bits as `0`/`1` characters, 64 per line.
pub fn write_bits<W: Write>(mut w: W, bits: &BitStream) -> io::Result<()> {
    let mut line = Vec::with_capacity(65);
    let mut iter = bits.iter().peekable();
    while iter.peek().is_some() {
        line.clear();
        line.extend(iter.by_ref().take(64).map(|b| if b { b'1' } else { b'0' }));
        line.push(b'\n');
        w.write_all(&line)?;
    }
    w.flush()
}

/// Parses `0`/`1` characters, skipping commas and whitespace.
pub fn parse_bits(data: &[u8], origin: Origin) -> Result<BitStream, FormatError> {
    let mut out = BitStream::with_capacity(origin, data.len());
    for (offset, &b) in data.iter().enumerate() {
        match b {
            b'0' => out.push(false),
            b'1' => out.push(true),
            b',' | b' ' | b'\t' | b'\r' | b'\n' => {}
            _ => {
                let ch = String::from_utf8_lossy(&data[offset..data.len().min(offset + 4)])
                    .chars()
                    .next()
                    .unwrap_or(char::REPLACEMENT_CHARACTER);
                return Err(FormatError::BitChar {
                    offset: offset as u64,
                    ch,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qrng_core::Detector;

    #[test]
    fn tag_round_trip() {
        let tags = vec![TimeTag::new(0, Detector::R2), TimeTag::new(12, Detector::T1)];
        let mut buf = Vec::new();
        write_tags(&mut buf, &tags).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "timestamp_ps,detector\n0,R2\n12,T1\n"
        );
        assert_eq!(parse_tags(&buf).unwrap(), tags);
        let mut empty = Vec::new();
        write_tags(&mut empty, &[]).unwrap();
        assert!(parse_tags(&empty).unwrap().is_empty());
    }

    #[test]
    fn tag_errors_name_line_and_offset() {
        let err = parse_tags(b"timestamp_ps,detector\n0,R1\n5,X9\n").unwrap_err();
        assert!(
            matches!(
                err,
                FormatError::Csv {
                    line: 3,
                    offset: 27,
                    ..
                }
            ),
            "{err}"
        );
        let err = parse_tags(b"timestamp_ps,detector\n9,R1\n5,R2\n").unwrap_err();
        assert!(matches!(err, FormatError::Csv { line: 3, .. }), "{err}");
        assert!(parse_tags(b"time,det\n").is_err());
    }

    #[test]
    fn bit_round_trip() {
        let bits = BitStream::from_bits((0..150).map(|i| i % 3 == 0), Origin::Raw);
        let mut buf = Vec::new();
        write_bits(&mut buf, &bits).unwrap();
        assert_eq!(buf.iter().filter(|&&b| b == b'\n').count(), 3);
        assert_eq!(parse_bits(&buf, Origin::Raw).unwrap(), bits);
        assert_eq!(parse_bits(b"1,0, 1\n1", Origin::Raw).unwrap().to_ascii(), "1011");
        assert_eq!(
            parse_bits(b"10x1", Origin::Raw).unwrap_err(),
            FormatError::BitChar { offset: 2, ch: 'x' }
        );
    }
}
