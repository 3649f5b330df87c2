//! Address-event binary stream.
//!
//! Layout: the 4-byte magic `IRSE`, a version byte, then one 10-byte
//! little-endian record per event: `u32 frame, u16 x, u16 y, u8 polarity
//! (0 = OFF, 1 = ON), u8 reserved (0)`, in `(frame, y, x)` order.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::frontend::{BipolarEventMap, EventRecord, Polarity};

pub const AER_MAGIC: [u8; 4] = *b"IRSE";
pub const AER_VERSION: u8 = 0x01;
pub const AER_HEADER_LEN: usize = 5;
pub const AER_RECORD_LEN: usize = 10;

fn encode_record(e: &EventRecord) -> Result<[u8; AER_RECORD_LEN]> {
    let (Ok(x), Ok(y)) = (u16::try_from(e.x), u16::try_from(e.y)) else {
        return Err(Error::CoordinateOverflow {
            frame: e.frame.into(),
            x: e.x.into(),
            y: e.y.into(),
        });
    };
    let mut rec = [0u8; AER_RECORD_LEN];
    rec[0..4].copy_from_slice(&e.frame.to_le_bytes());
    rec[4..6].copy_from_slice(&x.to_le_bytes());
    rec[6..8].copy_from_slice(&y.to_le_bytes());
    rec[8] = e.polarity as u8;
    Ok(rec)
}

pub struct AerWriter<W: Write> {
    out: W,
    events: u64,
}

impl<W: Write> AerWriter<W> {
    pub fn new(mut out: W) -> std::io::Result<Self> {
        out.write_all(&AER_MAGIC)?;
        out.write_all(&[AER_VERSION])?;
        Ok(AerWriter { out, events: 0 })
    }

    pub fn write_event(&mut self, e: &EventRecord) -> Result<()> {
        let rec = encode_record(e)?;
        self.out
            .write_all(&rec)
            .map_err(|err| Error::io("<aer>", err))?;
        self.events += 1;
        Ok(())
    }

    pub fn write_map(&mut self, map: &BipolarEventMap) -> Result<()> {
        map.events().try_for_each(|e| self.write_event(&e))
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    /// Bytes written so far, header included.
    pub fn bytes(&self) -> u64 {
        AER_HEADER_LEN as u64 + AER_RECORD_LEN as u64 * self.events
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

/// Encodes events in canonical order.
pub fn encode_aer(events: &[EventRecord]) -> Result<Vec<u8>> {
    let mut sorted = events.to_vec();
    sorted.sort_by_key(EventRecord::sort_key);
    let mut w = AerWriter::new(Vec::with_capacity(
        AER_HEADER_LEN + AER_RECORD_LEN * events.len(),
    ))
    .map_err(|e| Error::io("<aer>", e))?;
    for e in &sorted {
        w.write_event(e)?;
    }
    w.finish().map_err(|e| Error::io("<aer>", e))
}

pub fn decode_aer(bytes: &[u8]) -> Result<Vec<EventRecord>> {
    let err = |offset: usize, message: &str| Error::Format {
        path: "<aer>".into(),
        offset: offset as u64,
        message: message.into(),
    };
    if bytes.len() < AER_HEADER_LEN || bytes[..4] != AER_MAGIC {
        return Err(err(0, "missing IRSE magic"));
    }
    if bytes[4] != AER_VERSION {
        return Err(err(4, "unsupported version"));
    }
    let body = &bytes[AER_HEADER_LEN..];
    if !body.len().is_multiple_of(AER_RECORD_LEN) {
        return Err(err(
            AER_HEADER_LEN + body.len() / AER_RECORD_LEN * AER_RECORD_LEN,
            "truncated record",
        ));
    }
    body.chunks_exact(AER_RECORD_LEN)
        .enumerate()
        .map(|(i, r)| {
            let offset = AER_HEADER_LEN + i * AER_RECORD_LEN;
            let polarity = match r[8] {
                0 => Polarity::Off,
                1 => Polarity::On,
                _ => return Err(err(offset + 8, "bad polarity byte")),
            };
            if r[9] != 0 {
                return Err(err(offset + 9, "reserved byte is not zero"));
            }
            Ok(EventRecord {
                frame: u32::from_le_bytes([r[0], r[1], r[2], r[3]]),
                x: u16::from_le_bytes([r[4], r[5]]).into(),
                y: u16::from_le_bytes([r[6], r[7]]).into(),
                polarity,
            })
        })
        .collect()
}

pub fn write_aer_binary(events: &[EventRecord], path: &Path) -> Result<()> {
    let bytes = encode_aer(events)?;
    let mut f = File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))?;
    f.write_all(&bytes)
        .and_then(|_| f.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn read_aer(path: &Path) -> Result<Vec<EventRecord>> {
    decode_aer(&super::read_file(path)?).map_err(|e| match e {
        Error::Format {
            offset, message, ..
        } => Error::Format {
            path: path.to_path_buf(),
            offset,
            message,
        },
        other => other,
    })
}
