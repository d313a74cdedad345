//! Binary 16-bit PGM (P5, maxval 65535) with a JSON metadata sidecar.
//!
//! The sidecar for `frame.pgm` is `frame.meta.json`:
//!
//! ```json
//! {"cfa": "RGGB", "bit_depth": 14, "black_level": [512, 512, 512, 512], "white_level": 16383, "iso": 800}
//! ```

use std::path::{Path, PathBuf};

use noisecal_core::{CfaLayout, RawFrame, SensorMeta};
use serde::{Deserialize, Serialize};

use crate::error::{read_bytes, read_json, write_bytes, write_json, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaSidecar {
    pub cfa: CfaLayout,
    pub bit_depth: u8,
    pub black_level: [u16; 4],
    pub white_level: u16,
    #[serde(default)]
    pub iso: Option<u32>,
}

impl MetaSidecar {
    pub fn of(frame: &RawFrame) -> Self {
        let m = frame.meta();
        MetaSidecar {
            cfa: m.cfa,
            bit_depth: m.bit_depth,
            black_level: m.black_level,
            white_level: m.white_level,
            iso: frame.iso(),
        }
    }

    pub fn sensor(&self) -> SensorMeta {
        SensorMeta {
            cfa: self.cfa,
            bit_depth: self.bit_depth,
            black_level: self.black_level,
            white_level: self.white_level,
        }
    }
}

/// `dir/name.pgm` -> `dir/name.meta.json`.
pub fn sidecar_path(pgm: &Path) -> PathBuf {
    pgm.with_extension("meta.json")
}

struct Header {
    width: usize,
    height: usize,
    maxval: u32,
    offset: usize,
}

fn parse_header(b: &[u8]) -> Result<Header> {
    if b.len() < 2 || &b[..2] != b"P5" {
        return Err(Error::Pgm("not a binary PGM (magic P5 expected)".into()));
    }
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for field in &mut fields {
        // whitespace and comments
        loop {
            match b.get(pos) {
                Some(c) if c.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while b.get(pos).is_some_and(|&c| c != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while b.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Pgm("malformed header".into()));
        }
        *field = std::str::from_utf8(&b[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Pgm("header value out of range".into()))?;
    }
    // exactly one whitespace byte before the raster
    if !b.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::Pgm("malformed header".into()));
    }
    Ok(Header { width: fields[0] as usize, height: fields[1] as usize, maxval: fields[2], offset: pos + 1 })
}

/// Decodes a P5 image with the given metadata.
pub fn decode_pgm16(bytes: &[u8], meta: &MetaSidecar) -> Result<RawFrame> {
    let h = parse_header(bytes)?;
    if h.maxval != 65535 {
        return Err(Error::Pgm(format!("maxval {} is not supported (65535 required)", h.maxval)));
    }
    if h.width % 2 != 0 || h.height % 2 != 0 {
        return Err(Error::Pgm(format!("odd dimensions {}x{}", h.width, h.height)));
    }
    let expected = h.offset + 2 * h.width * h.height;
    if bytes.len() < expected {
        return Err(Error::Truncated { expected, found: bytes.len() });
    }
    let data = bytes[h.offset..expected].chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect();
    RawFrame::new(h.width, h.height, data, meta.sensor(), meta.iso).map_err(Error::Metadata)
}

pub fn encode_pgm16(width: usize, height: usize, data: &[u16]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n65535\n").into_bytes();
    out.reserve(2 * data.len());
    for &v in data {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out
}

/// Reads `path` using the metadata sidecar next to it.
pub fn read_pgm16(path: &Path) -> Result<RawFrame> {
    let side = sidecar_path(path);
    let meta: MetaSidecar = read_json(&side)?;
    import_pgm16(path, &meta)
}

pub fn import_pgm16(path: &Path, meta: &MetaSidecar) -> Result<RawFrame> {
    decode_pgm16(&read_bytes(path)?, meta).map_err(|e| e.in_file(path))
}

/// Writes the frame as PGM plus its metadata sidecar.
pub fn export_pgm16(frame: &RawFrame, path: &Path) -> Result<()> {
    write_bytes(path, &encode_pgm16(frame.width(), frame.height(), frame.data()))?;
    write_json(&sidecar_path(path), &MetaSidecar::of(frame))
}
