//! ELDR v1 raw frame container.
//!
//! A 64-byte little-endian header followed by `width * height` little-endian `u16` pixels:
//!
//! | offset | size | field |
//! |-------:|-----:|-------|
//! | 0  | 4 | magic `ELDR` |
//! | 4  | 2 | version (1) |
//! | 6  | 4 | width |
//! | 10 | 4 | height |
//! | 14 | 1 | CFA code (0 RGGB, 1 BGGR, 2 GRBG, 3 GBRG; 4+ reserved) |
//! | 15 | 1 | bit depth |
//! | 16 | 2 | white level |
//! | 18 | 8 | black level, 4 × u16 |
//! | 26 | 4 | ISO (0 = absent) |
//! | 30 | 34 | reserved, zero |

use std::path::Path;

use noisecal_core::{CfaLayout, RawFrame, SensorMeta};

use crate::error::{read_bytes, write_bytes, Error, Result};

pub const MAGIC: [u8; 4] = *b"ELDR";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 64;

fn u16_at(b: &[u8], off: usize) -> u16 {
    u16::from_le_bytes([b[off], b[off + 1]])
}

fn u32_at(b: &[u8], off: usize) -> u32 {
    u32::from_le_bytes([b[off], b[off + 1], b[off + 2], b[off + 3]])
}

pub fn encode(frame: &RawFrame) -> Vec<u8> {
    let meta = frame.meta();
    let mut out = Vec::with_capacity(HEADER_LEN + 2 * frame.data().len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(frame.width() as u32).to_le_bytes());
    out.extend_from_slice(&(frame.height() as u32).to_le_bytes());
    out.push(meta.cfa.code());
    out.push(meta.bit_depth);
    out.extend_from_slice(&meta.white_level.to_le_bytes());
    for b in meta.black_level {
        out.extend_from_slice(&b.to_le_bytes());
    }
    out.extend_from_slice(&frame.iso().unwrap_or(0).to_le_bytes());
    out.resize(HEADER_LEN, 0);
    for &v in frame.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<RawFrame> {
    if bytes.len() < 6 {
        return Err(if bytes.len() >= 4 && bytes[..4] != MAGIC {
            Error::BadMagic
        } else {
            Error::Truncated { expected: HEADER_LEN, found: bytes.len() }
        });
    }
    if bytes[..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    let version = u16_at(bytes, 4);
    if version > VERSION {
        return Err(Error::FutureVersion(version));
    }
    if version == 0 {
        return Err(Error::Metadata(noisecal_core::Error::InvalidFrame("ELDR version 0 does not exist")));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated { expected: HEADER_LEN, found: bytes.len() });
    }
    let width = u32_at(bytes, 6) as usize;
    let height = u32_at(bytes, 10) as usize;
    let cfa = CfaLayout::from_code(bytes[14]).ok_or(Error::UnknownCfa(bytes[14]))?;
    let meta = SensorMeta {
        cfa,
        bit_depth: bytes[15],
        white_level: u16_at(bytes, 16),
        black_level: [u16_at(bytes, 18), u16_at(bytes, 20), u16_at(bytes, 22), u16_at(bytes, 24)],
    };
    let iso = match u32_at(bytes, 26) {
        0 => None,
        v => Some(v),
    };
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(2))
        .and_then(|n| n.checked_add(HEADER_LEN))
        .ok_or(Error::Metadata(noisecal_core::Error::InvalidFrame("frame dimensions overflow")))?;
    if bytes.len() < expected {
        return Err(Error::Truncated { expected, found: bytes.len() });
    }
    if bytes.len() > expected {
        return Err(Error::TrailingData { extra: bytes.len() - expected });
    }
    let data = bytes[HEADER_LEN..].chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]])).collect();
    RawFrame::new(width, height, data, meta, iso).map_err(Error::Metadata)
}

pub fn read_frame(path: &Path) -> Result<RawFrame> {
    decode(&read_bytes(path)?).map_err(|e| e.in_file(path))
}

pub fn write_frame(frame: &RawFrame, path: &Path) -> Result<()> {
    write_bytes(path, &encode(frame))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> SensorMeta {
        SensorMeta { cfa: CfaLayout::Grbg, bit_depth: 12, black_level: [256, 257, 258, 259], white_level: 4095 }
    }

    #[test]
    fn header_layout() {
        let f = RawFrame::new(4, 2, vec![256, 1, 2, 3, 4, 5, 6, 4095], meta(), Some(3200)).unwrap();
        let b = encode(&f);
        assert_eq!(b.len(), 64 + 16);
        assert_eq!(&b[..4], b"ELDR");
        assert_eq!(b[4..6], [1, 0]);
        assert_eq!(b[6..10], [4, 0, 0, 0]);
        assert_eq!(b[10..14], [2, 0, 0, 0]);
        assert_eq!(b[14], 2);
        assert_eq!(b[15], 12);
        assert_eq!(b[16..18], [0xff, 0x0f]);
        assert_eq!(b[18..20], [0, 1]);
        assert_eq!(b[24..26], [3, 1]);
        assert_eq!(b[26..30], 3200u32.to_le_bytes());
        assert!(b[30..64].iter().all(|&x| x == 0));
        assert_eq!(b[64..66], [0, 1]);
        assert_eq!(decode(&b).unwrap(), f);
    }

    #[test]
    fn black_frame_round_trip_is_byte_identical() {
        let f = RawFrame::black(4, 4, meta(), None).unwrap();
        let b = encode(&f);
        assert_eq!(encode(&decode(&b).unwrap()), b);
        assert_eq!(decode(&b).unwrap().iso(), None);
    }

    #[test]
    fn rejects_malformed() {
        let f = RawFrame::black(4, 4, meta(), Some(100)).unwrap();
        let good = encode(&f);

        let mut b = good.clone();
        b[0] = b'X';
        assert!(matches!(decode(&b), Err(Error::BadMagic)));

        let mut b = good.clone();
        b[4] = 2;
        assert!(matches!(decode(&b), Err(Error::FutureVersion(2))));

        assert!(matches!(decode(&good[..good.len() - 1]), Err(Error::Truncated { .. })));
        assert!(matches!(decode(&good[..10]), Err(Error::Truncated { .. })));

        let mut b = good.clone();
        b.push(0);
        assert!(matches!(decode(&b), Err(Error::TrailingData { extra: 1 })));

        let mut b = good.clone();
        b[14] = 4;
        assert!(matches!(decode(&b), Err(Error::UnknownCfa(4))));

        // pixel above white level
        let mut b = good.clone();
        b[64..66].copy_from_slice(&4096u16.to_le_bytes());
        assert!(matches!(decode(&b), Err(Error::Metadata(_))));

        // black level at white level
        let mut b = good;
        b[18..20].copy_from_slice(&4095u16.to_le_bytes());
        assert!(matches!(decode(&b), Err(Error::Metadata(_))));
    }
}
