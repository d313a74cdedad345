//! Bayer raw frame container and per-channel statistics.
//!
//! Channel indices address the position inside each 2×2 CFA block:
//! `0 = (even row, even col)`, `1 = (even, odd)`, `2 = (odd, even)`, `3 = (odd, odd)`.
//! Per-channel quantities (black level, color bias) are indexed the same way.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CfaLayout {
    Rggb,
    Bggr,
    Grbg,
    Gbrg,
}

impl CfaLayout {
    pub fn code(self) -> u8 {
        match self {
            CfaLayout::Rggb => 0,
            CfaLayout::Bggr => 1,
            CfaLayout::Grbg => 2,
            CfaLayout::Gbrg => 3,
        }
    }

    /// Codes 4 and above are reserved for non-Bayer layouts.
    pub fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => CfaLayout::Rggb,
            1 => CfaLayout::Bggr,
            2 => CfaLayout::Grbg,
            3 => CfaLayout::Gbrg,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            CfaLayout::Rggb => "RGGB",
            CfaLayout::Bggr => "BGGR",
            CfaLayout::Grbg => "GRBG",
            CfaLayout::Gbrg => "GBRG",
        }
    }
}

/// Sensor metadata shared by every frame of one camera mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensorMeta {
    pub cfa: CfaLayout,
    pub bit_depth: u8,
    pub black_level: [u16; 4],
    pub white_level: u16,
}

impl SensorMeta {
    pub fn validate(&self) -> Result<()> {
        if !matches!(self.bit_depth, 10 | 12 | 14 | 16) {
            return Err(Error::InvalidFrame("bit depth must be 10, 12, 14 or 16"));
        }
        if u32::from(self.white_level) > (1u32 << self.bit_depth) - 1 {
            return Err(Error::InvalidFrame("white level exceeds bit depth"));
        }
        if self.black_level.iter().any(|&b| b >= self.white_level) {
            return Err(Error::InvalidFrame("black level must be below white level"));
        }
        Ok(())
    }
}

#[inline]
pub fn channel_of(x: usize, y: usize) -> usize {
    ((y & 1) << 1) | (x & 1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawFrame {
    width: usize,
    height: usize,
    data: Vec<u16>,
    meta: SensorMeta,
    iso: Option<u32>,
}

impl RawFrame {
    pub fn new(width: usize, height: usize, data: Vec<u16>, meta: SensorMeta, iso: Option<u32>) -> Result<Self> {
        meta.validate()?;
        if width == 0 || height == 0 || !width.is_multiple_of(2) || !height.is_multiple_of(2) {
            return Err(Error::InvalidFrame("dimensions must be positive and even"));
        }
        if width.checked_mul(height) != Some(data.len()) {
            return Err(Error::InvalidFrame("pixel count does not match dimensions"));
        }
        if data.iter().any(|&v| v > meta.white_level) {
            return Err(Error::InvalidFrame("pixel value exceeds white level"));
        }
        if iso == Some(0) {
            return Err(Error::InvalidFrame("iso must be positive"));
        }
        Ok(RawFrame { width, height, data, meta, iso })
    }

    /// A frame with every pixel at the per-channel black level.
    pub fn black(width: usize, height: usize, meta: SensorMeta, iso: Option<u32>) -> Result<Self> {
        let data = (0..height)
            .flat_map(|y| (0..width).map(move |x| meta.black_level[channel_of(x, y)]))
            .collect();
        Self::new(width, height, data, meta, iso)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u16] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u16> {
        self.data
    }

    pub fn meta(&self) -> &SensorMeta {
        &self.meta
    }

    pub fn iso(&self) -> Option<u32> {
        self.iso
    }

    pub fn row(&self, y: usize) -> &[u16] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.data[y * self.width + x]
    }

    pub fn channel(&self, channel: usize) -> Result<ChannelView<'_>> {
        ChannelView::new(self, channel, Roi::full(self))
    }

    /// Pixel values above black level, as reals.
    pub fn signal_above_black(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.data.len());
        for y in 0..self.height {
            for (x, &v) in self.row(y).iter().enumerate() {
                out.push(f64::from(v) - f64::from(self.meta.black_level[channel_of(x, y)]));
            }
        }
        out
    }
}

/// Rectangle aligned to whole CFA blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Roi {
    pub x0: usize,
    pub y0: usize,
    pub width: usize,
    pub height: usize,
}

impl Roi {
    pub fn full(frame: &RawFrame) -> Self {
        Roi { x0: 0, y0: 0, width: frame.width, height: frame.height }
    }

    /// Central crop spanning `fraction` of each side, snapped to 2×2 blocks.
    pub fn central(frame: &RawFrame, fraction: f64) -> Self {
        let side = |n: usize| {
            let len = (((n as f64 * fraction) as usize) & !1).clamp(2, n);
            let start = ((n - len) / 2) & !1;
            (start, len)
        };
        let (x0, width) = side(frame.width);
        let (y0, height) = side(frame.height);
        Roi { x0, y0, width, height }
    }
}

/// The pixels of one CFA channel, optionally restricted to a region.
#[derive(Clone, Copy, Debug)]
pub struct ChannelView<'a> {
    frame: &'a RawFrame,
    channel: usize,
    roi: Roi,
}

impl<'a> ChannelView<'a> {
    pub fn new(frame: &'a RawFrame, channel: usize, roi: Roi) -> Result<Self> {
        if channel > 3 {
            return Err(Error::Domain("channel index must be 0..=3"));
        }
        if !roi.x0.is_multiple_of(2) || !roi.y0.is_multiple_of(2) || roi.x0 + roi.width > frame.width || roi.y0 + roi.height > frame.height {
            return Err(Error::Domain("region must be block aligned and inside the frame"));
        }
        Ok(ChannelView { frame, channel, roi })
    }

    pub fn channel(&self) -> usize {
        self.channel
    }

    pub fn iter(&self) -> impl Iterator<Item = u16> + 'a {
        let f = self.frame;
        let roi = self.roi;
        let dx = self.channel & 1;
        let dy = self.channel >> 1;
        (roi.y0 + dy..roi.y0 + roi.height)
            .step_by(2)
            .flat_map(move |y| (roi.x0 + dx..roi.x0 + roi.width).step_by(2).map(move |x| f.get(x, y)))
    }

    pub fn len(&self) -> usize {
        let dx = self.channel & 1;
        let dy = self.channel >> 1;
        self.roi.width.saturating_sub(dx).div_ceil(2) * self.roi.height.saturating_sub(dy).div_ceil(2)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn stats(&self) -> ChannelStats {
        let values: Vec<u16> = self.iter().collect();
        ChannelStats::from_values(values)
    }
}

/// Mean, population variance and lower median of a set of DN values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub mean: f64,
    pub variance: f64,
    pub median: f64,
    pub count: usize,
}

impl ChannelStats {
    fn from_values(mut values: Vec<u16>) -> Self {
        let n = values.len();
        if n == 0 {
            return ChannelStats { mean: f64::NAN, variance: f64::NAN, median: f64::NAN, count: 0 };
        }
        let mean = values.iter().map(|&v| f64::from(v)).sum::<f64>() / n as f64;
        let variance = values
            .iter()
            .map(|&v| {
                let d = f64::from(v) - mean;
                d * d
            })
            .sum::<f64>()
            / n as f64;
        let (_, median, _) = values.select_nth_unstable((n - 1) / 2);
        ChannelStats { mean, variance, median: f64::from(*median), count: n }
    }
}

pub fn channel_stats(frame: &RawFrame, channel: usize) -> Result<ChannelStats> {
    Ok(frame.channel(channel)?.stats())
}
