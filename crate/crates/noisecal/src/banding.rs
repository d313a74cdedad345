//! Centred 2-D Fourier magnitude of bias frames.
//!
//! Row noise is constant along each row, so its energy sits on the vertical axis of
//! the centred spectrum (zero horizontal frequency). The band ratios compare the mean
//! magnitude on each axis, DC excluded, with the mean magnitude off both axes.

use std::path::Path;

use noisecal_core::RawFrame;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{write_bytes, Result};
use crate::pgm::encode_pgm16;

pub const MIN_SIDE: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct BandingSpectrum {
    pub width: usize,
    pub height: usize,
    /// Centred magnitude, row-major; DC at `(width / 2, height / 2)`.
    pub magnitude: Vec<f64>,
    /// Mean magnitude along the vertical axis over the off-axis mean.
    pub vertical_ratio: f64,
    pub horizontal_ratio: f64,
}

pub fn banding_spectrum(frame: &RawFrame) -> Result<BandingSpectrum> {
    let (w, h) = (frame.width(), frame.height());
    if w < MIN_SIDE || h < MIN_SIDE {
        return Err(noisecal_core::Error::Domain("banding spectrum needs frames of at least 64x64").into());
    }
    let signal = frame.signal_above_black();
    let mut buf: Vec<Complex<f64>> = signal.iter().map(|&v| Complex::new(v, 0.0)).collect();

    let mut planner = FftPlanner::new();
    let row_fft = planner.plan_fft_forward(w);
    row_fft.process(&mut buf);
    let col_fft = planner.plan_fft_forward(h);
    let mut col = vec![Complex::new(0.0, 0.0); h];
    for x in 0..w {
        for y in 0..h {
            col[y] = buf[y * w + x];
        }
        col_fft.process(&mut col);
        for y in 0..h {
            buf[y * w + x] = col[y];
        }
    }

    let (cx, cy) = (w / 2, h / 2);
    let mut magnitude = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            magnitude[((y + cy) % h) * w + (x + cx) % w] = buf[y * w + x].norm();
        }
    }

    let mut vertical = 0.0;
    let mut horizontal = 0.0;
    let mut off = 0.0;
    for y in 0..h {
        for x in 0..w {
            let m = magnitude[y * w + x];
            match (x == cx, y == cy) {
                (true, true) => {}
                (true, false) => vertical += m,
                (false, true) => horizontal += m,
                (false, false) => off += m,
            }
        }
    }
    let off_mean = off / ((w - 1) * (h - 1)) as f64;
    let ratio = |sum: f64, n: usize| if off_mean > 0.0 { sum / n as f64 / off_mean } else { 0.0 };
    Ok(BandingSpectrum {
        width: w,
        height: h,
        vertical_ratio: ratio(vertical, h - 1),
        horizontal_ratio: ratio(horizontal, w - 1),
        magnitude,
    })
}

impl BandingSpectrum {
    /// `ln(1 + |F|)` scaled so the largest value maps to 65535.
    pub fn log_magnitude_u16(&self) -> Vec<u16> {
        let logs: Vec<f64> = self.magnitude.iter().map(|m| m.ln_1p()).collect();
        let max = logs.iter().copied().fold(0.0, f64::max);
        logs.iter().map(|&l| if max > 0.0 { (l / max * 65535.0).round() as u16 } else { 0 }).collect()
    }

    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        write_bytes(path, &encode_pgm16(self.width, self.height, &self.log_magnitude_u16()))
    }
}
