//! Virtual camera: flat-field and bias frames generated from known noise parameters.
//!
//! Frames go through the same kernel as [`crate::synth`], so the generator and the
//! synthesizer share one implementation of the noise model.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::calibrate::CalibrationDataset;
use crate::frame::channel_of;
use crate::synth::noise_field;
use crate::{CfaLayout, Error, NoiseParams, RandomSource, RawFrame, Result, SensorMeta};

const BIAS_STREAM: u64 = 0xb1a5;
const FLAT_STREAM: u64 = 0xf1a7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VirtualCameraSpec {
    pub truth: NoiseParams,
    pub frame_width: usize,
    pub frame_height: usize,
    pub sensor: SensorMeta,
    pub iso: Option<u32>,
    /// Mean photoelectron counts of the flat-field exposures.
    pub flat_levels: Vec<f64>,
    pub frames_per_level: usize,
    pub bias_frame_count: usize,
}

/// `n` levels spaced geometrically over `[lo, hi]`.
pub fn geometric_levels(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => (0..n)
            .map(|i| lo * libm::pow(hi / lo, i as f64 / (n - 1) as f64))
            .collect(),
    }
}

impl Default for VirtualCameraSpec {
    fn default() -> Self {
        VirtualCameraSpec {
            truth: NoiseParams {
                system_gain_k: 2.0,
                lambda_shape: 0.05,
                color_bias_mu: [-1.5, 0.8, 0.8, 2.1],
                read_scale_sigma_tl: 10.0,
                row_scale_sigma_r: 2.0,
                quant_step_q: 1.0,
            },
            frame_width: 512,
            frame_height: 512,
            sensor: SensorMeta { cfa: CfaLayout::Rggb, bit_depth: 16, black_level: [512; 4], white_level: 65535 },
            iso: Some(1600),
            flat_levels: geometric_levels(1e2, 1e4, 8),
            frames_per_level: 8,
            bias_frame_count: 32,
        }
    }
}

impl VirtualCameraSpec {
    pub fn validate(&self) -> Result<()> {
        self.truth.validate_for_synthesis()?;
        self.sensor.validate()?;
        if self.frame_width == 0 || self.frame_height == 0 || !self.frame_width.is_multiple_of(2) || !self.frame_height.is_multiple_of(2) {
            return Err(Error::InvalidFrame("dimensions must be positive and even"));
        }
        if self.flat_levels.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::Domain("flat levels must be positive"));
        }
        if self.flat_levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("flat levels must be strictly increasing"));
        }
        if let Some(&top) = self.flat_levels.last() {
            let black = f64::from(*self.sensor.black_level.iter().max().unwrap_or(&0));
            if self.truth.system_gain_k * top + black >= 0.9 * f64::from(self.sensor.white_level) {
                return Err(Error::Domain("brightest flat level would saturate"));
            }
        }
        Ok(())
    }
}

fn render(spec: &VirtualCameraSpec, electrons: f64, rng: &RandomSource) -> Result<RawFrame> {
    let signal = alloc::vec![spec.truth.system_gain_k * electrons; spec.frame_width * spec.frame_height];
    let noisy = noise_field(&signal, spec.frame_width, spec.frame_height, &spec.truth, rng)?;
    let white = f64::from(spec.sensor.white_level);
    let data = noisy
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let black = f64::from(spec.sensor.black_level[channel_of(i % spec.frame_width, i / spec.frame_width)]);
            libm::round((v + black).clamp(0.0, white)) as u16
        })
        .collect();
    RawFrame::new(spec.frame_width, spec.frame_height, data, spec.sensor, spec.iso)
}

/// Lightless frames: black level plus read, row and quantization noise.
pub fn generate_bias(spec: &VirtualCameraSpec, rng: &RandomSource) -> Result<Vec<RawFrame>> {
    spec.validate()?;
    let stream = rng.derive(BIAS_STREAM);
    (0..spec.bias_frame_count).map(|i| render(spec, 0.0, &stream.derive(i as u64))).collect()
}

/// Uniformly lit frames, `frames_per_level` at each entry of `flat_levels`.
pub fn generate_flats(spec: &VirtualCameraSpec, rng: &RandomSource) -> Result<Vec<(RawFrame, f64)>> {
    spec.validate()?;
    let stream = rng.derive(FLAT_STREAM);
    let mut out = Vec::with_capacity(spec.flat_levels.len() * spec.frames_per_level);
    for (li, &level) in spec.flat_levels.iter().enumerate() {
        let level_stream = stream.derive(li as u64);
        for f in 0..spec.frames_per_level {
            out.push((render(spec, level, &level_stream.derive(f as u64))?, level));
        }
    }
    Ok(out)
}

/// Software emulation of a capture session: one dataset per `(iso, truth)` pair.
pub fn capture_protocol(
    spec: &VirtualCameraSpec,
    truths: &[(u32, NoiseParams)],
    rng: &RandomSource,
) -> Result<Vec<(u32, CalibrationDataset)>> {
    truths
        .iter()
        .map(|&(iso, truth)| {
            let s = VirtualCameraSpec { truth, iso: Some(iso), ..spec.clone() };
            let r = rng.derive(u64::from(iso));
            let flat_fields = generate_flats(&s, &r)?.into_iter().map(|(f, _)| f).collect();
            let bias_frames = generate_bias(&s, &r)?;
            Ok((iso, CalibrationDataset { flat_fields, bias_frames }))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::channel_stats;

    fn small() -> VirtualCameraSpec {
        VirtualCameraSpec {
            frame_width: 64,
            frame_height: 64,
            frames_per_level: 2,
            bias_frame_count: 2,
            flat_levels: geometric_levels(100.0, 1000.0, 3),
            ..Default::default()
        }
    }

    #[test]
    fn noiseless_bias_is_black() {
        let spec = VirtualCameraSpec { truth: NoiseParams::noiseless(), ..small() };
        for f in generate_bias(&spec, &RandomSource::new(1)).unwrap() {
            assert_eq!(f, RawFrame::black(64, 64, spec.sensor, spec.iso).unwrap());
        }
    }

    #[test]
    fn shot_only_flat_variance() {
        let truth = NoiseParams { system_gain_k: 1.0, ..NoiseParams::noiseless() };
        let spec = VirtualCameraSpec {
            truth,
            frame_width: 512,
            frame_height: 512,
            flat_levels: alloc::vec![1e4],
            frames_per_level: 1,
            ..small()
        };
        let (f, _) = generate_flats(&spec, &RandomSource::new(2)).unwrap().remove(0);
        let n = f.data().len() as f64;
        let mean = f.data().iter().map(|&v| f64::from(v)).sum::<f64>() / n;
        let var = f.data().iter().map(|&v| (f64::from(v) - mean).powi(2)).sum::<f64>() / n;
        assert!((var / 1e4 - 1.0).abs() < 0.02, "{var}");
    }

    #[test]
    fn spec_rejects_bad_levels() {
        let mut s = small();
        s.flat_levels = alloc::vec![0.0, 10.0];
        assert!(s.validate().is_err());
        s.flat_levels = alloc::vec![10.0, 10.0];
        assert!(s.validate().is_err());
        s.flat_levels = alloc::vec![40_000.0];
        assert!(s.validate().is_err());
    }

    #[test]
    fn bias_channel_offsets_follow_color_bias() {
        let truth = NoiseParams {
            color_bias_mu: [2.0, 0.0, 0.0, -2.0],
            read_scale_sigma_tl: 5.0,
            lambda_shape: 0.14,
            quant_step_q: 1.0,
            ..NoiseParams::noiseless()
        };
        let spec = VirtualCameraSpec { truth, frame_width: 256, frame_height: 256, bias_frame_count: 8, ..small() };
        let frames = generate_bias(&spec, &RandomSource::new(9)).unwrap();
        for (c, &mu) in truth.color_bias_mu.iter().enumerate() {
            let m = frames.iter().map(|f| channel_stats(f, c).unwrap().mean - 512.0).sum::<f64>() / 8.0;
            assert!((m - mu).abs() < 0.1, "channel {c}: {m}");
        }
    }

    #[test]
    fn generation_is_reproducible() {
        let spec = small();
        let a = generate_flats(&spec, &RandomSource::new(5)).unwrap();
        let b = generate_flats(&spec, &RandomSource::new(5)).unwrap();
        assert_eq!(a, b);
        assert!(capture_protocol(&spec, &[], &RandomSource::new(1)).unwrap().is_empty());
    }
}
