//! Noisy raw synthesis.
//!
//! Shot noise is applied in the electron domain and scaled by `K`; read, row and
//! quantization noise are added afterwards in DN. Each row draws from its own stream
//! `rng.derive(row)`, so output does not depend on how rows are scheduled.

use alloc::vec::Vec;

use libm::round;
use serde::{Deserialize, Serialize};

use crate::frame::channel_of;
use crate::model::sample_params;
use crate::statdist::{gaussian_sample, poisson_unchecked, tl_quantile_unchecked};
use crate::{par, CameraProfile, Error, NoiseParams, RandomSource, RawFrame, Result};

/// Adds the full noise model to a real-valued signal-above-black field.
///
/// Returns the noisy signal above black (before clipping or rounding). A zero scale
/// disables the corresponding component, and `K = 0` disables shot noise.
pub fn noise_field(
    signal: &[f64],
    width: usize,
    height: usize,
    params: &NoiseParams,
    rng: &RandomSource,
) -> Result<Vec<f64>> {
    params.validate_for_synthesis()?;
    if width == 0 || width.checked_mul(height) != Some(signal.len()) {
        return Err(Error::Domain("signal length does not match dimensions"));
    }
    if let Some(i) = signal.iter().position(|&s| !(s >= 0.0 && s.is_finite())) {
        return Err(Error::BelowBlackLevel { x: i % width, y: i / width });
    }

    let mut out = signal.to_vec();
    let p = *params;
    par::for_each_chunk_mut(&mut out, width, |y, row| {
        let mut r = rng.derive(y as u64);
        let row_offset = if p.row_scale_sigma_r > 0.0 { p.row_scale_sigma_r * gaussian_sample(&mut r) } else { 0.0 };
        for (x, v) in row.iter_mut().enumerate() {
            let s = *v;
            let shot = if p.system_gain_k > 0.0 {
                p.system_gain_k * poisson_unchecked(s / p.system_gain_k, &mut r) as f64
            } else {
                s
            };
            let mu = p.color_bias_mu[channel_of(x, y)];
            let read = if p.read_scale_sigma_tl > 0.0 {
                mu + p.read_scale_sigma_tl * tl_quantile_unchecked(r.uniform_open(), p.lambda_shape)
            } else {
                mu
            };
            let quant = if p.quant_step_q > 0.0 { p.quant_step_q * (r.uniform() - 0.5) } else { 0.0 };
            *v = shot + read + row_offset + quant;
        }
    });
    Ok(out)
}

/// Output of [`add_noise`].
#[derive(Clone, Debug)]
pub struct NoisyFrame {
    /// Pre-quantization DN including black level.
    pub real: Vec<f64>,
    /// Rounded to integer DN and clamped to `[0, white_level]`.
    pub frame: RawFrame,
}

fn quantize(values: &[f64], clean: &RawFrame) -> Result<RawFrame> {
    let white = f64::from(clean.meta().white_level);
    let data = values.iter().map(|&v| round(v).clamp(0.0, white) as u16).collect();
    RawFrame::new(clean.width(), clean.height(), data, *clean.meta(), clean.iso())
}

fn check_above_black(clean: &RawFrame) -> Result<Vec<f64>> {
    let signal = clean.signal_above_black();
    if let Some(i) = signal.iter().position(|&s| s < 0.0) {
        return Err(Error::BelowBlackLevel { x: i % clean.width(), y: i / clean.width() });
    }
    Ok(signal)
}

/// Applies the noise model to a clean frame at unit light level.
///
/// When `clip` is set the real-valued output is clipped to `[0, white_level]` too;
/// the quantized frame is always clipped.
pub fn add_noise(clean: &RawFrame, params: &NoiseParams, rng: &RandomSource, clip: bool) -> Result<NoisyFrame> {
    let signal = check_above_black(clean)?;
    let mut real = noise_field(&signal, clean.width(), clean.height(), params, rng)?;
    let meta = clean.meta();
    let white = f64::from(meta.white_level);
    for (i, v) in real.iter_mut().enumerate() {
        *v += f64::from(meta.black_level[channel_of(i % clean.width(), i / clean.width())]);
        if clip {
            *v = v.clamp(0.0, white);
        }
    }
    let frame = quantize(&real, clean)?;
    Ok(NoisyFrame { real, frame })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisConfig {
    /// Range the low-light factor `f` is drawn from uniformly.
    pub ratio_range: (f64, f64),
    /// Overrides the drawn factor when set.
    pub fixed_ratio: Option<f64>,
    /// Clip the dim noisy signal to the sensor range before amplification.
    pub clip_output: bool,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig { ratio_range: (100.0, 300.0), fixed_ratio: None, clip_output: true }
    }
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.ratio_range;
        if !(lo >= 1.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::Domain("ratio range must satisfy 1 <= low <= high"));
        }
        if let Some(f) = self.fixed_ratio {
            if !(f >= 1.0 && f.is_finite()) {
                return Err(Error::Domain("fixed ratio must be >= 1"));
            }
        }
        Ok(())
    }
}

/// Where synthesis gets its noise parameters from.
#[derive(Clone, Copy, Debug)]
pub enum ParamSource<'a> {
    Sample(&'a CameraProfile),
    Fixed(NoiseParams),
}

#[derive(Clone, Debug)]
pub struct LowLightSample {
    pub noisy: RawFrame,
    pub ratio: f64,
    pub params: NoiseParams,
}

/// Simulates a capture with `1/f` of the light, then amplifies by `f`.
///
/// The returned ratio and parameters reproduce the frame exactly when fed back with
/// the same `rng`.
pub fn synthesize_lowlight(
    clean: &RawFrame,
    source: ParamSource<'_>,
    config: &SynthesisConfig,
    rng: &RandomSource,
) -> Result<LowLightSample> {
    config.validate()?;
    let ratio = match config.fixed_ratio {
        Some(f) => f,
        None => {
            let (lo, hi) = config.ratio_range;
            lo + (hi - lo) * rng.derive(0).uniform()
        }
    };
    let params = match source {
        ParamSource::Sample(profile) => sample_params(profile, &mut rng.derive(1))?,
        ParamSource::Fixed(p) => p,
    };

    let mut signal = check_above_black(clean)?;
    for s in &mut signal {
        *s /= ratio;
    }
    let mut noisy = noise_field(&signal, clean.width(), clean.height(), &params, &rng.derive(2))?;
    let meta = clean.meta();
    let width = clean.width();
    for (i, v) in noisy.iter_mut().enumerate() {
        let black = f64::from(meta.black_level[channel_of(i % width, i / width)]);
        if config.clip_output {
            *v = v.clamp(-black, f64::from(meta.white_level) - black);
        }
        *v = *v * ratio + black;
    }
    Ok(LowLightSample { noisy: quantize(&noisy, clean)?, ratio, params })
}
