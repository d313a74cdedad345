//! Noise parameters and their joint distribution across ISO settings.
//!
//! Sampling draws `ln K` uniformly between the calibrated extremes, then draws
//! `ln σTL` and `ln σr` from Gaussians centred on log-log regression lines through the
//! per-ISO calibrations. The shape `λ` and color bias `μc` carry no clear dependence on
//! `K` and are resampled from the calibrated values.

use alloc::string::String;
use alloc::vec::Vec;

use libm::{exp, log};
use serde::{Deserialize, Serialize};

use crate::fitlab::least_squares;
use crate::statdist::gaussian_sample;
use crate::{Error, RandomSource, Result, SensorMeta};

pub const PROFILE_SCHEMA_VERSION: u32 = 1;

/// One concrete parameter set at a single ISO.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    /// DN per electron.
    pub system_gain_k: f64,
    pub lambda_shape: f64,
    /// DC offset of the read noise per CFA channel, DN.
    pub color_bias_mu: [f64; 4],
    pub read_scale_sigma_tl: f64,
    pub row_scale_sigma_r: f64,
    pub quant_step_q: f64,
}

impl NoiseParams {
    /// All noise switched off; synthesis with these parameters is the identity.
    pub fn noiseless() -> Self {
        NoiseParams {
            system_gain_k: 0.0,
            lambda_shape: 0.14,
            color_bias_mu: [0.0; 4],
            read_scale_sigma_tl: 0.0,
            row_scale_sigma_r: 0.0,
            quant_step_q: 0.0,
        }
    }

    /// Checks the invariants of a calibrated parameter set.
    pub fn validate(&self) -> Result<()> {
        self.validate_for_synthesis()?;
        if self.system_gain_k <= 0.0 {
            return Err(Error::InvalidParams("system gain must be positive"));
        }
        if self.read_scale_sigma_tl <= 0.0 {
            return Err(Error::InvalidParams("read noise scale must be positive"));
        }
        if self.quant_step_q <= 0.0 {
            return Err(Error::InvalidParams("quantization step must be positive"));
        }
        Ok(())
    }

    /// Weaker check used by the synthesizer, where a zero scale disables that component.
    pub fn validate_for_synthesis(&self) -> Result<()> {
        let finite = self.system_gain_k.is_finite()
            && self.lambda_shape.is_finite()
            && self.color_bias_mu.iter().all(|v| v.is_finite())
            && self.read_scale_sigma_tl.is_finite()
            && self.row_scale_sigma_r.is_finite()
            && self.quant_step_q.is_finite();
        if !finite {
            return Err(Error::InvalidParams("parameters must be finite"));
        }
        if self.system_gain_k < 0.0
            || self.read_scale_sigma_tl < 0.0
            || self.row_scale_sigma_r < 0.0
            || self.quant_step_q < 0.0
        {
            return Err(Error::InvalidParams("scales must be non-negative"));
        }
        Ok(())
    }
}

/// `ln y = slope · ln K + intercept` with Gaussian residual scale `sigma_hat`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLine {
    pub slope: f64,
    pub intercept: f64,
    pub sigma_hat: f64,
}

impl LogLine {
    pub fn mean_at(&self, ln_k: f64) -> f64 {
        self.slope * ln_k + self.intercept
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointModel {
    pub k_min: f64,
    pub k_max: f64,
    pub tl_line: LogLine,
    pub row_line: LogLine,
    pub lambda_pool: Vec<f64>,
    pub mu_pool: Vec<[f64; 4]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsoRecord {
    pub iso: u32,
    pub params: NoiseParams,
    /// Where the calibration report for this ISO was written, if anywhere.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraProfile {
    pub schema_version: u32,
    pub camera_name: String,
    #[serde(default)]
    pub sensor: Option<SensorMeta>,
    pub per_iso_records: Vec<IsoRecord>,
    /// Present once at least three ISO settings are calibrated.
    #[serde(default)]
    pub joint: Option<JointModel>,
}

impl CameraProfile {
    /// Profile holding the given records, sorted by ISO, without a joint model.
    pub fn from_records(camera_name: &str, records: &[(u32, NoiseParams)]) -> Result<Self> {
        let mut recs: Vec<IsoRecord> = records
            .iter()
            .map(|&(iso, params)| IsoRecord { iso, params, report: None })
            .collect();
        recs.sort_by_key(|r| r.iso);
        if let Some(w) = recs.windows(2).find(|w| w[0].iso == w[1].iso) {
            return Err(Error::DuplicateIso(w[0].iso));
        }
        for r in &recs {
            r.params.validate()?;
        }
        Ok(CameraProfile {
            schema_version: PROFILE_SCHEMA_VERSION,
            camera_name: camera_name.into(),
            sensor: None,
            per_iso_records: recs,
            joint: None,
        })
    }

    /// Fits (or refits) the joint model from the current records.
    pub fn refit_joint(&mut self) -> Result<()> {
        let params: Vec<NoiseParams> = self.per_iso_records.iter().map(|r| r.params).collect();
        self.joint = Some(fit_joint(&params)?);
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.per_iso_records.windows(2).any(|w| w[0].iso >= w[1].iso) {
            return Err(Error::Domain("records must be sorted by unique ISO"));
        }
        for r in &self.per_iso_records {
            r.params.validate()?;
        }
        if let Some(j) = &self.joint {
            if !(j.k_min > 0.0 && j.k_min <= j.k_max) {
                return Err(Error::InvalidParams("joint model needs 0 < k_min <= k_max"));
            }
            if j.tl_line.sigma_hat < 0.0 || j.row_line.sigma_hat < 0.0 {
                return Err(Error::InvalidParams("negative regression scale"));
            }
        }
        if let Some(s) = &self.sensor {
            s.validate()?;
        }
        Ok(())
    }
}

fn fit_joint(params: &[NoiseParams]) -> Result<JointModel> {
    if params.len() < 3 {
        return Err(Error::InsufficientRecords { got: params.len(), need: 3 });
    }
    if params.iter().any(|p| p.row_scale_sigma_r <= 0.0) {
        return Err(Error::InvalidParams("row noise scale must be positive for the log-linear fit"));
    }
    let ln_k: Vec<f64> = params.iter().map(|p| log(p.system_gain_k)).collect();
    let ln_tl: Vec<f64> = params.iter().map(|p| log(p.read_scale_sigma_tl)).collect();
    let ln_r: Vec<f64> = params.iter().map(|p| log(p.row_scale_sigma_r)).collect();
    let line = |ys: &[f64]| -> Result<LogLine> {
        let f = least_squares(&ln_k, ys).map_err(|_| Error::Degenerate("all records share the same K"))?;
        Ok(LogLine { slope: f.slope, intercept: f.intercept, sigma_hat: f.residual_std_unbiased.unwrap_or(0.0) })
    };
    let tl_line = line(&ln_tl)?;
    let row_line = line(&ln_r)?;
    let k_min = params.iter().map(|p| p.system_gain_k).fold(f64::INFINITY, f64::min);
    let k_max = params.iter().map(|p| p.system_gain_k).fold(0.0, f64::max);
    Ok(JointModel {
        k_min,
        k_max,
        tl_line,
        row_line,
        lambda_pool: params.iter().map(|p| p.lambda_shape).collect(),
        mu_pool: params.iter().map(|p| p.color_bias_mu).collect(),
    })
}

/// Builds a profile from per-ISO calibrations and fits the joint log-linear model.
pub fn fit_joint_model(camera_name: &str, records: &[(u32, NoiseParams)]) -> Result<CameraProfile> {
    if records.len() < 3 {
        return Err(Error::InsufficientRecords { got: records.len(), need: 3 });
    }
    let mut profile = CameraProfile::from_records(camera_name, records)?;
    profile.refit_joint()?;
    Ok(profile)
}

/// Draws one parameter set from the profile's joint model.
pub fn sample_params(profile: &CameraProfile, rng: &mut RandomSource) -> Result<NoiseParams> {
    let joint = profile.joint.as_ref().ok_or(Error::NotSampleable)?;
    if joint.lambda_pool.is_empty() || joint.mu_pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    if !(joint.k_min > 0.0 && joint.k_min <= joint.k_max) {
        return Err(Error::InvalidParams("joint model needs 0 < k_min <= k_max"));
    }

    let u = rng.uniform();
    let z_tl = gaussian_sample(rng);
    let z_r = gaussian_sample(rng);
    let lambda_idx = rng.below(joint.lambda_pool.len() as u64) as usize;
    let mu_idx = rng.below(joint.mu_pool.len() as u64) as usize;

    let (k, ln_k) = if joint.k_min == joint.k_max {
        (joint.k_min, log(joint.k_min))
    } else {
        let (lo, hi) = (log(joint.k_min), log(joint.k_max));
        let ln_k = lo + (hi - lo) * u;
        (exp(ln_k), ln_k)
    };
    let draw = |line: &LogLine, z: f64| {
        if line.sigma_hat == 0.0 {
            exp(line.mean_at(ln_k))
        } else {
            exp(line.mean_at(ln_k) + line.sigma_hat * z)
        }
    };
    Ok(NoiseParams {
        system_gain_k: k,
        lambda_shape: joint.lambda_pool[lambda_idx],
        color_bias_mu: joint.mu_pool[mu_idx],
        read_scale_sigma_tl: draw(&joint.tl_line, z_tl),
        row_scale_sigma_r: draw(&joint.row_line, z_r),
        quant_step_q: 1.0,
    })
}

/// The calibrated record at `iso`, verbatim. No interpolation across ISO.
pub fn params_at_iso(profile: &CameraProfile, iso: u32) -> Result<NoiseParams> {
    profile
        .per_iso_records
        .iter()
        .find(|r| r.iso == iso)
        .map(|r| r.params)
        .ok_or(Error::UnknownIso(iso))
}
