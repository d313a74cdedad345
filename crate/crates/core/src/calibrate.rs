//! Per-ISO calibration from flat-field and bias frames.
//!
//! Stages run in a fixed order, each removing its component before the next:
//!
//! 1. system gain `K` from the photon transfer line of the flat fields,
//! 2. color bias `μc` from per-channel bias-frame means,
//! 3. row noise `σr` from row means of the debiased bias frames,
//! 4. read noise `(λ, σTL)` from the remaining residuals via PPCC and a probability plot.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use libm::sqrt;
use serde::{Deserialize, Serialize};

use crate::error::Stage;
use crate::fitlab::{
    default_lambda_grid, gaussian_mle_zero_mean, gaussian_probability_plot_fit, least_squares, ppcc_scan,
    probability_plot_fit, shapiro_wilk, LinearFit, NormalityTest, PpccResult,
};
use crate::frame::{channel_of, ChannelView, Roi};
use crate::statdist::{filliben_medians, normal_quantile_unchecked, tl_quantile_unchecked};
use crate::{par, Error, NoiseParams, RandomSource, RawFrame, Result};

/// Frames for one ISO setting.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CalibrationDataset {
    pub flat_fields: Vec<RawFrame>,
    pub bias_frames: Vec<RawFrame>,
}

/// Fewer bias frames than this triggers a warning.
pub const RECOMMENDED_BIAS_FRAMES: usize = 10;

impl CalibrationDataset {
    /// All frames must agree on dimensions, sensor metadata and ISO.
    pub fn validate(&self) -> Result<()> {
        let mut frames = self.flat_fields.iter().chain(&self.bias_frames);
        let Some(first) = frames.next() else {
            return Err(Error::Dataset("dataset holds no frames"));
        };
        for f in frames {
            if f.width() != first.width() || f.height() != first.height() {
                return Err(Error::Dataset("frames differ in dimensions"));
            }
            if f.meta() != first.meta() {
                return Err(Error::Dataset("frames differ in sensor metadata"));
            }
            if f.iso() != first.iso() {
                return Err(Error::Dataset("frames differ in ISO"));
            }
        }
        Ok(())
    }

    pub fn iso(&self) -> Option<u32> {
        self.flat_fields.iter().chain(&self.bias_frames).next().and_then(RawFrame::iso)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOptions {
    /// Side fraction of the central crop used for flat-field statistics.
    pub roi_fraction: f64,
    /// Flat fields whose channel median reaches this fraction of white level are rejected.
    pub saturation_fraction: f64,
    /// Residual pixels kept for the read-noise fit.
    pub read_noise_subsample: usize,
    /// Row means kept for the normality test.
    pub row_test_max: usize,
    pub lambda_grid: Vec<f64>,
    /// Points kept in the exported probability plot.
    pub plot_points: usize,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions {
            roi_fraction: 0.5,
            saturation_fraction: 0.9,
            read_noise_subsample: 100_000,
            row_test_max: 5000,
            lambda_grid: default_lambda_grid(),
            plot_points: 2000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CalibrationWarning {
    /// Photon transfer slope is zero: the flat fields carry no shot noise.
    DegenerateGain,
    FewBiasFrames { count: usize },
}

/// One `(signal, variance)` observation of the photon transfer curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PtcPoint {
    pub frame: usize,
    pub channel: usize,
    /// Median minus black level, DN.
    pub signal: f64,
    /// Population variance, DN².
    pub variance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GainEstimate {
    pub k: f64,
    pub fit: LinearFit,
    pub points: Vec<PtcPoint>,
    pub levels: usize,
    pub warnings: Vec<CalibrationWarning>,
}

fn count_levels(points: &[PtcPoint]) -> usize {
    let frames = points.iter().map(|p| p.frame).max().map_or(0, |m| m + 1);
    let mut signals: Vec<f64> = (0..frames)
        .map(|f| {
            let (sum, n) = points.iter().filter(|p| p.frame == f).fold((0.0, 0), |(s, n), p| (s + p.signal, n + 1));
            sum / n as f64
        })
        .collect();
    signals.sort_unstable_by(f64::total_cmp);
    let mut levels = usize::from(!signals.is_empty());
    for w in signals.windows(2) {
        if w[1] - w[0] > f64::max(1.0, 0.05 * w[1].abs()) {
            levels += 1;
        }
    }
    levels
}

/// Photon transfer regression of channel variance on channel signal over the central crop.
pub fn estimate_gain(flats: &[RawFrame], options: &CalibrationOptions) -> Result<GainEstimate> {
    if flats.is_empty() {
        return Err(Error::InsufficientLevels { found: 0 });
    }
    let per_frame: Vec<Result<Vec<PtcPoint>>> = par::map_range(flats.len(), |i| {
        let frame = &flats[i];
        let roi = Roi::central(frame, options.roi_fraction);
        let limit = options.saturation_fraction * f64::from(frame.meta().white_level);
        (0..4)
            .map(|c| {
                let s = ChannelView::new(frame, c, roi)?.stats();
                if s.median >= limit {
                    return Err(Error::Saturated { median: s.median, limit });
                }
                Ok(PtcPoint {
                    frame: i,
                    channel: c,
                    signal: s.median - f64::from(frame.meta().black_level[c]),
                    variance: s.variance,
                })
            })
            .collect()
    });
    let points: Vec<PtcPoint> = per_frame.into_iter().collect::<Result<Vec<_>>>()?.concat();

    let levels = count_levels(&points);
    if levels < 2 {
        return Err(Error::InsufficientLevels { found: levels });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.signal).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.variance).collect();
    let fit = least_squares(&xs, &ys)?;
    if fit.slope < 0.0 {
        return Err(Error::NegativeSlope(fit.slope));
    }
    let mut warnings = Vec::new();
    if fit.slope == 0.0 {
        warnings.push(CalibrationWarning::DegenerateGain);
    }
    Ok(GainEstimate { k: fit.slope, fit, points, levels, warnings })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ColorBias {
    /// Per-frame channel mean minus black level.
    pub samples: Vec<[f64; 4]>,
    /// Mean of `samples` across frames.
    pub mu_c: [f64; 4],
}

pub fn estimate_color_bias(bias: &[RawFrame]) -> Result<ColorBias> {
    if bias.is_empty() {
        return Err(Error::Dataset("no bias frames"));
    }
    let samples: Vec<[f64; 4]> = par::map_range(bias.len(), |i| {
        let f = &bias[i];
        let mut s = [0.0; 4];
        for (c, v) in s.iter_mut().enumerate() {
            let view = ChannelView::new(f, c, Roi::full(f)).expect("channel index in range");
            let sum: f64 = view.iter().map(f64::from).sum();
            *v = sum / view.len() as f64 - f64::from(f.meta().black_level[c]);
        }
        s
    });
    let mut mu_c = [0.0; 4];
    for s in &samples {
        for c in 0..4 {
            mu_c[c] += s[c];
        }
    }
    for m in &mut mu_c {
        *m /= samples.len() as f64;
    }
    Ok(ColorBias { samples, mu_c })
}

/// Bias frame with black level and channel offsets removed.
#[derive(Clone, Debug, PartialEq)]
pub struct DebiasedFrame {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
    /// Linear constraints already imposed on the row means. Subtracting a frame's own
    /// channel means makes the even-row and odd-row means each sum to zero: 2 constraints.
    pub mean_constraints: usize,
}

impl DebiasedFrame {
    pub fn new(frame: &RawFrame, channel_bias: &[f64; 4]) -> Self {
        let black = frame.meta().black_level;
        let data = (0..frame.height())
            .flat_map(|y| {
                frame.row(y).iter().enumerate().map(move |(x, &v)| {
                    let c = channel_of(x, y);
                    f64::from(v) - f64::from(black[c]) - channel_bias[c]
                })
            })
            .collect();
        DebiasedFrame { width: frame.width(), height: frame.height(), data, mean_constraints: 0 }
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn row_means(&self) -> Vec<f64> {
        (0..self.height).map(|y| self.row(y).iter().sum::<f64>() / self.width as f64).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RowNoise {
    pub sigma_r: f64,
    pub test: NormalityTest,
    /// Row means of every frame, frame-major.
    pub row_means: Vec<f64>,
    /// Root mean square of the row means before removing the residual-noise share.
    pub sigma_uncorrected: f64,
    /// Per-pixel variance of everything that is not row noise.
    pub residual_variance: f64,
}

/// `k` distinct indices from `0..n`, ascending (Floyd's algorithm).
pub fn subsample_indices(n: usize, k: usize, rng: &mut RandomSource) -> Vec<usize> {
    if k >= n {
        return (0..n).collect();
    }
    let mut chosen = BTreeSet::new();
    for j in n - k..n {
        let t = rng.below(j as u64 + 1) as usize;
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    chosen.into_iter().collect()
}

/// Row-noise scale from the row means of debiased bias frames.
///
/// A row mean also carries `σ²/W` of the per-pixel noise (`W` pixels per row); that
/// share is estimated from the within-row residuals and subtracted before the square root.
/// The mean square of the row means is divided by the rows left after the frames'
/// `mean_constraints`, so removing per-frame channel means does not bias the scale low.
pub fn estimate_row_noise(frames: &[DebiasedFrame], test_max: usize, rng: &mut RandomSource) -> Result<RowNoise> {
    let rows: usize = frames.iter().map(|f| f.height).sum();
    if rows < 16 {
        return Err(Error::TooFewRows { rows });
    }
    let width = frames[0].width;
    if width < 2 || frames.iter().any(|f| f.width != width || f.data.len() != f.width * f.height) {
        return Err(Error::Domain("debiased frames must share a width of at least 2"));
    }

    let per_frame: Vec<(Vec<f64>, f64)> = par::map_range(frames.len(), |i| {
        let f = &frames[i];
        let means = f.row_means();
        let ss: f64 = means
            .iter()
            .enumerate()
            .map(|(y, m)| f.row(y).iter().map(|v| (v - m) * (v - m)).sum::<f64>())
            .sum();
        (means, ss)
    });
    let row_means: Vec<f64> = per_frame.iter().flat_map(|(m, _)| m.iter().copied()).collect();
    let ss: f64 = per_frame.iter().map(|(_, s)| s).sum();

    let constraints: usize = frames.iter().map(|f| f.mean_constraints).sum();
    let dof = rows.saturating_sub(constraints);
    if dof == 0 {
        return Err(Error::TooFewRows { rows: dof });
    }

    let w = width as f64;
    let residual_variance = ss / (rows as f64 * w) * w / (w - 1.0);
    let sigma_uncorrected = gaussian_mle_zero_mean(&row_means)?;
    let inflation = residual_variance / w;
    let sigma_r = if inflation == 0.0 && constraints == 0 {
        sigma_uncorrected
    } else {
        let mean_square = row_means.iter().map(|m| m * m).sum::<f64>() / dof as f64;
        sqrt((mean_square - inflation).max(0.0))
    };

    let test = if row_means.len() > test_max {
        let picked: Vec<f64> = subsample_indices(row_means.len(), test_max, rng).into_iter().map(|i| row_means[i]).collect();
        shapiro_wilk(&picked)?
    } else {
        shapiro_wilk(&row_means)?
    };
    Ok(RowNoise { sigma_r, test, row_means, sigma_uncorrected, residual_variance })
}

/// Residuals after removing row means, pooled across frames and subsampled to at most `k`.
///
/// Each row mean contains `1/W` of the pixel it is subtracted from, which shrinks the
/// residual variance by `(W - 1)/W`; residuals are scaled by `sqrt(W/(W - 1))` to undo it.
pub fn read_noise_residuals(frames: &[DebiasedFrame], row_means: &[f64], k: usize, rng: &mut RandomSource) -> Vec<f64> {
    let per_frame = frames.first().map_or(0, |f| f.data.len());
    let total = per_frame * frames.len();
    let width = frames.first().map_or(1, |f| f.width);
    let mut row_base = Vec::with_capacity(frames.len());
    let mut acc = 0;
    for f in frames {
        row_base.push(acc);
        acc += f.height;
    }
    let w = width as f64;
    let restore = if width > 1 { sqrt(w / (w - 1.0)) } else { 1.0 };
    subsample_indices(total, k, rng)
        .into_iter()
        .map(|i| {
            let (fi, pi) = (i / per_frame, i % per_frame);
            (frames[fi].data[pi] - row_means[row_base[fi] + pi / width]) * restore
        })
        .collect()
}

/// One point of the read-noise probability plot.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbPlotPoint {
    pub probability: f64,
    pub tl_quantile: f64,
    pub gaussian_quantile: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReadNoise {
    pub lambda: f64,
    pub sigma_tl: f64,
    pub location: f64,
    pub ppcc: PpccResult,
    pub tl_fit: LinearFit,
    pub gaussian_fit: LinearFit,
    pub plot: Vec<ProbPlotPoint>,
}

pub fn estimate_read_noise(residuals: &[f64], lambda_grid: &[f64], plot_points: usize) -> Result<ReadNoise> {
    let ppcc = ppcc_scan(residuals, lambda_grid)?;
    let lambda = ppcc.best_lambda;
    let tl_fit = probability_plot_fit(residuals, lambda)?;
    let gaussian_fit = gaussian_probability_plot_fit(residuals)?;

    let mut sorted = residuals.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let m = filliben_medians(sorted.len())?;
    let step = sorted.len().div_ceil(plot_points.max(1)).max(1);
    let mut plot: Vec<ProbPlotPoint> = (0..sorted.len())
        .step_by(step)
        .map(|i| ProbPlotPoint {
            probability: m[i],
            tl_quantile: tl_quantile_unchecked(m[i], lambda),
            gaussian_quantile: normal_quantile_unchecked(m[i]),
            value: sorted[i],
        })
        .collect();
    // keep the far tail, where the two families differ most
    let last = sorted.len() - 1;
    if plot.last().map(|p| p.value) != Some(sorted[last]) {
        plot.push(ProbPlotPoint {
            probability: m[last],
            tl_quantile: tl_quantile_unchecked(m[last], lambda),
            gaussian_quantile: normal_quantile_unchecked(m[last]),
            value: sorted[last],
        });
    }
    Ok(ReadNoise { lambda, sigma_tl: tl_fit.slope, location: tl_fit.intercept, ppcc, tl_fit, gaussian_fit, plot })
}

/// Every diagnostic produced by one calibration run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub photon_transfer: LinearFit,
    pub ptc_points: Vec<PtcPoint>,
    pub flat_levels: usize,
    pub color_bias_samples: Vec<[f64; 4]>,
    pub row_normality: NormalityTest,
    pub row_sigma: f64,
    pub row_sigma_uncorrected: f64,
    pub row_means: Vec<f64>,
    pub ppcc: PpccResult,
    pub read_fit_tl: LinearFit,
    pub read_fit_gaussian: LinearFit,
    pub probability_plot: Vec<ProbPlotPoint>,
    pub banding_spectrum_path: Option<String>,
    pub warnings: Vec<CalibrationWarning>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Calibration {
    pub params: NoiseParams,
    pub report: FitReport,
}

/// Runs all four stages on one ISO's frames.
pub fn calibrate_iso(dataset: &CalibrationDataset, options: &CalibrationOptions, rng: &RandomSource) -> Result<Calibration> {
    dataset.validate().map_err(|e| e.at(Stage::Dataset))?;

    let gain = estimate_gain(&dataset.flat_fields, options).map_err(|e| e.at(Stage::EstimateGain))?;
    if gain.k <= 0.0 {
        return Err(Error::Degenerate("photon transfer slope is zero").at(Stage::EstimateGain));
    }

    let bias = estimate_color_bias(&dataset.bias_frames).map_err(|e| e.at(Stage::EstimateColorBias))?;
    let mut warnings = gain.warnings.clone();
    if dataset.bias_frames.len() < RECOMMENDED_BIAS_FRAMES {
        warnings.push(CalibrationWarning::FewBiasFrames { count: dataset.bias_frames.len() });
    }

    let debiased: Vec<DebiasedFrame> = par::map_range(dataset.bias_frames.len(), |i| DebiasedFrame {
        mean_constraints: 2,
        ..DebiasedFrame::new(&dataset.bias_frames[i], &bias.samples[i])
    });
    let row = estimate_row_noise(&debiased, options.row_test_max, &mut rng.derive(1))
        .map_err(|e| e.at(Stage::EstimateRowNoise))?;

    let residuals = read_noise_residuals(&debiased, &row.row_means, options.read_noise_subsample, &mut rng.derive(2));
    let read = estimate_read_noise(&residuals, &options.lambda_grid, options.plot_points)
        .map_err(|e| e.at(Stage::EstimateReadNoise))?;

    let params = NoiseParams {
        system_gain_k: gain.k,
        lambda_shape: read.lambda,
        color_bias_mu: bias.mu_c,
        read_scale_sigma_tl: read.sigma_tl,
        row_scale_sigma_r: row.sigma_r,
        quant_step_q: 1.0,
    };
    let report = FitReport {
        photon_transfer: gain.fit,
        ptc_points: gain.points,
        flat_levels: gain.levels,
        color_bias_samples: bias.samples,
        row_normality: row.test,
        row_sigma: row.sigma_r,
        row_sigma_uncorrected: row.sigma_uncorrected,
        row_means: row.row_means,
        ppcc: read.ppcc,
        read_fit_tl: read.tl_fit,
        read_fit_gaussian: read.gaussian_fit,
        probability_plot: read.plot,
        banding_spectrum_path: None,
        warnings,
    };
    Ok(Calibration { params, report })
}
