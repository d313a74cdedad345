//! Calibration report export: a JSON summary plus CSV tables for external plotting.
//!
//! Files written into the report directory:
//!
//! * `summary.json`: fitted parameters, regression lines, tests and warnings
//! * `ptc.csv`: photon transfer points (`frame,channel,signal,variance`)
//! * `ppcc.csv`: PPCC curve (`lambda,ppcc`)
//! * `probplot.csv`: read-noise probability plot
//! * `row_means_hist.csv`: histogram of row means in 0.5 DN bins
//! * `mu_samples.csv`: per-frame color bias

use std::fmt::Write as _;
use std::path::Path;

use noisecal_core::calibrate::{CalibrationWarning, FitReport};
use noisecal_core::fitlab::{LinearFit, NormalityTest};
use noisecal_core::NoiseParams;
use serde::Serialize;

use crate::error::{write_bytes, write_json, Error, Result};

pub const HISTOGRAM_BIN: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandingSummary {
    pub path: String,
    pub vertical_ratio: f64,
    pub horizontal_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary<'a> {
    pub iso: Option<u32>,
    pub params: &'a NoiseParams,
    pub photon_transfer: &'a LinearFit,
    pub flat_levels: usize,
    pub row_sigma: f64,
    pub row_sigma_uncorrected: f64,
    pub row_normality: &'a NormalityTest,
    pub ppcc_best_lambda: f64,
    pub ppcc_best: f64,
    pub read_fit_tl: &'a LinearFit,
    pub read_fit_gaussian: &'a LinearFit,
    pub banding: Option<BandingSummary>,
    pub warnings: &'a [CalibrationWarning],
}

fn csv(header: &str, rows: impl Iterator<Item = String>) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    s
}

/// `(low edge, count)` for 0.5 DN bins aligned to multiples of the bin width.
pub fn histogram(values: &[f64], bin: f64) -> Vec<(f64, usize)> {
    let finite = values.iter().copied().filter(|v| v.is_finite());
    let Some((lo, hi)) = finite.clone().fold(None, |acc: Option<(f64, f64)>, v| {
        Some(acc.map_or((v, v), |(a, b)| (a.min(v), b.max(v))))
    }) else {
        return Vec::new();
    };
    let first = (lo / bin).floor() as i64;
    let last = (hi / bin).floor() as i64;
    let mut counts = vec![0usize; (last - first + 1) as usize];
    for v in finite {
        counts[((v / bin).floor() as i64 - first) as usize] += 1;
    }
    counts.into_iter().enumerate().map(|(i, c)| ((first + i as i64) as f64 * bin, c)).collect()
}

pub fn write_report(
    dir: &Path,
    iso: Option<u32>,
    params: &NoiseParams,
    report: &FitReport,
    banding: Option<BandingSummary>,
) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let summary = Summary {
        iso,
        params,
        photon_transfer: &report.photon_transfer,
        flat_levels: report.flat_levels,
        row_sigma: report.row_sigma,
        row_sigma_uncorrected: report.row_sigma_uncorrected,
        row_normality: &report.row_normality,
        ppcc_best_lambda: report.ppcc.best_lambda,
        ppcc_best: report.ppcc.best_ppcc,
        read_fit_tl: &report.read_fit_tl,
        read_fit_gaussian: &report.read_fit_gaussian,
        banding,
        warnings: &report.warnings,
    };
    write_json(&dir.join("summary.json"), &summary)?;

    let ptc = csv(
        "frame,channel,signal,variance",
        report.ptc_points.iter().map(|p| format!("{},{},{},{}", p.frame, p.channel, p.signal, p.variance)),
    );
    write_bytes(&dir.join("ptc.csv"), ptc.as_bytes())?;

    let ppcc = csv("lambda,ppcc", report.ppcc.curve.iter().map(|(l, r)| format!("{l},{r}")));
    write_bytes(&dir.join("ppcc.csv"), ppcc.as_bytes())?;

    let plot = csv(
        "probability,tl_quantile,gaussian_quantile,value",
        report
            .probability_plot
            .iter()
            .map(|p| format!("{},{},{},{}", p.probability, p.tl_quantile, p.gaussian_quantile, p.value)),
    );
    write_bytes(&dir.join("probplot.csv"), plot.as_bytes())?;

    let hist = csv(
        "bin_low,bin_high,count",
        histogram(&report.row_means, HISTOGRAM_BIN)
            .into_iter()
            .map(|(lo, c)| format!("{lo},{},{c}", lo + HISTOGRAM_BIN)),
    );
    write_bytes(&dir.join("row_means_hist.csv"), hist.as_bytes())?;

    let mu = csv(
        "frame,mu0,mu1,mu2,mu3",
        report.color_bias_samples.iter().enumerate().map(|(i, m)| {
            let mut s = i.to_string();
            for v in m {
                let _ = write!(s, ",{v}");
            }
            s
        }),
    );
    write_bytes(&dir.join("mu_samples.csv"), mu.as_bytes())
}
