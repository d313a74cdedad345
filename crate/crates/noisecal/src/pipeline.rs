//! Multi-ISO calibration and the simulate-calibrate-compare self test.

use std::path::Path;

use noisecal_core::calibrate::{calibrate_iso, CalibrationDataset, CalibrationOptions};
use noisecal_core::{CameraProfile, NoiseParams, RandomSource, SensorMeta};
use serde::Serialize;

use crate::banding::{banding_spectrum, MIN_SIDE};
use crate::error::{Error, Result};
use crate::report::{write_report, BandingSummary};
use crate::simulate::SimulationSpec;

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationRun {
    pub profile: CameraProfile,
    pub warnings: Vec<String>,
}

fn shared_sensor(datasets: &[(u32, CalibrationDataset)]) -> Option<SensorMeta> {
    let mut metas = datasets.iter().filter_map(|(_, d)| d.flat_fields.iter().chain(&d.bias_frames).next()).map(|f| *f.meta());
    let first = metas.next()?;
    metas.all(|m| m == first).then_some(first)
}

/// Calibrates every ISO, writes per-ISO reports under `report_dir` (as `iso_<N>/`),
/// and fits the joint model when at least three ISOs are present.
pub fn calibrate_datasets(
    datasets: &[(u32, CalibrationDataset)],
    options: &CalibrationOptions,
    seed: u64,
    report_dir: Option<&Path>,
    camera_name: &str,
) -> Result<CalibrationRun> {
    if datasets.is_empty() {
        return Err(Error::Dataset("no ISO datasets found".into()));
    }
    let root = RandomSource::new(seed);
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    let mut reports = Vec::new();
    for (iso, ds) in datasets {
        let at_iso = |e: Error| Error::InFile { path: format!("ISO {iso}").into(), source: Box::new(e) };
        let cal = calibrate_iso(ds, options, &root.derive(u64::from(*iso))).map_err(|e| at_iso(e.into()))?;
        for w in &cal.report.warnings {
            warnings.push(format!("ISO {iso}: {w:?}"));
        }
        if let Some(dir) = report_dir {
            let sub = format!("iso_{iso}");
            let iso_dir = dir.join(&sub);
            std::fs::create_dir_all(&iso_dir).map_err(|e| Error::io(&iso_dir, e))?;
            let mut report = cal.report.clone();
            let banding = match ds.bias_frames.first() {
                Some(f) if f.width() >= MIN_SIDE && f.height() >= MIN_SIDE => {
                    let s = banding_spectrum(f)?;
                    s.write_pgm(&iso_dir.join("banding.pgm"))?;
                    report.banding_spectrum_path = Some(format!("{sub}/banding.pgm"));
                    Some(BandingSummary {
                        path: format!("{sub}/banding.pgm"),
                        vertical_ratio: s.vertical_ratio,
                        horizontal_ratio: s.horizontal_ratio,
                    })
                }
                _ => None,
            };
            write_report(&iso_dir, Some(*iso), &cal.params, &report, banding)?;
            reports.push(Some(format!("{sub}/summary.json")));
        } else {
            reports.push(None);
        }
        records.push((*iso, cal.params));
    }

    let mut profile = CameraProfile::from_records(camera_name, &records)?;
    profile.sensor = shared_sensor(datasets);
    let mut order: Vec<(u32, Option<String>)> = datasets.iter().map(|(i, _)| *i).zip(reports).collect();
    order.sort_by_key(|(i, _)| *i);
    for (rec, (_, rep)) in profile.per_iso_records.iter_mut().zip(order) {
        rec.report = rep;
    }
    if profile.per_iso_records.len() >= 3 {
        if let Err(e) = profile.refit_joint() {
            warnings.push(format!("joint model not fitted: {e}"));
        }
    } else {
        warnings.push(format!(
            "joint model deferred: {} ISO setting(s) calibrated, at least 3 needed",
            profile.per_iso_records.len()
        ));
    }
    Ok(CalibrationRun { profile, warnings })
}

/// Per-parameter tolerances of the self test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub k_rel: f64,
    pub mu_abs: f64,
    pub sigma_r_rel: f64,
    pub sigma_tl_rel: f64,
    pub lambda_abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { k_rel: 0.02, mu_abs: 0.1, sigma_r_rel: 0.05, sigma_tl_rel: 0.05, lambda_abs: 0.05 }
    }
}

impl Tolerances {
    pub fn scaled(self, f: f64) -> Self {
        Tolerances {
            k_rel: self.k_rel * f,
            mu_abs: self.mu_abs * f,
            sigma_r_rel: self.sigma_r_rel * f,
            sigma_tl_rel: self.sigma_tl_rel * f,
            lambda_abs: self.lambda_abs * f,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub iso: u32,
    pub parameter: String,
    pub truth: f64,
    pub estimate: f64,
    /// Relative for scales and gain, absolute (DN or shape units) otherwise.
    pub error: f64,
    pub relative: bool,
    pub tolerance: f64,
    pub pass: bool,
}

// absorbs representation error of grid values such as 0.1 - 0.05
const SLACK: f64 = 1e-12;

pub fn compare(iso: u32, truth: &NoiseParams, est: &NoiseParams, tol: &Tolerances) -> Vec<Check> {
    let mut out = Vec::new();
    let mut push = |name: String, t: f64, e: f64, relative: bool, tolerance: f64| {
        let error = if relative { (e - t).abs() / t.abs() } else { (e - t).abs() };
        out.push(Check { iso, parameter: name, truth: t, estimate: e, error, relative, tolerance, pass: error <= tolerance + SLACK });
    };
    push("K".into(), truth.system_gain_k, est.system_gain_k, true, tol.k_rel);
    for c in 0..4 {
        push(format!("mu{c}"), truth.color_bias_mu[c], est.color_bias_mu[c], false, tol.mu_abs);
    }
    push("sigma_r".into(), truth.row_scale_sigma_r, est.row_scale_sigma_r, true, tol.sigma_r_rel);
    push("sigma_tl".into(), truth.read_scale_sigma_tl, est.read_scale_sigma_tl, true, tol.sigma_tl_rel);
    push("lambda".into(), truth.lambda_shape, est.lambda_shape, false, tol.lambda_abs);
    out
}

/// Default spec shrunk to 256×256 frames.
pub fn quick_spec() -> SimulationSpec {
    SimulationSpec { width: 256, height: 256, ..SimulationSpec::default() }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelftestOutcome {
    pub tool_version: String,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Simulates `spec`, calibrates it and compares with the truth. With `out`, the dataset,
/// profile, reports and `selftest.json` are written there.
pub fn selftest(spec: &SimulationSpec, seed: u64, tol: Tolerances, out: Option<&Path>) -> Result<SelftestOutcome> {
    spec.validate()?;
    let datasets: Vec<(u32, CalibrationDataset)> = if let Some(dir) = out {
        crate::simulate::simulate_to_dir(spec, seed, &dir.join("data"))?;
        crate::dataset::load_dataset_root(&dir.join("data"))?
    } else {
        let rng = RandomSource::new(seed);
        let mut all = Vec::new();
        for t in &spec.isos {
            all.extend(noisecal_core::vcam::capture_protocol(&spec.camera(t), &[(t.iso, t.truth)], &rng)?);
        }
        all.sort_by_key(|(iso, _)| *iso);
        all
    };
    let report_dir = out.map(|d| d.join("report"));
    let run = calibrate_datasets(&datasets, &CalibrationOptions::default(), seed, report_dir.as_deref(), "selftest")?;
    let mut checks = Vec::new();
    for t in &spec.isos {
        let rec = run.profile.per_iso_records.iter().find(|r| r.iso == t.iso).expect("every ISO calibrated");
        checks.extend(compare(t.iso, &t.truth, &rec.params, &tol));
    }
    let outcome = SelftestOutcome {
        tool_version: crate::VERSION.into(),
        seed,
        tolerances: tol,
        pass: checks.iter().all(|c| c.pass),
        checks,
    };
    if let Some(dir) = out {
        crate::profile_io::save_profile(&run.profile, &dir.join("profile.json"))?;
        crate::error::write_json(&dir.join("selftest.json"), &outcome)?;
    }
    Ok(outcome)
}
