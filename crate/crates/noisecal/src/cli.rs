//! The `noisecal` command line.
//!
//! Exit codes: 0 success, 1 self-test tolerance breach, 2 parse or usage error,
//! 3 I/O error, 4 calibration or model-fitting failure, 5 profile/frame incompatibility.
//!
//! `--config FILE` reads a JSON object whose keys mirror the long flags (`ratio_range` or
//! `ratio-range`). A key nested under the subcommand name applies to that subcommand only.
//! Flags given on the command line win. `NOISECAL_SEED` sets the seed when `--seed` is absent.

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use noisecal_core::calibrate::CalibrationOptions;
use noisecal_core::model::{fit_joint_model, params_at_iso, sample_params};
use noisecal_core::synth::{synthesize_lowlight, ParamSource, SynthesisConfig};
use noisecal_core::{CameraProfile, NoiseParams, RandomSource};
use rayon::prelude::*;

use crate::dataset::{frame_files, load_dataset_root, load_frame};
use crate::error::{write_bytes, write_json, Error};
use crate::pipeline::{calibrate_datasets, quick_spec, selftest, Tolerances};
use crate::profile_io::{load_profile, save_profile};
use crate::provenance::{provenance_path, Provenance};
use crate::simulate::{simulate_to_dir, SimulationSpec};
use crate::{eldr, VERSION};

pub const SEED_ENV: &str = "NOISECAL_SEED";
pub const DEFAULT_SEED: u64 = 20240229;

pub mod exit {
    pub const OK: u8 = 0;
    pub const TOLERANCE: u8 = 1;
    pub const PARSE: u8 = 2;
    pub const IO: u8 = 3;
    pub const CALIBRATION: u8 = 4;
    pub const COMPATIBILITY: u8 = 5;
}

#[derive(Debug, Parser)]
#[command(name = "noisecal", version, about = "Calibrate and synthesize CMOS raw sensor noise")]
pub struct Cli {
    /// Worker threads; results do not depend on this
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// JSON file supplying flags not given on the command line
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a virtual-camera calibration dataset
    Simulate(SimulateArgs),
    /// Estimate per-ISO noise parameters from flat-field and bias frames
    Calibrate(CalibrateArgs),
    /// Merge profiles and fit the joint model across ISO settings
    FitJoint(FitJointArgs),
    /// Draw parameter sets from a profile's joint model
    Sample(SampleArgs),
    /// Turn clean raw frames into low-light noisy frames
    Synthesize(SynthesizeArgs),
    /// Print a profile summary
    Report(ReportArgs),
    /// Simulate, calibrate and compare with the ground truth
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Simulation spec (JSON); defaults are used for missing fields or without a file
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Dataset directory (iso_<N>/flat_*, iso_<N>/bias_*)
    #[arg(long)]
    pub data: PathBuf,
    /// Output profile JSON
    #[arg(long)]
    pub out: PathBuf,
    /// Directory for per-ISO report artifacts
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, default_value = "camera")]
    pub camera_name: String,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Residual pixels kept for the read-noise fit
    #[arg(long)]
    pub read_noise_subsample: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FitJointArgs {
    /// Input profiles; their per-ISO records are merged
    #[arg(long, required = true, num_args = 1..)]
    pub profile: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Defaults to the first profile's name
    #[arg(long)]
    pub camera_name: Option<String>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub profile: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// CSV output; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    /// Directory of clean .eldr / .pgm frames
    #[arg(long)]
    pub clean: PathBuf,
    #[arg(long)]
    pub profile: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Fixed low-light factor
    #[arg(long, conflicts_with = "ratio_range")]
    pub ratio: Option<f64>,
    /// Draw the factor uniformly from [LOW, HIGH] (default 100 300)
    #[arg(long, num_args = 2, value_names = ["LOW", "HIGH"])]
    pub ratio_range: Option<Vec<f64>>,
    /// Use this ISO's calibrated parameters instead of sampling the joint model
    #[arg(long)]
    pub iso: Option<u32>,
    /// Do not clip the dim noisy signal to the sensor range
    #[arg(long)]
    pub no_clip: bool,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub profile: PathBuf,
    /// Also write the per-ISO table as CSV
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// 256×256 frames with doubled tolerances
    #[arg(long)]
    pub quick: bool,
    /// Multiplies every tolerance
    #[arg(long, default_value_t = 1.0)]
    pub tolerance_scale: f64,
    /// Keep the dataset, profile and reports here
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        CliError { code, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::Io { .. } => exit::IO,
        Error::Core(_) => exit::CALIBRATION,
        _ => exit::PARSE,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = exit_code(&e);
        let message = match e.root() {
            Error::Core(c) => match c.stage() {
                Some(stage) => format!("calibration failed in stage {}: {e}", stage.name()),
                None => e.to_string(),
            },
            _ => e.to_string(),
        };
        CliError { code, message }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn flag_present(args: &[OsString], flag: &str) -> bool {
    let eq = format!("{flag}=");
    args.iter().any(|a| a.to_str().is_some_and(|s| s == flag || s.starts_with(&eq)))
}

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

const SUBCOMMANDS: [&str; 7] = ["simulate", "calibrate", "fit-joint", "sample", "synthesize", "report", "selftest"];

fn scalar(v: &serde_json::Value) -> Option<String> {
    match v {
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

/// Appends flags from the `--config` file that are not already on the command line.
pub fn expand_config(args: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let value: serde_json::Value = crate::error::read_json(&path).map_err(CliError::from)?;
    let serde_json::Value::Object(top) = value else {
        return Err(CliError::new(exit::PARSE, format!("{}: config must be a JSON object", path.display())));
    };
    let sub = args.iter().skip(1).find_map(|a| SUBCOMMANDS.iter().find(|s| a.to_str() == Some(**s)).copied());

    let mut entries: Vec<(String, serde_json::Value)> = Vec::new();
    if let Some(serde_json::Value::Object(section)) = sub.and_then(|s| top.get(s)) {
        entries.extend(section.iter().map(|(k, v)| (k.clone(), v.clone())));
    }
    entries.extend(top.iter().filter(|(k, _)| !SUBCOMMANDS.contains(&k.as_str())).map(|(k, v)| (k.clone(), v.clone())));

    let mut out = args;
    for (key, v) in entries {
        let flag = format!("--{}", key.replace('_', "-"));
        if flag == "--config" || flag_present(&out, &flag) {
            continue;
        }
        let bad = || CliError::new(exit::PARSE, format!("{}: unsupported value for `{key}`", path.display()));
        match &v {
            serde_json::Value::Bool(true) => out.push(flag.into()),
            serde_json::Value::Bool(false) | serde_json::Value::Null => {}
            serde_json::Value::Array(items) => {
                out.push(flag.into());
                for item in items {
                    out.push(scalar(item).ok_or_else(bad)?.into());
                }
            }
            other => {
                out.push(flag.into());
                out.push(scalar(other).ok_or_else(bad)?.into());
            }
        }
    }
    Ok(out)
}

/// Flag, then `NOISECAL_SEED`, then the built-in default. Echoed to stderr.
pub fn resolve_seed(flag: Option<u64>) -> CliResult<u64> {
    let (seed, source) = match flag {
        Some(s) => (s, "--seed"),
        None => match std::env::var(SEED_ENV) {
            Ok(v) => {
                let s = v
                    .trim()
                    .parse()
                    .map_err(|_| CliError::new(exit::PARSE, format!("{SEED_ENV}={v:?} is not an unsigned integer")))?;
                (s, SEED_ENV)
            }
            Err(_) => (DEFAULT_SEED, "default"),
        },
    };
    eprintln!("seed: {seed} ({source})");
    Ok(seed)
}

/// Parses arguments, runs the subcommand and returns the process exit code.
pub fn run<I: IntoIterator<Item = OsString>>(args: I) -> u8 {
    let args = match expand_config(args.into_iter().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.code;
        }
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::PARSE } else { exit::OK };
        }
    };
    eprintln!("noisecal {VERSION}");
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return exit::PARSE;
        }
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return exit::IO;
        }
    };
    match pool.install(|| execute(cli.command)) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

pub fn execute(command: Command) -> CliResult {
    match command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Calibrate(a) => cmd_calibrate(a),
        Command::FitJoint(a) => cmd_fit_joint(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Synthesize(a) => cmd_synthesize(a),
        Command::Report(a) => cmd_report(a),
        Command::Selftest(a) => cmd_selftest(a),
    }
}

fn load_spec(path: Option<&Path>) -> CliResult<SimulationSpec> {
    let spec: SimulationSpec = match path {
        Some(p) => crate::error::read_json(p)?,
        None => SimulationSpec::default(),
    };
    spec.validate().map_err(|e| CliError::new(exit::PARSE, format!("invalid simulation spec: {e}")))?;
    Ok(spec)
}

fn cmd_simulate(a: SimulateArgs) -> CliResult {
    let seed = resolve_seed(a.seed)?;
    let spec = load_spec(a.spec.as_deref())?;
    let t = Instant::now();
    let m = simulate_to_dir(&spec, seed, &a.out)?;
    eprintln!("wrote {} files to {} in {:.1?}", m.files.len() + 1, a.out.display(), t.elapsed());
    Ok(())
}

fn cmd_calibrate(a: CalibrateArgs) -> CliResult {
    let seed = resolve_seed(a.seed)?;
    let mut options = CalibrationOptions::default();
    if let Some(n) = a.read_noise_subsample {
        if n < 10 {
            return Err(CliError::new(exit::PARSE, "--read-noise-subsample must be at least 10"));
        }
        options.read_noise_subsample = n;
    }
    let datasets = load_dataset_root(&a.data)?;
    let t = Instant::now();
    let run = calibrate_datasets(&datasets, &options, seed, a.report.as_deref(), &a.camera_name)?;
    for w in &run.warnings {
        eprintln!("warning: {w}");
    }
    save_profile(&run.profile, &a.out)?;
    for r in &run.profile.per_iso_records {
        println!("{}", format_record(r.iso, &r.params));
    }
    eprintln!("calibrated {} ISO setting(s) in {:.1?}", datasets.len(), t.elapsed());
    Ok(())
}

fn cmd_fit_joint(a: FitJointArgs) -> CliResult {
    let profiles: Vec<CameraProfile> = a.profile.iter().map(|p| load_profile(p)).collect::<Result<_, _>>()?;
    let records: Vec<(u32, NoiseParams)> =
        profiles.iter().flat_map(|p| p.per_iso_records.iter().map(|r| (r.iso, r.params))).collect();
    let name = a.camera_name.unwrap_or_else(|| profiles[0].camera_name.clone());
    let mut profile = fit_joint_model(&name, &records).map_err(Error::from)?;
    let first = profiles[0].sensor;
    profile.sensor = profiles.iter().all(|p| p.sensor == first).then_some(first).flatten();
    for rec in &mut profile.per_iso_records {
        rec.report = profiles
            .iter()
            .flat_map(|p| &p.per_iso_records)
            .find(|r| r.iso == rec.iso)
            .and_then(|r| r.report.clone());
    }
    save_profile(&profile, &a.out)?;
    if let Some(j) = &profile.joint {
        println!("{}", format_joint(j));
    }
    Ok(())
}

const PARAM_HEADER: &str = "k,lambda,mu0,mu1,mu2,mu3,sigma_tl,sigma_r,q";

fn param_csv(p: &NoiseParams) -> String {
    let m = p.color_bias_mu;
    format!(
        "{},{},{},{},{},{},{},{},{}",
        p.system_gain_k,
        p.lambda_shape,
        m[0],
        m[1],
        m[2],
        m[3],
        p.read_scale_sigma_tl,
        p.row_scale_sigma_r,
        p.quant_step_q
    )
}

fn cmd_sample(a: SampleArgs) -> CliResult {
    let seed = resolve_seed(a.seed)?;
    let profile = load_profile(&a.profile)?;
    if profile.joint.is_none() {
        return Err(CliError::new(exit::COMPATIBILITY, "profile has no joint model (fit-joint needs at least 3 ISOs)"));
    }
    let root = RandomSource::new(seed);
    let draws: Vec<NoiseParams> = (0..a.count)
        .into_par_iter()
        .map(|i| sample_params(&profile, &mut root.derive(i as u64)))
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::from(Error::from(e)))?;
    let mut csv = format!("index,{PARAM_HEADER}\n");
    for (i, p) in draws.iter().enumerate() {
        csv.push_str(&format!("{i},{}\n", param_csv(p)));
    }
    match &a.out {
        Some(path) => write_bytes(path, csv.as_bytes())?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_synthesize(a: SynthesizeArgs) -> CliResult {
    let seed = resolve_seed(a.seed)?;
    let profile = load_profile(&a.profile)?;
    let fixed = match a.iso {
        Some(iso) => Some(params_at_iso(&profile, iso).map_err(|e| CliError::new(exit::COMPATIBILITY, e.to_string()))?),
        None if profile.joint.is_some() => None,
        None => {
            return Err(CliError::new(
                exit::COMPATIBILITY,
                "profile has no joint model to sample from; pass --iso to use one calibrated setting",
            ))
        }
    };
    let mut config = SynthesisConfig { fixed_ratio: a.ratio, clip_output: !a.no_clip, ..Default::default() };
    if let Some(r) = &a.ratio_range {
        config.ratio_range = (r[0], r[1]);
    }
    config.validate().map_err(|e| CliError::new(exit::PARSE, e.to_string()))?;

    let files = frame_files(&a.clean, None)?;
    if files.is_empty() {
        return Err(CliError::new(exit::PARSE, format!("{}: no .eldr or .pgm frames", a.clean.display())));
    }
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;

    let root = RandomSource::new(seed);
    let results: Vec<CliResult> = files
        .par_iter()
        .enumerate()
        .map(|(i, path)| {
            let frame = load_frame(path)?;
            if let Some(s) = &profile.sensor {
                let m = frame.meta();
                if m.cfa != s.cfa || m.bit_depth != s.bit_depth {
                    return Err(CliError::new(
                        exit::COMPATIBILITY,
                        format!(
                            "{}: frame is {} {}-bit but the profile is {} {}-bit",
                            path.display(),
                            m.cfa.name(),
                            m.bit_depth,
                            s.cfa.name(),
                            s.bit_depth
                        ),
                    ));
                }
            }
            let source = match fixed {
                Some(p) => ParamSource::Fixed(p),
                None => ParamSource::Sample(&profile),
            };
            let sample = synthesize_lowlight(&frame, source, &config, &root.derive(i as u64))
                .map_err(|e| CliError::new(exit::CALIBRATION, format!("{}: {e}", path.display())))?;
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("frame");
            let target = a.out.join(format!("{stem}.eldr"));
            eldr::write_frame(&sample.noisy, &target)?;
            let prov = Provenance {
                tool_version: VERSION.into(),
                seed,
                stream: i as u64,
                source: path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
                camera_name: profile.camera_name.clone(),
                iso: a.iso,
                ratio: sample.ratio,
                clip: config.clip_output,
                params: sample.params,
            };
            write_json(&provenance_path(&target), &prov)?;
            Ok(())
        })
        .collect();
    results.into_iter().collect::<CliResult>()?;
    if profile.sensor.is_none() {
        eprintln!("warning: profile records no sensor metadata; CFA and bit depth were not checked");
    }
    eprintln!("synthesized {} frame(s) into {}", files.len(), a.out.display());
    Ok(())
}

fn format_record(iso: u32, p: &NoiseParams) -> String {
    let m = p.color_bias_mu;
    format!(
        "ISO {iso:>6}  K {:.4}  lambda {:.2}  mu [{:.3}, {:.3}, {:.3}, {:.3}]  sigma_TL {:.4}  sigma_r {:.4}  q {}",
        p.system_gain_k,
        p.lambda_shape,
        m[0],
        m[1],
        m[2],
        m[3],
        p.read_scale_sigma_tl,
        p.row_scale_sigma_r,
        p.quant_step_q
    )
}

fn format_joint(j: &noisecal_core::model::JointModel) -> String {
    format!(
        "ln K ~ U[{:.4}, {:.4}]\nln sigma_TL = {:.4} ln K + {:.4}  (sigma_hat {:.4})\nln sigma_r  = {:.4} ln K + {:.4}  (sigma_hat {:.4})\nlambda pool {:?}",
        j.k_min.ln(),
        j.k_max.ln(),
        j.tl_line.slope,
        j.tl_line.intercept,
        j.tl_line.sigma_hat,
        j.row_line.slope,
        j.row_line.intercept,
        j.row_line.sigma_hat,
        j.lambda_pool
    )
}

fn cmd_report(a: ReportArgs) -> CliResult {
    let profile = load_profile(&a.profile)?;
    println!("camera {}", profile.camera_name);
    if let Some(s) = &profile.sensor {
        println!(
            "sensor {} {}-bit black {:?} white {}",
            s.cfa.name(),
            s.bit_depth,
            s.black_level,
            s.white_level
        );
    }
    for r in &profile.per_iso_records {
        println!("{}", format_record(r.iso, &r.params));
    }
    match &profile.joint {
        Some(j) => println!("{}", format_joint(j)),
        None => println!("no joint model"),
    }
    if let Some(path) = &a.csv {
        let mut csv = format!("iso,{PARAM_HEADER}\n");
        for r in &profile.per_iso_records {
            csv.push_str(&format!("{},{}\n", r.iso, param_csv(&r.params)));
        }
        write_bytes(path, csv.as_bytes())?;
    }
    Ok(())
}

fn cmd_selftest(a: SelftestArgs) -> CliResult {
    let seed = resolve_seed(a.seed)?;
    if !(a.tolerance_scale >= 0.0 && a.tolerance_scale.is_finite()) {
        return Err(CliError::new(exit::PARSE, "--tolerance-scale must be a finite non-negative number"));
    }
    let (spec, factor) = if a.quick { (quick_spec(), 2.0) } else { (SimulationSpec::default(), 1.0) };
    let tol = Tolerances::default().scaled(factor * a.tolerance_scale);
    let t = Instant::now();
    let outcome = selftest(&spec, seed, tol, a.out.as_deref())?;
    for c in &outcome.checks {
        let (err, tol) = if c.relative {
            (format!("{:.3}%", 100.0 * c.error), format!("{:.3}%", 100.0 * c.tolerance))
        } else {
            (format!("{:.4}", c.error), format!("{:.4}", c.tolerance))
        };
        println!(
            "ISO {} {:<8} truth {:>9.4} estimate {:>9.4} error {:>9} tolerance {:>9} {}",
            c.iso,
            c.parameter,
            c.truth,
            c.estimate,
            err,
            tol,
            if c.pass { "ok" } else { "FAIL" }
        );
    }
    eprintln!("selftest finished in {:.1?}", t.elapsed());
    if outcome.pass {
        Ok(())
    } else {
        let offenders: Vec<String> =
            outcome.checks.iter().filter(|c| !c.pass).map(|c| format!("ISO {} {}", c.iso, c.parameter)).collect();
        Err(CliError::new(exit::TOLERANCE, format!("tolerance exceeded: {}", offenders.join(", "))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn config_fills_missing_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        std::fs::write(
            &cfg,
            r#"{"seed": 7, "synthesize": {"ratio_range": [100, 300], "no_clip": true, "iso": 800, "quick": false}}"#,
        )
        .unwrap();
        let args = os(&["noisecal", "--config", cfg.to_str().unwrap(), "synthesize", "--seed", "3"]);
        let out = expand_config(args).unwrap();
        let tail: Vec<&str> = out[6..].iter().map(|s| s.to_str().unwrap()).collect();
        assert_eq!(tail, ["--iso", "800", "--no-clip", "--ratio-range", "100", "300"]);
    }

    #[test]
    fn without_config_args_unchanged() {
        let args = os(&["noisecal", "report", "--profile", "p.json"]);
        assert_eq!(expand_config(args.clone()).unwrap(), args);
    }

    #[test]
    fn config_object_required() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        std::fs::write(&cfg, "[1]").unwrap();
        let e = expand_config(os(&["noisecal", "--config", cfg.to_str().unwrap(), "report"])).unwrap_err();
        assert_eq!(e.code, exit::PARSE);
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(os(&["noisecal", "frobnicate"])), exit::PARSE);
        assert_eq!(run(os(&["noisecal", "synthesize", "--ratio", "2", "--ratio-range", "1", "2"])), exit::PARSE);
    }

    #[test]
    fn missing_profile_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("nope.json");
        assert_eq!(run(os(&["noisecal", "report", "--profile", p.to_str().unwrap()])), exit::IO);
    }
}
