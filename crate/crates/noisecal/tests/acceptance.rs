//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use noisecal::cli::DEFAULT_SEED;
use noisecal::pipeline::{compare, Tolerances};
use noisecal::{eldr, pgm};
use noisecal_core::calibrate::{calibrate_iso, Calibration, CalibrationOptions};
use noisecal_core::fitlab::{default_lambda_grid, least_squares, ppcc_scan, shapiro_wilk};
use noisecal_core::frame::channel_of;
use noisecal_core::model::{fit_joint_model, sample_params};
use noisecal_core::statdist::{gaussian_sample, uniform_sample};
use noisecal_core::synth::{add_noise, noise_field};
use noisecal_core::vcam::{capture_protocol, VirtualCameraSpec};
use noisecal_core::{CfaLayout, NoiseParams, RandomSource, RawFrame, SensorMeta};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn truth() -> NoiseParams {
    VirtualCameraSpec::default().truth
}

fn calibrate_default(truth: NoiseParams) -> Calibration {
    let spec = VirtualCameraSpec { truth, ..Default::default() };
    let (iso, ds) = capture_protocol(&spec, &[(1600, truth)], &RandomSource::new(DEFAULT_SEED)).unwrap().remove(0);
    calibrate_iso(&ds, &CalibrationOptions::default(), &RandomSource::new(DEFAULT_SEED).derive(u64::from(iso))).unwrap()
}

fn round_trip(cal: &mut Option<Calibration>) -> Verdict {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let start = Instant::now();
    let c = pool.install(|| calibrate_default(truth()));
    let secs = start.elapsed().as_secs_f64();
    let checks = compare(1600, &truth(), &c.params, &Tolerances::default());
    let worst: Vec<String> = checks
        .iter()
        .map(|c| format!("{} {:.4}/{}", c.parameter, c.error, c.tolerance))
        .collect();
    let pass = checks.iter().all(|c| c.pass) && secs < 60.0;
    *cal = Some(c);
    verdict(pass, format!("{}; {secs:.1} s single-threaded (< 60)", worst.join(", ")))
}

fn ptc_linearity(cal: &Calibration) -> Verdict {
    let r2 = cal.report.photon_transfer.r_squared;
    verdict(r2 > 0.99, format!("R^2 {r2:.6} (> 0.99)"))
}

fn tl_vs_gaussian(cal: &Calibration) -> Verdict {
    let heavy = cal.report.read_fit_tl.r_squared - cal.report.read_fit_gaussian.r_squared;
    let near = calibrate_default(NoiseParams { lambda_shape: 0.14, ..truth() });
    let close = (near.report.read_fit_tl.r_squared - near.report.read_fit_gaussian.r_squared).abs();
    verdict(
        heavy >= 0.01 && close <= 0.01,
        format!(
            "lambda 0.05: TL {:.5} vs Gaussian {:.5}, gap {heavy:.5} (>= 0.01); lambda 0.14: |gap| {close:.5} (<= 0.01)",
            cal.report.read_fit_tl.r_squared, cal.report.read_fit_gaussian.r_squared
        ),
    )
}

fn sampling_fidelity() -> Verdict {
    let rec = |iso: u32, k: f64, wobble: f64, lam: f64, mu: [f64; 4]| {
        (iso, NoiseParams {
            system_gain_k: k,
            lambda_shape: lam,
            color_bias_mu: mu,
            read_scale_sigma_tl: 5.0 * k.powf(0.8) * wobble,
            row_scale_sigma_r: 0.4 * k.powf(0.95) / wobble,
            quant_step_q: 1.0,
        })
    };
    let profile = fit_joint_model("acceptance", &[
        rec(100, 0.5, 1.04, 0.02, [-1.0, 0.5, 0.5, 1.0]),
        rec(400, 2.0, 0.95, 0.05, [-1.5, 0.8, 0.8, 2.1]),
        rec(1600, 8.0, 1.03, 0.08, [0.2, -0.3, -0.3, 0.1]),
        rec(6400, 32.0, 0.98, 0.11, [2.0, 1.0, 1.0, -2.0]),
    ])
    .unwrap();
    let j = profile.joint.as_ref().unwrap();
    let n = 100_000;
    let mut rng = RandomSource::new(DEFAULT_SEED);
    let samples: Vec<NoiseParams> = (0..n).map(|_| sample_params(&profile, &mut rng).unwrap()).collect();

    let ln_k: Vec<f64> = samples.iter().map(|p| p.system_gain_k.ln()).collect();
    let ln_tl: Vec<f64> = samples.iter().map(|p| p.read_scale_sigma_tl.ln()).collect();
    let fit = least_squares(&ln_k, &ln_tl).unwrap();
    let a_err = (fit.slope / j.tl_line.slope - 1.0).abs();
    let b_err = (fit.intercept / j.tl_line.intercept - 1.0).abs();

    let (lo, hi) = (j.k_min.ln(), j.k_max.ln());
    let mut u: Vec<f64> = ln_k.iter().map(|v| (v - lo) / (hi - lo)).collect();
    u.sort_by(f64::total_cmp);
    let ks = u
        .iter()
        .enumerate()
        .map(|(i, &x)| ((i + 1) as f64 / n as f64 - x).max(x - i as f64 / n as f64))
        .fold(0.0, f64::max);

    let pools = samples
        .iter()
        .all(|p| j.lambda_pool.contains(&p.lambda_shape) && j.mu_pool.contains(&p.color_bias_mu));
    verdict(
        a_err <= 0.01 && b_err <= 0.01 && ks < 0.01 && pools,
        format!("a_TL rel err {a_err:.5}, b_TL rel err {b_err:.5} (<= 0.01); ln K KS {ks:.5} (< 0.01); pools respected: {pools}"),
    )
}

fn moment_law() -> Verdict {
    let t = truth();
    let meta = SensorMeta { cfa: CfaLayout::Rggb, bit_depth: 16, black_level: [512; 4], white_level: 65535 };
    let (w, h) = (512, 512);
    let levels = [250u16, 1000, 2500, 5000, 10000];
    let rng = RandomSource::new(DEFAULT_SEED);
    let mut variances = Vec::new();
    // per channel: sum of level means and of their squared standard errors
    let mut mean_acc = [(0.0, 0.0); 4];
    for (li, &s) in levels.iter().enumerate() {
        let clean = RawFrame::new(w, h, vec![512 + s; w * h], meta, None).unwrap();
        let noisy = add_noise(&clean, &t, &rng.derive(li as u64), true).unwrap().frame;
        let mut var = 0.0;
        for (c, acc) in mean_acc.iter_mut().enumerate() {
            // channel c occupies every other row; its row means carry the row offsets
            let rows: Vec<f64> = (c >> 1..h)
                .step_by(2)
                .map(|y| {
                    let r = noisy.row(y);
                    let v: Vec<f64> = (c & 1..w).step_by(2).map(|x| f64::from(r[x]) - 512.0 - f64::from(s)).collect();
                    v.iter().sum::<f64>() / v.len() as f64
                })
                .collect();
            let m = rows.iter().sum::<f64>() / rows.len() as f64;
            let s2 = rows.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (rows.len() - 1) as f64;
            acc.0 += m;
            acc.1 += s2 / rows.len() as f64;

            let px: Vec<f64> = (0..h)
                .flat_map(|y| (0..w).map(move |x| (x, y)))
                .filter(|&(x, y)| channel_of(x, y) == c)
                .map(|(x, y)| f64::from(noisy.get(x, y)))
                .collect();
            let pm = px.iter().sum::<f64>() / px.len() as f64;
            var += px.iter().map(|v| (v - pm).powi(2)).sum::<f64>() / (px.len() - 1) as f64 / 4.0;
        }
        variances.push(var);
    }
    let signal: Vec<f64> = levels.iter().map(|&s| f64::from(s)).collect();
    let k = least_squares(&signal, &variances).unwrap().slope;
    let k_err = (k / t.system_gain_k - 1.0).abs();

    let l = levels.len() as f64;
    let z: Vec<f64> = (0..4)
        .map(|c| {
            let (sum, se2) = mean_acc[c];
            (sum / l - t.color_bias_mu[c]).abs() / (se2.sqrt() / l)
        })
        .collect();

    // the row field alone: constant along rows, uncorrelated between neighbours
    let row_only = NoiseParams { row_scale_sigma_r: t.row_scale_sigma_r, ..NoiseParams::noiseless() };
    let (fw, fh, frames) = (4, 512, 200);
    let mut constant = true;
    let (mut num, mut den) = (0.0, 0.0);
    for f in 0..frames {
        let field = noise_field(&vec![0.0; fw * fh], fw, fh, &row_only, &rng.derive(1000 + f)).unwrap();
        let rows: Vec<f64> = field.chunks(fw).map(|r| r[0]).collect();
        constant &= field.chunks(fw).all(|r| r.iter().all(|&v| v == r[0]));
        let m = rows.iter().sum::<f64>() / fh as f64;
        num += rows.windows(2).map(|p| (p[0] - m) * (p[1] - m)).sum::<f64>();
        den += rows.iter().map(|v| (v - m).powi(2)).sum::<f64>();
    }
    let rho = num / den;

    let pass = k_err <= 0.03 && z.iter().all(|&z| z < 3.0) && constant && rho.abs() < 0.02;
    verdict(
        pass,
        format!(
            "K {k:.4} rel err {k_err:.4} (<= 0.03); mu |z| [{:.2}, {:.2}, {:.2}, {:.2}] (< 3); row-constant {constant}; lag-1 autocorrelation {rho:.4} over {frames} fields (|.| < 0.02)",
            z[0], z[1], z[2], z[3]
        ),
    )
}

fn test_calibration() -> Verdict {
    let rng = RandomSource::new(DEFAULT_SEED);
    let n = 500;
    let accepted = (0..100)
        .filter(|&i| {
            let mut r = rng.derive(i);
            let x: Vec<f64> = (0..n).map(|_| gaussian_sample(&mut r)).collect();
            shapiro_wilk(&x).unwrap().p_value > 0.05
        })
        .count();
    let rejected = (0..100)
        .filter(|&i| {
            let mut r = rng.derive(1000 + i);
            let x: Vec<f64> = (0..n).map(|_| uniform_sample(0.0, 1.0, &mut r)).collect();
            shapiro_wilk(&x).unwrap().p_value <= 0.05
        })
        .count();
    let mut r = rng.derive(5000);
    let g: Vec<f64> = (0..100_000).map(|_| gaussian_sample(&mut r)).collect();
    let lambda = ppcc_scan(&g, &default_lambda_grid()).unwrap().best_lambda;
    verdict(
        accepted >= 90 && rejected >= 95 && (lambda - 0.14).abs() <= 0.05 + 1e-12,
        format!("Shapiro-Wilk accepts {accepted}/100 Gaussian (>= 90), rejects {rejected}/100 uniform (>= 95), n = {n}; PPCC lambda {lambda:.2} (0.14 +- 0.05)"),
    )
}

fn tree(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push((path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn noisecal(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_noisecal"))
        .args(args)
        .env_remove("NOISECAL_SEED")
        .output()
        .unwrap()
        .status
        .success()
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let clean = dir.path().join("clean");
    fs::create_dir(&clean).unwrap();
    let meta = SensorMeta { cfa: CfaLayout::Rggb, bit_depth: 16, black_level: [512; 4], white_level: 65535 };
    let mut r = RandomSource::new(7);
    let scene: Vec<u16> = (0..256 * 256).map(|_| 512 + r.below(30000) as u16).collect();
    eldr::write_frame(&RawFrame::new(256, 256, scene, meta, Some(1600)).unwrap(), &clean.join("scene.eldr")).unwrap();

    let mut ok = true;
    let mut trees = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("t{threads}"));
        let o = out.to_str().unwrap();
        ok &= noisecal(&["--threads", threads, "selftest", "--out", &format!("{o}/selftest")]);
        ok &= noisecal(&[
            "--threads", threads, "synthesize",
            "--clean", clean.to_str().unwrap(),
            "--profile", &format!("{o}/selftest/profile.json"),
            "--out", &format!("{o}/synth"),
            "--iso", "1600",
        ]);
        trees.push(tree(&out));
    }
    let files = trees[0].len();
    let bytes: usize = trees[0].iter().map(|(_, b)| b.len()).sum();
    let same = trees[0] == trees[1];
    verdict(ok && same && files > 0, format!("selftest + synthesize trees at --threads 1 and 4: {files} files, {bytes} bytes, identical: {same}"))
}

fn random_frame(r: &mut RandomSource) -> RawFrame {
    let bit_depth = [10u8, 12, 14, 16][r.below(4) as usize];
    let max = (1u64 << bit_depth) - 1;
    let white = 1 + r.below(max) as u16;
    let black = [0; 4].map(|_: u16| r.below(u64::from(white)) as u16);
    let meta = SensorMeta { cfa: CfaLayout::from_code(r.below(4) as u8).unwrap(), bit_depth, black_level: black, white_level: white };
    let (w, h) = (2 * (1 + r.below(40) as usize), 2 * (1 + r.below(40) as usize));
    let data = (0..w * h).map(|_| r.below(u64::from(white) + 1) as u16).collect();
    let iso = if r.below(2) == 0 { None } else { Some(1 + r.below(102_400) as u32) };
    RawFrame::new(w, h, data, meta, iso).unwrap()
}

fn format_integrity() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut r = RandomSource::new(DEFAULT_SEED);
    let (mut eldr_ok, mut pgm_ok) = (0, 0);
    for i in 0..1000 {
        let f = random_frame(&mut r);
        let e = dir.path().join(format!("f{i}.eldr"));
        eldr::write_frame(&f, &e).unwrap();
        let back = eldr::read_frame(&e).unwrap();
        eldr_ok += usize::from(back == f && eldr::decode(&eldr::encode(&f)).unwrap() == f);
        let p = dir.path().join(format!("f{i}.pgm"));
        pgm::export_pgm16(&back, &p).unwrap();
        pgm_ok += usize::from(pgm::read_pgm16(&p).unwrap() == back);
    }
    verdict(eldr_ok == 1000 && pgm_ok == 1000, format!("ELDR identity {eldr_ok}/1000; PGM16 equals ELDR {pgm_ok}/1000"))
}

fn main() {
    let mut cal = None;
    let mut results = vec![("round-trip calibration", round_trip(&mut cal))];
    let cal = cal.unwrap();
    results.push(("photon-transfer linearity", ptc_linearity(&cal)));
    results.push(("TL vs Gaussian probability plot", tl_vs_gaussian(&cal)));
    results.push(("joint-model sampling fidelity", sampling_fidelity()));
    results.push(("synthesis moment law", moment_law()));
    results.push(("statistical test calibration", test_calibration()));
    results.push(("determinism across thread counts", determinism()));
    results.push(("format integrity", format_integrity()));

    let mut failed = 0;
    for (i, (name, v)) in results.iter().enumerate() {
        println!("{} {} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, i + 1, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
