use noisecal_core::fitlab::{least_squares, ppcc_scan, shapiro_wilk};
use noisecal_core::frame::{channel_of, ChannelView, Roi};
use noisecal_core::model::{fit_joint_model, sample_params};
use noisecal_core::statdist::{filliben_medians, poisson_sample, tl_quantile, TukeyLambda};
use noisecal_core::synth::add_noise;
use noisecal_core::{CfaLayout, NoiseParams, RandomSource, RawFrame, SensorMeta};
use proptest::prelude::*;

fn gaussian_like(n: usize, seed: u64) -> Vec<f64> {
    let dist = TukeyLambda::new(0.14, 0.0, 1.0).unwrap();
    let mut rng = RandomSource::new(seed);
    (0..n).map(|_| dist.sample(&mut rng)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tl_quantile_is_increasing_and_antisymmetric(
        lambda in -1.0f64..1.0,
        a in 0.0001f64..0.9999,
        b in 0.0001f64..0.9999,
    ) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi - lo > 1e-9);
        prop_assert!(tl_quantile(lo, lambda).unwrap() < tl_quantile(hi, lambda).unwrap());
        let q = tl_quantile(a, lambda).unwrap();
        let r = tl_quantile(1.0 - a, lambda).unwrap();
        prop_assert!((q + r).abs() <= 1e-9 * (1.0 + q.abs()));
    }

    #[test]
    fn filliben_medians_symmetric_increasing(n in 1usize..400) {
        let m = filliben_medians(n).unwrap();
        prop_assert!(m.windows(2).all(|w| w[0] < w[1]));
        for i in 0..n {
            prop_assert!((m[i] + m[n - 1 - i] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn shapiro_wilk_is_affine_invariant(seed in any::<u64>(), scale in 0.01f64..100.0, shift in -1e3f64..1e3) {
        let x = gaussian_like(200, seed);
        let y: Vec<f64> = x.iter().map(|v| scale * v + shift).collect();
        let a = shapiro_wilk(&x).unwrap();
        let b = shapiro_wilk(&y).unwrap();
        prop_assert!((a.w_statistic - b.w_statistic).abs() < 1e-9);
        prop_assert!((a.p_value - b.p_value).abs() < 1e-6);
        prop_assert!(a.w_statistic > 0.0 && a.w_statistic <= 1.0);
        prop_assert!((0.0..=1.0).contains(&a.p_value));
    }

    #[test]
    fn ppcc_choice_is_affine_invariant(seed in any::<u64>(), scale in 0.1f64..50.0, shift in -100.0f64..100.0) {
        let x = gaussian_like(300, seed);
        let y: Vec<f64> = x.iter().map(|v| scale * v + shift).collect();
        let grid: Vec<f64> = (-20..=40).map(|i| f64::from(i) / 100.0).collect();
        let a = ppcc_scan(&x, &grid).unwrap();
        let b = ppcc_scan(&y, &grid).unwrap();
        prop_assert_eq!(a.best_lambda, b.best_lambda);
        prop_assert!((a.best_ppcc - b.best_ppcc).abs() < 1e-9);
    }

    #[test]
    fn least_squares_recovers_exact_lines(
        slope in -100.0f64..100.0,
        intercept in -100.0f64..100.0,
        xs in prop::collection::vec(-1e3f64..1e3, 3..50),
    ) {
        let spread = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max) - xs.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assume!(spread > 1.0);
        let ys: Vec<f64> = xs.iter().map(|x| slope * x + intercept).collect();
        let f = least_squares(&xs, &ys).unwrap();
        prop_assert!((f.slope - slope).abs() < 1e-8 * (1.0 + slope.abs()));
        prop_assert!((f.intercept - intercept).abs() < 1e-6 * (1.0 + intercept.abs() + slope.abs() * 1e3));
        prop_assert!((0.0..=1.0).contains(&f.r_squared));
    }

    #[test]
    fn derive_ignores_parent_position(seed in any::<u64>(), key in any::<u64>(), skip in 0usize..50) {
        let a = RandomSource::new(seed);
        let mut b = RandomSource::new(seed);
        for _ in 0..skip {
            b.uniform();
        }
        let (mut x, mut y) = (a.derive(key), b.derive(key));
        for _ in 0..8 {
            let u = x.uniform();
            prop_assert_eq!(u, y.uniform());
            prop_assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn poisson_draws_are_non_negative_integers(mean in 0.0f64..1e6, seed in any::<u64>()) {
        let mut rng = RandomSource::new(seed);
        for _ in 0..4 {
            let k = poisson_sample(mean, &mut rng).unwrap();
            if mean == 0.0 {
                prop_assert_eq!(k, 0);
            }
        }
    }

    #[test]
    fn channel_views_partition_frames(w2 in 1usize..12, h2 in 1usize..12, seed in any::<u64>()) {
        let (w, h) = (2 * w2, 2 * h2);
        let mut rng = RandomSource::new(seed);
        let data: Vec<u16> = (0..w * h).map(|_| rng.below(4096) as u16).collect();
        let meta = SensorMeta { cfa: CfaLayout::Gbrg, bit_depth: 12, black_level: [0; 4], white_level: 4095 };
        let f = RawFrame::new(w, h, data.clone(), meta, None).unwrap();
        let mut seen = vec![0u8; w * h];
        let mut total = 0u64;
        for c in 0..4 {
            let view = ChannelView::new(&f, c, Roi::full(&f)).unwrap();
            prop_assert_eq!(view.len(), w * h / 4);
            total += view.iter().map(u64::from).sum::<u64>();
            for y in 0..h {
                for x in 0..w {
                    if channel_of(x, y) == c {
                        seen[y * w + x] += 1;
                    }
                }
            }
        }
        prop_assert!(seen.iter().all(|&s| s == 1));
        prop_assert_eq!(total, data.iter().map(|&v| u64::from(v)).sum::<u64>());
    }

    #[test]
    fn noiseless_synthesis_is_identity(w2 in 1usize..10, h2 in 1usize..10, seed in any::<u64>()) {
        let (w, h) = (2 * w2, 2 * h2);
        let meta = SensorMeta { cfa: CfaLayout::Rggb, bit_depth: 14, black_level: [512, 500, 520, 512], white_level: 16383 };
        let mut rng = RandomSource::new(seed);
        let data: Vec<u16> = (0..w * h).map(|_| 520 + rng.below(15000) as u16).collect();
        let f = RawFrame::new(w, h, data, meta, Some(100)).unwrap();
        let out = add_noise(&f, &NoiseParams::noiseless(), &RandomSource::new(seed ^ 1), true).unwrap();
        prop_assert_eq!(out.frame, f);
    }

    #[test]
    fn sampled_params_stay_in_support(seed in any::<u64>(), k0 in 0.2f64..2.0, ratio in 1.5f64..20.0) {
        let rec = |iso: u32, k: f64, lam: f64, mu: f64| (iso, NoiseParams {
            system_gain_k: k,
            lambda_shape: lam,
            color_bias_mu: [mu, -mu, 0.5 * mu, 0.0],
            read_scale_sigma_tl: 2.0 * k.powf(0.9),
            row_scale_sigma_r: 0.3 * k,
            quant_step_q: 1.0,
        });
        let profile = fit_joint_model("p", &[
            rec(100, k0, -0.02, 0.3),
            rec(200, k0 * ratio.sqrt(), 0.07, -0.8),
            rec(400, k0 * ratio, 0.12, 1.1),
        ]).unwrap();
        let j = profile.joint.as_ref().unwrap();
        let mut rng = RandomSource::new(seed);
        for _ in 0..16 {
            let p = sample_params(&profile, &mut rng).unwrap();
            prop_assert!(p.system_gain_k >= j.k_min * (1.0 - 1e-12) && p.system_gain_k <= j.k_max * (1.0 + 1e-12));
            let i = j.lambda_pool.iter().position(|&l| l == p.lambda_shape);
            prop_assert!(i.is_some());
            prop_assert!(j.mu_pool.contains(&p.color_bias_mu));
            prop_assert!(p.read_scale_sigma_tl > 0.0 && p.row_scale_sigma_r > 0.0);
            prop_assert_eq!(p.quant_step_q, 1.0);
        }
    }
}
