//! Estimation and hypothesis-testing primitives.

use alloc::vec::Vec;

use libm::{exp, log, sqrt};
use serde::{Deserialize, Serialize};

use crate::statdist::{filliben_medians, normal_quantile_unchecked, normal_sf, tl_quantile_from_logs};
use crate::{par, Error, Result};

/// Ordinary least-squares line `y = slope * x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Residual standard deviation with an `n - 2` denominator; `None` for two points.
    pub residual_std_unbiased: Option<f64>,
    pub n_points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PpccResult {
    pub best_lambda: f64,
    pub best_ppcc: f64,
    /// `(λ, ppcc)` for every grid point, ascending in λ.
    pub curve: Vec<(f64, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalityTest {
    pub w_statistic: f64,
    pub p_value: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::Domain("xs and ys differ in length"));
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::Domain("least squares needs at least two points"));
    }
    let mx = mean(xs);
    let my = mean(ys);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 || !sxx.is_finite() {
        return Err(Error::Degenerate("xs have zero variance"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    // flat data fits its own mean perfectly
    let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    let residual_std_unbiased = (n > 2).then(|| sqrt(ss_res / (n - 2) as f64));
    Ok(LinearFit { slope, intercept, r_squared, residual_std_unbiased, n_points: n })
}

/// Pearson correlation, two-pass.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Domain("correlation needs two equal-length sequences of length >= 2"));
    }
    let mx = mean(xs);
    let my = mean(ys);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("zero variance in correlation"));
    }
    Ok(sxy / sqrt(sxx * syy))
}

fn sorted(data: &[f64]) -> Result<Vec<f64>> {
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("data contains non-finite values"));
    }
    let mut v = data.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    Ok(v)
}

/// The `[-1, 1]` grid with step 0.01, built from integers so 0.14 and friends are exact decimals.
pub fn default_lambda_grid() -> Vec<f64> {
    (-100..=100).map(|i| i as f64 / 100.0).collect()
}

/// Tukey lambda probability-plot correlation for every `λ` in `lambda_grid`.
pub fn ppcc_scan(data: &[f64], lambda_grid: &[f64]) -> Result<PpccResult> {
    if data.len() < 10 {
        return Err(Error::SampleSize { n: data.len(), min: 10, max: usize::MAX });
    }
    if lambda_grid.is_empty() || lambda_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("lambda grid must be nonempty and strictly ascending"));
    }
    let y = sorted(data)?;
    let my = mean(&y);
    let yc: Vec<f64> = y.iter().map(|v| v - my).collect();
    let syy: f64 = yc.iter().map(|v| v * v).sum();
    if syy == 0.0 {
        return Err(Error::Degenerate("data has zero variance"));
    }
    let m = filliben_medians(y.len())?;
    let logs: Vec<(f64, f64)> = m.iter().map(|&p| (log(p), libm::log1p(-p))).collect();

    let ppcc: Vec<f64> = par::map_range(lambda_grid.len(), |i| {
        let lam = lambda_grid[i];
        let x: Vec<f64> = logs.iter().map(|&(lp, lq)| tl_quantile_from_logs(lp, lq, lam)).collect();
        let mx = mean(&x);
        let (mut sxx, mut sxy) = (0.0, 0.0);
        for (xi, yi) in x.iter().zip(&yc) {
            let d = xi - mx;
            sxx += d * d;
            sxy += d * yi;
        }
        sxy / sqrt(sxx * syy)
    });

    let mut best = 0;
    for (i, &r) in ppcc.iter().enumerate() {
        if r > ppcc[best] {
            best = i;
        }
    }
    Ok(PpccResult {
        best_lambda: lambda_grid[best],
        best_ppcc: ppcc[best],
        curve: lambda_grid.iter().copied().zip(ppcc).collect(),
    })
}

/// Sorted data regressed on theoretical quantiles at the Filliben positions.
fn probability_plot(data: &[f64], quantile: impl Fn(f64) -> f64) -> Result<LinearFit> {
    if data.len() < 3 {
        return Err(Error::SampleSize { n: data.len(), min: 3, max: usize::MAX });
    }
    let y = sorted(data)?;
    let x: Vec<f64> = filliben_medians(y.len())?.into_iter().map(quantile).collect();
    least_squares(&x, &y)
}

/// Tukey lambda probability plot: slope estimates the scale, intercept the location.
pub fn probability_plot_fit(data: &[f64], lambda_shape: f64) -> Result<LinearFit> {
    if !lambda_shape.is_finite() {
        return Err(Error::Domain("lambda must be finite"));
    }
    probability_plot(data, |p| tl_quantile_from_logs(log(p), libm::log1p(-p), lambda_shape))
}

/// Normal probability plot.
pub fn gaussian_probability_plot_fit(data: &[f64]) -> Result<LinearFit> {
    probability_plot(data, normal_quantile_unchecked)
}

/// Maximum-likelihood scale of a zero-mean Gaussian: the root mean square.
pub fn gaussian_mle_zero_mean(data: &[f64]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Domain("empty data"));
    }
    Ok(sqrt(data.iter().map(|v| v * v).sum::<f64>() / data.len() as f64))
}

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

/// Shapiro-Wilk W test with Royston's approximations (AS R94) for the coefficients
/// and the p-value. Supports `3 <= n <= 5000`.
pub fn shapiro_wilk(data: &[f64]) -> Result<NormalityTest> {
    const C1: [f64; 6] = [0.0, 0.221_157, -0.147_981, -2.071_19, 4.434_685, -2.706_056];
    const C2: [f64; 6] = [0.0, 0.042_981, -0.293_762, -1.752_461, 5.682_633, -3.582_633];
    const C3: [f64; 4] = [0.544, -0.399_78, 0.025_054, -6.714e-4];
    const C4: [f64; 4] = [1.3822, -0.778_57, 0.062_767, -0.002_032_2];
    const C5: [f64; 4] = [-1.5861, -0.310_82, -0.083_751, 0.003_891_5];
    const C6: [f64; 3] = [-0.4803, -0.082_676, 0.003_030_2];
    const G: [f64; 2] = [-2.273, 0.459];

    let n = data.len();
    if !(3..=5000).contains(&n) {
        return Err(Error::SampleSize { n, min: 3, max: 5000 });
    }
    let x = sorted(data)?;
    let range = x[n - 1] - x[0];
    if range < 1e-19 * x[n - 1].abs().max(1.0) {
        return Err(Error::Degenerate("data has zero range"));
    }

    let half = n / 2;
    let mut a = alloc::vec![0.0; half];
    if n == 3 {
        a[0] = core::f64::consts::FRAC_1_SQRT_2;
    } else {
        let an25 = n as f64 + 0.25;
        let m: Vec<f64> = (0..half).map(|i| normal_quantile_unchecked((i as f64 + 1.0 - 0.375) / an25)).collect();
        let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
        let ssumm2 = sqrt(summ2);
        let rsn = 1.0 / sqrt(n as f64);
        let a1 = poly(&C1, rsn) - m[0] / ssumm2;
        let (first, fac) = if n > 5 {
            let a2 = -m[1] / ssumm2 + poly(&C2, rsn);
            let fac = sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
            a[1] = a2;
            (2, fac)
        } else {
            (1, sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1)))
        };
        a[0] = a1;
        for i in first..half {
            a[i] = -m[i] / fac;
        }
    }

    // Antisymmetric coefficient vector: -a on the lower half, +a mirrored on the upper.
    let mx = mean(&x);
    let mut num = 0.0;
    let mut ssx = 0.0;
    for (i, &xi) in x.iter().enumerate() {
        let d = (xi - mx) / range;
        ssx += d * d;
        if i < half {
            num -= a[i] * d;
        } else if n - 1 - i < half {
            num += a[n - 1 - i] * d;
        }
    }
    let ssa = 2.0 * a.iter().map(|v| v * v).sum::<f64>();
    let w = (num * num / (ssa * ssx)).min(1.0);

    if n == 3 {
        let w = w.max(0.75);
        let pi6 = 6.0 / core::f64::consts::PI;
        let p = pi6 * (libm::asin(sqrt(w)) - core::f64::consts::FRAC_PI_3);
        return Ok(NormalityTest { w_statistic: w, p_value: p.clamp(0.0, 1.0) });
    }

    let w1 = 1.0 - w;
    let nf = n as f64;
    let mut y = log(w1);
    let (m, s) = if n <= 11 {
        let gamma = poly(&G, nf);
        if y >= gamma {
            return Ok(NormalityTest { w_statistic: w, p_value: 1e-99 });
        }
        y = -log(gamma - y);
        (poly(&C3, nf), exp(poly(&C4, nf)))
    } else {
        let ln_n = log(nf);
        (poly(&C5, ln_n), exp(poly(&C6, ln_n)))
    };
    Ok(NormalityTest { w_statistic: w, p_value: normal_sf((y - m) / s) })
}
