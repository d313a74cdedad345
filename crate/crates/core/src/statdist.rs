//! Distribution primitives: Tukey lambda, Poisson, Gaussian and uniform samplers,
//! plus the plotting positions used by probability plots.
//!
//! All samplers draw from an explicit [`RandomSource`].

use alloc::vec::Vec;

use libm::{exp, expm1, floor, log, log1p, lgamma, sqrt, tgamma};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{Error, RandomSource, Result};

/// Below this `|λ|` the Tukey lambda quantile switches to the logistic limit.
pub const LOGISTIC_SWITCH: f64 = 1e-8;

/// Standard (location 0, scale 1) Tukey lambda quantile.
pub fn tl_quantile(p: f64, lambda_shape: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain("probability must lie in (0, 1)"));
    }
    if !lambda_shape.is_finite() {
        return Err(Error::Domain("lambda must be finite"));
    }
    Ok(tl_quantile_unchecked(p, lambda_shape))
}

#[inline]
pub(crate) fn tl_quantile_unchecked(p: f64, lambda_shape: f64) -> f64 {
    tl_quantile_from_logs(log(p), log1p(-p), lambda_shape)
}

/// Quantile from precomputed `ln p` and `ln(1 - p)`.
///
/// `p^λ - (1-p)^λ` is evaluated as a difference of `expm1` terms, which keeps the
/// result accurate as `λ` approaches zero.
#[inline]
pub(crate) fn tl_quantile_from_logs(ln_p: f64, ln_q: f64, lambda_shape: f64) -> f64 {
    if lambda_shape.abs() < LOGISTIC_SWITCH {
        ln_p - ln_q
    } else {
        (expm1(lambda_shape * ln_p) - expm1(lambda_shape * ln_q)) / lambda_shape
    }
}

/// Tukey lambda distribution with location and scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TukeyLambda {
    lambda_shape: f64,
    location: f64,
    scale: f64,
}

impl TukeyLambda {
    pub fn new(lambda_shape: f64, location: f64, scale: f64) -> Result<Self> {
        if !lambda_shape.is_finite() || !location.is_finite() {
            return Err(Error::Domain("lambda and location must be finite"));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Domain("scale must be positive"));
        }
        Ok(TukeyLambda { lambda_shape, location, scale })
    }

    pub fn lambda_shape(&self) -> f64 {
        self.lambda_shape
    }

    pub fn location(&self) -> f64 {
        self.location
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        Ok(self.location + self.scale * tl_quantile(p, self.lambda_shape)?)
    }

    #[inline]
    pub fn sample(&self, rng: &mut RandomSource) -> f64 {
        self.location + self.scale * tl_quantile_unchecked(rng.uniform_open(), self.lambda_shape)
    }

    /// Variance, finite only for `λ > -1/2`.
    pub fn variance(&self) -> f64 {
        let l = self.lambda_shape;
        let standard = if l <= -0.5 {
            f64::INFINITY
        } else if l.abs() < LOGISTIC_SWITCH {
            core::f64::consts::PI * core::f64::consts::PI / 3.0
        } else {
            let g = tgamma(1.0 + l);
            2.0 / (l * l) * (1.0 / (1.0 + 2.0 * l) - g * g / tgamma(2.0 + 2.0 * l))
        };
        standard * self.scale * self.scale
    }
}

/// `n` inverse-transform samples from `dist`.
pub fn tl_sample(dist: &TukeyLambda, n: usize, rng: &mut RandomSource) -> Vec<f64> {
    (0..n).map(|_| dist.sample(rng)).collect()
}

/// Poisson variate with the given mean.
pub fn poisson_sample(mean: f64, rng: &mut RandomSource) -> Result<u64> {
    if !(mean >= 0.0 && mean.is_finite()) {
        return Err(Error::Domain("poisson mean must be finite and non-negative"));
    }
    Ok(poisson_unchecked(mean, rng))
}

pub(crate) fn poisson_unchecked(mean: f64, rng: &mut RandomSource) -> u64 {
    if mean == 0.0 {
        0
    } else if mean < 10.0 {
        poisson_inversion(mean, rng)
    } else {
        poisson_ptrs(mean, rng)
    }
}

fn poisson_inversion(mean: f64, rng: &mut RandomSource) -> u64 {
    let u = rng.uniform();
    let mut p = exp(-mean);
    let mut cdf = p;
    let mut k = 0u64;
    // The tail beyond k = 200 has probability far below 2^-53 for mean < 10.
    while u >= cdf && k < 200 {
        k += 1;
        p *= mean / k as f64;
        cdf += p;
    }
    k
}

/// Hörmann's transformed rejection with squeeze (PTRS), valid for mean >= 10.
fn poisson_ptrs(mean: f64, rng: &mut RandomSource) -> u64 {
    let slam = sqrt(mean);
    let loglam = log(mean);
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.uniform() - 0.5;
        let v = rng.uniform();
        let us = 0.5 - u.abs();
        let k = floor((2.0 * a / us + b) * u + mean + 0.43);
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        if log(v) + log(inv_alpha) - log(a / (us * us) + b) <= -mean + k * loglam - lgamma(k + 1.0) {
            return k as u64;
        }
    }
}

/// Standard normal variate.
#[inline]
pub fn gaussian_sample(rng: &mut RandomSource) -> f64 {
    StandardNormal.sample(rng)
}

/// Uniform variate on `[low, high)`.
#[inline]
pub fn uniform_sample(low: f64, high: f64, rng: &mut RandomSource) -> f64 {
    low + (high - low) * rng.uniform()
}

/// Filliben's estimates of the medians of the uniform order statistics.
pub fn filliben_medians(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Domain("need at least one order statistic"));
    }
    let nf = n as f64;
    let last = libm::pow(0.5, 1.0 / nf);
    let mut m: Vec<f64> = (1..=n).map(|i| (i as f64 - 0.3175) / (nf + 0.365)).collect();
    m[0] = 1.0 - last;
    m[n - 1] = last;
    Ok(m)
}

/// Standard normal quantile (Wichura's AS 241, about 16 significant digits).
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain("probability must lie in (0, 1)"));
    }
    Ok(normal_quantile_unchecked(p))
}

#[allow(clippy::excessive_precision)]
pub(crate) fn normal_quantile_unchecked(p: f64) -> f64 {
    const A: [f64; 8] = [
        3.387_132_872_796_366_608,
        133.141_667_891_784_377_45,
        1_971.590_950_306_551_442_7,
        13_731.693_765_509_461_125,
        45_921.953_931_549_871_457,
        67_265.770_927_008_700_853,
        33_430.575_583_588_128_105,
        2_509.080_928_730_122_672_7,
    ];
    const B: [f64; 8] = [
        1.0,
        42.313_330_701_600_911_252,
        687.187_007_492_057_908_3,
        5_394.196_021_424_751_107_7,
        21_213.794_301_586_595_867,
        39_307.895_800_092_710_61,
        28_729.085_735_721_942_674,
        5_226.495_278_852_854_561,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_577_34,
        4.630_337_846_156_545_295_9,
        5.769_497_221_460_691_405_5,
        3.647_848_324_763_204_605_04,
        1.270_458_252_452_368_382_58,
        0.241_780_725_177_450_611_77,
        0.022_723_844_989_269_184_583_3,
        7.745_450_142_783_414_076_4e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_758_821_87,
        1.676_384_830_183_803_849_4,
        0.689_767_334_985_100_004_55,
        0.148_103_976_427_480_074_59,
        0.015_198_666_563_616_457_196_6,
        5.475_938_084_995_344_946e-4,
        1.050_750_071_644_416_843_24e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103_777_2,
        5.463_784_911_164_114_369_9,
        1.784_826_539_917_291_335_8,
        0.296_560_571_828_504_891_23,
        0.026_532_189_526_576_123_093,
        0.001_242_660_947_388_078_438_6,
        2.711_555_568_743_487_578_15e-5,
        2.010_334_399_292_288_132_65e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        0.599_832_206_555_887_937_69,
        0.136_929_880_922_735_805_31,
        0.014_875_361_290_850_614_852_5,
        7.868_691_311_456_132_591e-4,
        1.846_318_317_510_054_681_8e-5,
        1.421_511_758_316_445_888_7e-7,
        2.044_263_103_389_939_785_64e-15,
    ];
    fn horner(c: &[f64; 8], x: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
    }

    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return q * horner(&A, r) / horner(&B, r);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = sqrt(-log(tail));
    let val = if r <= 5.0 {
        r -= 1.6;
        horner(&C, r) / horner(&D, r)
    } else {
        r -= 5.0;
        horner(&E, r) / horner(&F, r)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// Standard normal upper tail `P(Z > z)`.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / core::f64::consts::SQRT_2)
}
