//! Proportions, power-law fits and ratio bands.

use alloc::vec;
use alloc::vec::Vec;

use crate::rng::CounterRng;
use crate::{Error, Result};

/// Inverse of the standard normal distribution function.
///
/// Rational approximation (relative error about 1e-9) followed by one
/// Halley step against `erfc`, which brings it to full double precision in
/// the central range.
pub fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [7.784_695_709_041_462e-3, 3.224_671_290_700_398e-1, 2.445_134_137_142_996, 3.754_408_661_907_416];
    const P_LOW: f64 = 0.024_25;

    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let mut x = if p < P_LOW {
        tail(libm::sqrt(-2.0 * libm::log(p)))
    } else if p > 1.0 - P_LOW {
        -tail(libm::sqrt(-2.0 * libm::log(1.0 - p)))
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    let e = 0.5 * libm::erfc(-x / core::f64::consts::SQRT_2) - p;
    let u = e * libm::sqrt(2.0 * core::f64::consts::PI) * libm::exp(x * x / 2.0);
    x -= u / (1.0 + x * u / 2.0);
    x
}

/// Wilson score interval for `successes` out of `trials`, clamped to
/// `[0, 1]`.
pub fn wilson_interval(successes: u64, trials: u64, confidence: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::ZeroTrials);
    }
    if successes > trials {
        return Err(Error::TooManySuccesses { successes, trials });
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidConfidence(confidence));
    }
    let z = normal_quantile(0.5 + confidence / 2.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * libm::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    let low = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let high = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    Ok((low.min(p), high.max(p)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernoulliEstimate {
    pub successes: u64,
    pub trials: u64,
    pub p_hat: f64,
    /// 95% Wilson bounds.
    pub wilson_low: f64,
    pub wilson_high: f64,
}

impl BernoulliEstimate {
    pub fn new(successes: u64, trials: u64) -> Result<Self> {
        let (wilson_low, wilson_high) = wilson_interval(successes, trials, 0.95)?;
        Ok(BernoulliEstimate { successes, trials, p_hat: successes as f64 / trials as f64, wilson_low, wilson_high })
    }

    /// Delta-method standard error of `ln p̂`; `None` when `p̂ = 0`.
    pub fn log_se(&self) -> Option<f64> {
        if self.successes == 0 {
            return None;
        }
        Some(libm::sqrt((1.0 - self.p_hat) / (self.trials as f64 * self.p_hat)))
    }
}

/// One point of a log-log fit: `value` observed at `scale`, with an optional
/// standard error of `ln value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitPoint {
    pub scale: f64,
    pub value: f64,
    pub log_se: Option<f64>,
}

impl FitPoint {
    pub fn new(scale: f64, value: f64) -> Self {
        FitPoint { scale, value, log_se: None }
    }

    /// `None` for a zero-success estimate, which has no logarithm.
    pub fn from_estimate(scale: f64, est: &BernoulliEstimate) -> Option<Self> {
        est.log_se().map(|se| FitPoint { scale, value: est.p_hat, log_se: Some(se.max(1e-12)) })
    }

    /// Sample mean with its standard error.
    pub fn from_mean(scale: f64, mean: f64, se: f64) -> Option<Self> {
        (mean > 0.0).then(|| FitPoint { scale, value: mean, log_se: Some((se / mean).max(1e-12)) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub resamples: u32,
    pub confidence: f64,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { resamples: 2000, confidence: 0.95, seed: 0x5eed }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerLawFit {
    pub points: Vec<FitPoint>,
    pub slope: f64,
    pub intercept: f64,
    /// Bootstrap percentile interval, widened if needed to hold `slope`.
    pub slope_ci: (f64, f64),
    /// Whether the points carried standard errors (weighted, parametric
    /// bootstrap) or not (ordinary, residual bootstrap).
    pub weighted: bool,
}

impl PowerLawFit {
    pub fn predict(&self, scale: f64) -> f64 {
        libm::exp(self.intercept + self.slope * libm::log(scale))
    }
}

/// `(slope, intercept)` of weighted least squares.
fn wls(x: &[f64], y: &[f64], w: &[f64]) -> Result<(f64, f64)> {
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for i in 0..x.len() {
        sxx += w[i] * (x[i] - mx) * (x[i] - mx);
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
    }
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit);
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

pub fn loglog_fit(points: &[FitPoint]) -> Result<PowerLawFit> {
    loglog_fit_with(points, FitOptions::default())
}

pub fn loglog_fit_with(points: &[FitPoint], options: FitOptions) -> Result<PowerLawFit> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: points.len() });
    }
    for p in points {
        for v in [p.scale, p.value] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::NonPositive(v));
            }
        }
    }
    if !(options.confidence > 0.0 && options.confidence < 1.0) {
        return Err(Error::InvalidConfidence(options.confidence));
    }
    let x: Vec<f64> = points.iter().map(|p| libm::log(p.scale)).collect();
    let y: Vec<f64> = points.iter().map(|p| libm::log(p.value)).collect();
    let weighted = points.iter().all(|p| p.log_se.is_some_and(|s| s > 0.0));
    let se: Vec<f64> = points.iter().map(|p| p.log_se.unwrap_or(1.0)).collect();
    let w: Vec<f64> = if weighted { se.iter().map(|s| 1.0 / (s * s)).collect() } else { vec![1.0; x.len()] };
    let (slope, intercept) = wls(&x, &y, &w)?;

    let fitted: Vec<f64> = x.iter().map(|xi| intercept + slope * xi).collect();
    let resid: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let mut rng = CounterRng::new(options.seed);
    let mut slopes = Vec::with_capacity(options.resamples as usize);
    let mut ys = vec![0.0; x.len()];
    for _ in 0..options.resamples {
        for i in 0..x.len() {
            ys[i] = if weighted {
                fitted[i] + se[i] * rng.normal()
            } else {
                fitted[i] + resid[rng.below(x.len() as u64) as usize]
            };
        }
        slopes.push(wls(&x, &ys, &w)?.0);
    }
    let slope_ci = if slopes.is_empty() {
        (slope, slope)
    } else {
        slopes.sort_unstable_by(f64::total_cmp);
        let tail = (1.0 - options.confidence) / 2.0;
        let lo = percentile(&slopes, tail);
        let hi = percentile(&slopes, 1.0 - tail);
        (lo.min(slope), hi.max(slope))
    };
    Ok(PowerLawFit { points: points.to_vec(), slope, intercept, slope_ci, weighted })
}

/// Linear interpolation between order statistics of sorted data.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioBand {
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// `max_ratio / min_ratio`; infinite when some ratio is zero.
    pub spread: f64,
}

/// Range of `observed / reference` over the pairs.
pub fn ratio_band_check(pairs: &[(f64, f64)]) -> Result<RatioBand> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(obs, reference) in pairs {
        if !(reference > 0.0) {
            return Err(Error::NonPositive(reference));
        }
        let r = obs / reference;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    let spread = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    Ok(RatioBand { min_ratio: lo, max_ratio: hi, spread })
}
