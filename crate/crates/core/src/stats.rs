//! Small statistics toolkit: normal CDF, Kolmogorov-Smirnov distance,
//! Wilson intervals, the Mann-Kendall trend test and least-squares slopes.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Two-sided 95% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// CDF of `N(0, sigma2)` via `erf`.
pub fn normal_cdf(x: f64, sigma2: f64) -> f64 {
    0.5 * (1.0 + math::erf(x / math::sqrt(2.0 * sigma2)))
}

/// Kolmogorov-Smirnov statistic of `samples` against `N(0, sigma2)`.
pub fn ks_distance_to_normal(samples: &[f64], sigma2: f64) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(Error::InvalidParameter("sigma2 must be positive".into()));
    }
    if samples.is_empty() {
        return Err(Error::InvalidParameter("no samples".into()));
    }
    let mut sorted: Vec<f64> = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let cdf = normal_cdf(x, sigma2);
        d = d.max((i + 1) as f64 / n - cdf).max(cdf - i as f64 / n);
    }
    Ok(d.min(1.0))
}

/// Asymptotic KS critical value `c(α) / sqrt(n)` for `α = 0.01`.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.628 / math::sqrt(n as f64)
}

/// Wilson score interval for `successes / trials` at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * math::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    let lower = if successes == 0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    (lower, (centre + half).min(1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trend {
    Increasing,
    Decreasing,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MannKendall {
    pub s: i64,
    pub var_s: f64,
    pub z: f64,
    pub trend: Trend,
}

/// Mann-Kendall test with tie correction; two-sided at normal quantile `z_crit`.
pub fn mann_kendall(series: &[f64], z_crit: f64) -> MannKendall {
    let n = series.len();
    let mut s = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            let d = series[j] - series[i];
            if d > 0.0 {
                s += 1;
            } else if d < 0.0 {
                s -= 1;
            }
        }
    }
    let mut sorted = series.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * (t - 1.0) * (2.0 * t + 5.0);
        i = j + 1;
    }
    let nf = n as f64;
    let var_s = (nf * (nf - 1.0) * (2.0 * nf + 5.0) - tie_term) / 18.0;
    let z = if var_s <= 0.0 {
        0.0
    } else if s > 0 {
        (s - 1) as f64 / math::sqrt(var_s)
    } else if s < 0 {
        (s + 1) as f64 / math::sqrt(var_s)
    } else {
        0.0
    };
    let trend = if z > z_crit {
        Trend::Increasing
    } else if z < -z_crit {
        Trend::Decreasing
    } else {
        Trend::None
    };
    MannKendall { s, var_s, z, trend }
}

/// Ordinary least-squares slope of `ys` on `xs`.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Mean and unbiased variance (two-pass).
pub fn mean_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss / (n - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    #[test]
    fn normal_cdf_reference_values() {
        assert_eq!(normal_cdf(0.0, 1.0), 0.5);
        assert!((normal_cdf(1.0, 1.0) - 0.841_344_746_068_542_9).abs() < 1e-12);
        assert!((normal_cdf(-1.959_963_984_540_054, 1.0) - 0.025).abs() < 1e-12);
        assert!((normal_cdf(1.0, 4.0) - 0.691_462_461_274_013_1).abs() < 1e-12);
    }

    #[test]
    fn ks_constant_samples() {
        assert_eq!(ks_distance_to_normal(&[0.0; 50], 0.5).unwrap(), 0.5);
        assert!(ks_distance_to_normal(&[0.0], 0.0).is_err());
    }

    #[test]
    fn ks_on_normal_samples_is_small() {
        let mut r = SplitMix64::new(99);
        let m = 10_000;
        let xs: Vec<f64> = (0..m).map(|_| r.next_normal() * 0.5f64.sqrt()).collect();
        let d = ks_distance_to_normal(&xs, 0.5).unwrap();
        assert!(d < ks_critical_1pct(m), "d = {d}");
    }

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(0, 100, Z95);
        assert_eq!(lo, 0.0);
        assert!((hi - Z95 * Z95 / (100.0 + Z95 * Z95)).abs() < 1e-12);
        let (lo, hi) = wilson_interval(50, 100, Z95);
        assert!(lo < 0.5 && hi > 0.5);
        assert!((0.5 - lo - (hi - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn mann_kendall_detects_monotone() {
        let up: Vec<f64> = (0..7).map(|i| i as f64).collect();
        let mk = mann_kendall(&up, Z95);
        assert_eq!(mk.s, 21);
        assert!((mk.var_s - 7.0 * 6.0 * 19.0 / 18.0).abs() < 1e-12);
        assert_eq!(mk.trend, Trend::Increasing);
        let flat = [1.0; 7];
        assert_eq!(mann_kendall(&flat, Z95).trend, Trend::None);
        let down: Vec<f64> = up.iter().rev().cloned().collect();
        assert_eq!(mann_kendall(&down, Z95).trend, Trend::Decreasing);
    }

    #[test]
    fn slope_of_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [3.0, 5.0, 7.0, 9.0];
        assert!((ols_slope(&xs, &ys) - 2.0).abs() < 1e-12);
    }
}
