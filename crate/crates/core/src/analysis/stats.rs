//! Order-statistic quantiles, log-log rate fits and event frequencies.

use serde::Serialize;

use crate::error::{domain, Error, Result};

/// Welford accumulator for a sample mean and its standard error.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunningMoments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningMoments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

/// Upper order statistic: the `ceil(confidence·N)`-th smallest sample (1-based).
pub fn quantile(samples: &[f64], confidence: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(domain(format!("confidence must lie in (0, 1), got {confidence}")));
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(Error::NonFinite("quantile sample"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let rank = ((confidence * n as f64).ceil() as usize).clamp(1, n);
    Ok(sorted[rank - 1])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
}

/// OLS of `ln(values)` on `ln(ks)`.
pub fn fit_rate(ks: &[u64], values: &[f64]) -> Result<RateFit> {
    if ks.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: ks.len(),
            found: values.len(),
        });
    }
    if ks.len() < 3 {
        return Err(domain(format!("rate fit needs at least 3 points, got {}", ks.len())));
    }
    if ks.contains(&0) {
        return Err(domain("K values must be positive"));
    }
    if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(domain(format!("rate fit values must be positive and finite, got {v}")));
    }
    let x: Vec<f64> = ks.iter().map(|&k| (k as f64).ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(domain("rate fit needs at least two distinct K values"));
    }
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let stderr = (rss / (n - 2.0) / sxx).sqrt();
    Ok(RateFit { slope, stderr, intercept })
}

/// Fraction of `values` at or below `threshold`.
pub fn event_frequency(values: &[f64], threshold: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(values.iter().filter(|&&v| v <= threshold).count() as f64 / values.len() as f64)
}

/// Fraction of `true` flags.
pub fn flag_frequency(flags: &[bool]) -> Result<f64> {
    if flags.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(flags.iter().filter(|&&f| f).count() as f64 / flags.len() as f64)
}
