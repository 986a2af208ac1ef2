//! Monte Carlo checks of the clipped-estimator bias/variance bounds and of
//! Bernstein's tail bound for bounded martingale differences.

use rand::Rng;
use serde::Serialize;

use super::stats::RunningMoments;
use crate::error::{domain, Error, Result};
use crate::noise::{moment_certificate, sample_noise, NoiseModel, SeedStream};
use crate::vector::{clip, RealVector};

/// Standard errors of slack granted to every Monte Carlo comparison.
pub const MC_SLACK: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub estimate: f64,
    pub stderr: f64,
    pub bound: f64,
    pub passed: bool,
}

impl BoundCheck {
    fn new(estimate: f64, stderr: f64, bound: f64) -> Self {
        Self {
            estimate,
            stderr,
            bound,
            passed: estimate <= bound + MC_SLACK * stderr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClipLemmaReport {
    pub n: usize,
    pub lambda: f64,
    pub alpha: f64,
    pub sigma: f64,
    /// `‖E[X̂] − x‖ ≤ 2^α σ^α / λ^{α−1}`.
    pub bias: BoundCheck,
    /// `E‖X̂ − x‖² ≤ 18 λ^{2−α} σ^α`.
    pub mse: BoundCheck,
    /// `E‖X̂ − E[X̂]‖² ≤ 18 λ^{2−α} σ^α`.
    pub variance: BoundCheck,
    pub max_clipped_norm: f64,
    pub max_centered_norm: f64,
    /// `‖X̂‖ ≤ λ` on every draw.
    pub norm_cap_holds: bool,
    /// `‖X̂ − mean(X̂)‖ ≤ 2λ` on every draw.
    pub centered_cap_holds: bool,
    pub passed: bool,
}

/// Draws `X = x + ξ`, clips at `λ`, and compares the three moment estimates of
/// `X̂` with their bounds. Requires `‖x‖ ≤ λ/2`.
pub fn verify_clip_lemma(x: &RealVector, model: &NoiseModel, lambda: f64, alpha: f64, n: usize, stream: &mut SeedStream) -> Result<ClipLemmaReport> {
    if n < 2 {
        return Err(domain("clip lemma check needs at least 2 draws"));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(domain(format!("clipping level must be positive and finite, got {lambda}")));
    }
    if x.dim() != model.dimension {
        return Err(Error::DimensionMismatch {
            expected: model.dimension,
            found: x.dim(),
        });
    }
    if x.norm() > lambda / 2.0 {
        return Err(domain(format!("lemma hypothesis fails: ‖x‖ = {} > λ/2 = {}", x.norm(), lambda / 2.0)));
    }
    let sigma = moment_certificate(model, alpha)?.sigma;
    let sa = sigma.powf(alpha);

    let draw = |s: &mut SeedStream| clip(&(x + &sample_noise(model, s)), lambda);

    // First pass: mean of X̂, per-coordinate spread, and ‖X̂ − x‖².
    let replay = stream.clone();
    let d = x.dim();
    let mut coords = vec![RunningMoments::default(); d];
    let mut mse = RunningMoments::default();
    let mut max_clipped_norm = 0.0f64;
    let mut norm_cap_holds = true;
    for _ in 0..n {
        let xh = draw(stream)?;
        let nrm = xh.norm();
        norm_cap_holds &= nrm <= lambda;
        max_clipped_norm = max_clipped_norm.max(nrm);
        for (c, v) in coords.iter_mut().zip(xh.as_slice()) {
            c.push(*v);
        }
        mse.push(xh.distance_squared(x));
    }
    let mean = RealVector::from_raw(coords.iter().map(|c| c.mean()).collect());
    let bias = mean.distance(x);
    let bias_stderr = (coords.iter().map(|c| c.variance()).sum::<f64>() / n as f64).sqrt();

    // Second pass over the same draws: spread around the sample mean.
    let mut again = replay;
    let mut centered = RunningMoments::default();
    let mut max_centered_norm = 0.0f64;
    for _ in 0..n {
        let xh = draw(&mut again)?;
        let dist2 = xh.distance_squared(&mean);
        max_centered_norm = max_centered_norm.max(dist2.sqrt());
        centered.push(dist2);
    }
    let centered_cap_holds = max_centered_norm <= 2.0 * lambda;
    // Bessel-corrected spread estimate.
    let variance_est = centered.mean() * n as f64 / (n - 1) as f64;

    let bias = BoundCheck::new(bias, bias_stderr, 2f64.powf(alpha) * sa / lambda.powf(alpha - 1.0));
    let quad_bound = 18.0 * lambda.powf(2.0 - alpha) * sa;
    let mse = BoundCheck::new(mse.mean(), mse.stderr(), quad_bound);
    let variance = BoundCheck::new(variance_est, centered.stderr(), quad_bound);
    let passed = bias.passed && mse.passed && variance.passed && norm_cap_holds && centered_cap_holds;
    Ok(ClipLemmaReport {
        n,
        lambda,
        alpha,
        sigma,
        bias,
        mse,
        variance,
        max_clipped_norm,
        max_centered_norm,
        norm_cap_holds,
        centered_cap_holds,
        passed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BernsteinReport {
    pub empirical_prob: f64,
    pub bound: f64,
    pub stderr: f64,
    pub passed: bool,
}

/// `2 exp(−b² / (2G + 2cb/3))`.
pub fn bernstein_bound(c: f64, g: f64, b: f64) -> f64 {
    2.0 * (-(b * b) / (2.0 * g + 2.0 * c * b / 3.0)).exp()
}

/// Frequency of `|Σ X_i| > b` for i.i.d. fair `±c` increments against the
/// Bernstein bound with `G = n_terms·c²`.
pub fn bernstein_tail_check(c: f64, n_terms: usize, b: f64, n_trials: usize, stream: &mut SeedStream) -> Result<BernsteinReport> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(domain(format!("increment bound must be positive, got {c}")));
    }
    if !(b >= 0.0 && b.is_finite()) {
        return Err(domain(format!("deviation level must be nonnegative, got {b}")));
    }
    if n_terms == 0 || n_trials == 0 {
        return Err(domain("term and trial counts must be positive"));
    }
    let rng = stream.rng();
    let mut hits = 0usize;
    for _ in 0..n_trials {
        let mut plus = 0i64;
        let mut left = n_terms;
        while left > 0 {
            let take = left.min(64);
            let bits: u64 = rng.random();
            let mask = if take == 64 { u64::MAX } else { (1u64 << take) - 1 };
            plus += (bits & mask).count_ones() as i64;
            left -= take;
        }
        let sum = 2 * plus - n_terms as i64;
        if sum.unsigned_abs() as f64 * c > b {
            hits += 1;
        }
    }
    let p = hits as f64 / n_trials as f64;
    let stderr = (p * (1.0 - p) / n_trials as f64).sqrt();
    let bound = bernstein_bound(c, n_terms as f64 * c * c, b);
    Ok(BernsteinReport {
        empirical_prob: p,
        bound,
        stderr,
        passed: p <= bound + MC_SLACK * stderr,
    })
}
