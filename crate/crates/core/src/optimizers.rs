//! Clip-SGD, its double-sampling variant and plain SGD, with per-step
//! instrumentation, plus the theorem-prescribed step size and clipping level.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::noise::{sample_noise, NoiseModel, SeedStream};
use crate::problems::{suboptimality, Problem};
use crate::vector::{clip, clip_scale, RealVector};

/// An iterate farther than this multiple of the reference radius from `x*`
/// ends the run as diverged.
pub const DIVERGENCE_FACTOR: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClipSgd,
    ClipSgdDs,
    Sgd,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ClipSgd => "clip_sgd",
            Method::ClipSgdDs => "clip_sgd_ds",
            Method::Sgd => "sgd",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub method: Method,
    pub gamma: f64,
    /// `f64::INFINITY` for SGD.
    pub lambda: f64,
    pub iterations: usize,
    pub x0: RealVector,
    /// Radius used by the divergence test; `‖x0 − x*‖` when absent.
    pub reference_radius: Option<f64>,
}

impl OptimizerConfig {
    pub fn new(method: Method, gamma: f64, lambda: f64, iterations: usize, x0: RealVector) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(domain(format!("step size must be positive and finite, got {gamma}")));
        }
        if iterations == 0 {
            return Err(domain("iteration count must be at least 1"));
        }
        if !(lambda > 0.0) {
            return Err(domain(format!("clipping level must be positive, got {lambda}")));
        }
        if (method == Method::Sgd) != lambda.is_infinite() {
            return Err(domain("sgd requires an infinite clipping level and clipped methods a finite one"));
        }
        Ok(Self {
            method,
            gamma,
            lambda,
            iterations,
            x0,
            reference_radius: None,
        })
    }

    pub fn with_reference_radius(mut self, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(domain(format!("reference radius must be positive, got {r}")));
        }
        self.reference_radius = Some(r);
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoremParams {
    pub l0: f64,
    pub l1: f64,
    pub r0: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub k: u64,
    pub delta: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub regime: u8,
    /// `ln(4K/δ)`.
    pub log_term: f64,
    /// Zero in regime 1.
    pub k_lower_bound_regime2: f64,
    pub k_lower_bound_satisfied: bool,
}

/// `min{4R0, 1/L1}` with `1/0 = ∞`.
pub fn radius_scale(l1: f64, r0: f64) -> f64 {
    if l1 == 0.0 {
        4.0 * r0
    } else {
        (4.0 * r0).min(1.0 / l1)
    }
}

pub fn theorem_params(l0: f64, l1: f64, r0: f64, sigma: f64, alpha: f64, k: u64, delta: f64) -> Result<TheoremParams> {
    let finite_nonneg = |name: &str, v: f64| {
        if v >= 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(domain(format!("{name} must be nonnegative and finite, got {v}")))
        }
    };
    finite_nonneg("L0", l0)?;
    finite_nonneg("L1", l1)?;
    finite_nonneg("sigma", sigma)?;
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(domain(format!("R0 must be positive and finite, got {r0}")));
    }
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(domain(format!("alpha must lie in (1, 2], got {alpha}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    if k == 0 {
        return Err(domain("K must be at least 1"));
    }
    if l0 == 0.0 && sigma == 0.0 {
        return Err(domain("L0 and sigma cannot both vanish (the clipping level would be 0)"));
    }
    let kf = k as f64;
    let log_term = (4.0 * kf / delta).ln();
    let m = radius_scale(l1, r0);
    let lambda = (2.0 * l0 * m).max(9f64.powf(1.0 / alpha) * sigma * kf.powf(1.0 / alpha) * log_term.powf(-1.0 / alpha));
    let gamma = m / (160.0 * lambda * log_term);
    let regime = if l1 == 0.0 || 4.0 * r0 * l1 <= 1.0 { 1 } else { 2 };
    let k_lower_bound_regime2 = if regime == 2 {
        64.0 * 128f64.powf(alpha) * 160.0 / 9.0 * (l1 * r0).powf(2.0 + alpha) * log_term * log_term / delta
    } else {
        0.0
    };
    Ok(TheoremParams {
        l0,
        l1,
        r0,
        sigma,
        alpha,
        k,
        delta,
        lambda,
        gamma,
        regime,
        log_term,
        k_lower_bound_regime2,
        k_lower_bound_satisfied: kf >= k_lower_bound_regime2,
    })
}

impl TheoremParams {
    /// Bound from the last line of the convergence proof: `2R0²/(γK)`.
    pub fn explicit_bound(&self) -> f64 {
        2.0 * self.r0 * self.r0 / (self.gamma * self.k as f64)
    }

    /// The rate with constants and log factors set to 1.
    pub fn shape_bound(&self) -> f64 {
        let kf = self.k as f64;
        let noise = self.sigma / kf.powf((self.alpha - 1.0) / self.alpha);
        let noise = if self.regime == 1 {
            self.r0 * noise
        } else {
            self.l1 * self.r0 * self.r0 * noise
        };
        (self.l0 * self.r0 * self.r0 / kf).max(noise)
    }

    /// Proof cap on the number of large-gradient steps, `10240 (L1 R0)² ln(4K/δ)`.
    pub fn c1(&self) -> f64 {
        10240.0 * (self.l1 * self.r0).powi(2) * self.log_term
    }

    /// `λ/(128 L1 R0)`, defined for `L1 > 0`.
    pub fn b(&self) -> Option<f64> {
        (self.l1 > 0.0).then(|| self.lambda / (128.0 * self.l1 * self.r0))
    }

    /// Lower bound on the success probability the proof delivers.
    pub fn confidence(&self) -> f64 {
        if self.regime == 1 {
            1.0 - self.delta
        } else {
            1.0 - 2.0 * self.delta
        }
    }

    pub fn optimizer_config(&self, method: Method, x0: RealVector) -> Result<OptimizerConfig> {
        let lambda = if method == Method::Sgd { f64::INFINITY } else { self.lambda };
        OptimizerConfig::new(method, self.gamma, lambda, self.k as usize, x0)
    }
}

/// Step classes of the descent analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Case {
    /// `‖∇f‖ ≤ L0/L1`.
    T1 = 1,
    /// `L0/L1 < ‖∇f‖ ≤ λ/2`.
    T2 = 2,
    /// `‖∇f‖ > λ/2`.
    T3 = 3,
}

impl Case {
    pub fn classify(grad_norm: f64, l0: f64, l1: f64, lambda: f64) -> Case {
        if l1 == 0.0 || grad_norm <= l0 / l1 {
            Case::T1
        } else if grad_norm <= lambda / 2.0 {
            Case::T2
        } else {
            Case::T3
        }
    }

    pub fn index(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub x: RealVector,
    /// Update direction: `x_{k+1} = x_k − γ·g`.
    pub g: RealVector,
    /// `‖∇f(x_k, ξ_k)‖` of the sample that forms the direction.
    pub raw_grad_norm: f64,
    /// Norm of the clipping sample `∇f(x_k, ξ_k^c)` under double sampling.
    pub clip_sample_norm: Option<f64>,
    pub grad_norm: f64,
    pub f_gap: f64,
    pub dist: f64,
    pub clip_active: bool,
    pub case: Case,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub method: Method,
    pub gamma: f64,
    pub lambda: f64,
    pub steps: Vec<StepRecord>,
    /// Last finite iterate: `x_K`, or the last one before divergence.
    pub final_x: RealVector,
    pub final_dist: f64,
    /// Step index of the first non-finite or runaway iterate.
    pub divergence: Option<usize>,
}

impl Trajectory {
    pub fn diverged(&self) -> bool {
        self.divergence.is_some()
    }

    pub fn into_result(self) -> Result<Self> {
        match self.divergence {
            Some(step) => Err(Error::Diverged { step }),
            None => Ok(self),
        }
    }

    /// `max_k R_k` over every recorded iterate including `x_K`; ∞ on divergence.
    pub fn max_dist(&self) -> f64 {
        if self.diverged() {
            return f64::INFINITY;
        }
        self.steps.iter().map(|s| s.dist).fold(self.final_dist, f64::max)
    }

    pub fn case_count(&self, case: Case) -> usize {
        self.steps.iter().filter(|s| s.case == case).count()
    }

    pub fn mean_gap(&self) -> f64 {
        self.steps.iter().map(|s| s.f_gap).sum::<f64>() / self.steps.len() as f64
    }

    /// `f(x_K) − f*`; ∞ on divergence.
    pub fn final_gap(&self, p: &Problem) -> Result<f64> {
        if self.diverged() {
            return Ok(f64::INFINITY);
        }
        suboptimality(p, &self.final_x)
    }

    /// `(1/K) Σ_{k<K} x_k`.
    pub fn average_iterate(&self) -> RealVector {
        let mut acc = RealVector::zeros(self.final_x.dim());
        let w = 1.0 / self.steps.len() as f64;
        for s in &self.steps {
            acc.add_assign_scaled(w, &s.x);
        }
        acc
    }
}

/// Regime 1: gap of the average iterate. Regime 2: best per-step gap.
/// Diverged runs score ∞.
pub fn criterion(p: &Problem, t: &Trajectory, regime: u8) -> Result<f64> {
    if t.diverged() {
        return Ok(f64::INFINITY);
    }
    if t.steps.is_empty() {
        return Err(Error::EmptyInput);
    }
    match regime {
        1 => suboptimality(p, &t.average_iterate()),
        2 => Ok(t.steps.iter().map(|s| s.f_gap).fold(f64::INFINITY, f64::min)),
        r => Err(domain(format!("regime must be 1 or 2, got {r}"))),
    }
}

fn run(p: &Problem, model: &NoiseModel, cfg: &OptimizerConfig, stream: &mut SeedStream) -> Result<Trajectory> {
    let d = p.dimension();
    cfg.x0.check_dim(d)?;
    if model.dimension != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: model.dimension,
        });
    }
    let cert = *p.certificate();
    let x_star = p.x_star();
    let r_ref = cfg.reference_radius.unwrap_or_else(|| cfg.x0.distance(x_star));
    let limit = DIVERGENCE_FACTOR * if r_ref > 0.0 { r_ref } else { 1.0 };
    let mut steps = Vec::with_capacity(cfg.iterations);
    let mut x = cfg.x0.clone();
    let mut divergence = None;

    for k in 0..cfg.iterations {
        let grad = p.gradient(&x);
        let grad_norm = grad.norm();
        if !grad.is_finite() {
            divergence = Some(k);
            break;
        }
        let f_gap = suboptimality(p, &x)?;
        let dist = x.distance(x_star);
        let draw = |stream: &mut SeedStream| {
            if model.is_none() {
                grad.clone()
            } else {
                &grad + &sample_noise(model, stream)
            }
        };
        let (g, raw_grad_norm, clip_sample_norm, clip_active) = match cfg.method {
            Method::Sgd => {
                let s = draw(stream);
                let n = s.norm();
                (s, n, None, false)
            }
            Method::ClipSgd => {
                let s = draw(stream);
                let n = s.norm();
                (clip(&s, cfg.lambda)?, n, None, n > cfg.lambda)
            }
            Method::ClipSgdDs => {
                let sc = draw(stream);
                let s = draw(stream);
                let nc = sc.norm();
                let c = clip_scale(&sc, cfg.lambda)?;
                let g = if c == 1.0 { s.clone() } else { s.scale(c) };
                (g, s.norm(), Some(nc), nc > cfg.lambda)
            }
        };
        let case = Case::classify(grad_norm, cert.l0, cert.l1, cfg.lambda);
        let next = x.axpy(-cfg.gamma, &g);
        steps.push(StepRecord {
            x,
            g,
            raw_grad_norm,
            clip_sample_norm,
            grad_norm,
            f_gap,
            dist,
            clip_active,
            case,
        });
        x = next;
        if !x.is_finite() || x.distance(x_star) > limit {
            divergence = Some(k + 1);
            break;
        }
    }

    let final_x = if divergence.is_some() && !x.is_finite() {
        steps.last().map(|s| s.x.clone()).unwrap_or_else(|| cfg.x0.clone())
    } else {
        x
    };
    let final_dist = final_x.distance(x_star);
    Ok(Trajectory {
        method: cfg.method,
        gamma: cfg.gamma,
        lambda: cfg.lambda,
        steps,
        final_x,
        final_dist,
        divergence,
    })
}

fn expect_method(cfg: &OptimizerConfig, m: Method) -> Result<()> {
    if cfg.method == m {
        Ok(())
    } else {
        Err(domain(format!("expected method {}, got {}", m.as_str(), cfg.method.as_str())))
    }
}

/// `x_{k+1} = x_k − γ·clip(∇f(x_k) + ξ_k, λ)`.
pub fn run_clip_sgd(p: &Problem, model: &NoiseModel, cfg: &OptimizerConfig, stream: &mut SeedStream) -> Result<Trajectory> {
    expect_method(cfg, Method::ClipSgd)?;
    run(p, model, cfg, stream)
}

/// `x_{k+1} = x_k − γ·min{1, λ/‖∇f(x_k) + ξ_k^c‖}·(∇f(x_k) + ξ_k)`, with `ξ^c`
/// drawn before `ξ` at every step.
pub fn run_clip_sgd_ds(p: &Problem, model: &NoiseModel, cfg: &OptimizerConfig, stream: &mut SeedStream) -> Result<Trajectory> {
    expect_method(cfg, Method::ClipSgdDs)?;
    run(p, model, cfg, stream)
}

/// `x_{k+1} = x_k − γ·(∇f(x_k) + ξ_k)`.
pub fn run_sgd(p: &Problem, model: &NoiseModel, cfg: &OptimizerConfig, stream: &mut SeedStream) -> Result<Trajectory> {
    expect_method(cfg, Method::Sgd)?;
    run(p, model, cfg, stream)
}

/// Dispatch on `cfg.method`.
pub fn run_method(p: &Problem, model: &NoiseModel, cfg: &OptimizerConfig, stream: &mut SeedStream) -> Result<Trajectory> {
    run(p, model, cfg, stream)
}
