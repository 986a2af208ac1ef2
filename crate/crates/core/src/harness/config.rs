//! JSON experiment configuration and its resolution into runnable objects.

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::noise::{moment_certificate, NoiseKind, NoiseModel};
use crate::optimizers::{theorem_params, Method, OptimizerConfig, TheoremParams};
use crate::problems::{sample_ball, Function, Problem, DEFAULT_SEG_SAMPLES};
use crate::vector::RealVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    /// `½⟨x, Ax⟩ − ⟨b, x⟩` with `A` given by rows.
    Quadratic {
        matrix: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    /// `A = diag(eigenvalues)`, minimizer `x_star` (origin when absent).
    DiagonalQuadratic {
        eigenvalues: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x_star: Option<Vec<f64>>,
    },
    PowerNorm {
        dim: usize,
        n: u32,
        l1: f64,
    },
    CoshNorm {
        dim: usize,
    },
    SymExpSum {
        dim: usize,
        terms: usize,
        seed: u64,
    },
    /// Only usable for smoothness estimation: it has no minimizer.
    Linear {
        slope: Vec<f64>,
        intercept: f64,
    },
}

impl ProblemSpec {
    pub fn dimension(&self) -> usize {
        match self {
            ProblemSpec::Quadratic { b, .. } => b.len(),
            ProblemSpec::DiagonalQuadratic { eigenvalues, .. } => eigenvalues.len(),
            ProblemSpec::PowerNorm { dim, .. } | ProblemSpec::CoshNorm { dim } | ProblemSpec::SymExpSum { dim, .. } => *dim,
            ProblemSpec::Linear { slope, .. } => slope.len(),
        }
    }

    pub fn build(&self) -> Result<Problem> {
        match self {
            ProblemSpec::Quadratic { matrix, b } => {
                let dim = b.len();
                if matrix.len() != dim || matrix.iter().any(|r| r.len() != dim) {
                    return Err(Error::Config("quadratic matrix must be square and match b".into()));
                }
                Problem::quadratic(dim, matrix.concat(), b.clone())
            }
            ProblemSpec::DiagonalQuadratic { eigenvalues, x_star } => {
                let xs = match x_star {
                    Some(v) => RealVector::new(v.clone())?,
                    None => RealVector::zeros(eigenvalues.len()),
                };
                Problem::diagonal_quadratic(eigenvalues, &xs)
            }
            ProblemSpec::PowerNorm { dim, n, l1 } => Problem::power_norm(*dim, *n, *l1),
            ProblemSpec::CoshNorm { dim } => Problem::cosh_norm(*dim),
            ProblemSpec::SymExpSum { dim, terms, seed } => Problem::sym_exp_sum(*dim, *terms, *seed),
            ProblemSpec::Linear { .. } => Err(Error::Config(
                "a linear function has no minimizer; it only supports estimate-smoothness".into(),
            )),
        }
    }

    /// The objective alone, which also covers the linear case.
    pub fn function(&self) -> Result<Function> {
        match self {
            ProblemSpec::Linear { slope, intercept } => Ok(Function::Linear {
                slope: RealVector::new(slope.clone())?,
                intercept: *intercept,
            }),
            other => Ok(other.build()?.function().clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum StartRule {
    Explicit {
        x0: Vec<f64>,
    },
    /// `x* + distance·e_axis`.
    Axis {
        distance: f64,
        #[serde(default)]
        axis: usize,
    },
    /// `x* + distance·u`, `u` uniform on the sphere drawn from `seed`.
    RandomSphere {
        distance: f64,
        seed: u64,
    },
}

impl StartRule {
    pub fn resolve(&self, p: &Problem) -> Result<RealVector> {
        let d = p.dimension();
        let xs = p.x_star();
        match self {
            StartRule::Explicit { x0 } => {
                let x = RealVector::new(x0.clone())?;
                x.check_dim(d)?;
                Ok(x)
            }
            StartRule::Axis { distance, axis } => {
                if *axis >= d {
                    return Err(Error::Config(format!("axis {axis} out of range for dimension {d}")));
                }
                Ok(xs + &RealVector::basis(d, *axis, *distance))
            }
            StartRule::RandomSphere { distance, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let u = sample_ball(&mut rng, &RealVector::zeros(d), 1.0);
                let n = u.norm();
                if n == 0.0 {
                    return Err(Error::Config("degenerate sphere draw".into()));
                }
                Ok(xs.axpy(distance / n, &u))
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothnessSampling {
    pub pairs: usize,
    pub radius: f64,
    #[serde(default = "default_seg_samples")]
    pub seg_samples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_seg_samples() -> usize {
    DEFAULT_SEG_SAMPLES
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub x0: StartRule,
    pub noise: NoiseKind,
    pub method: Method,
    pub alpha: f64,
    pub delta: f64,
    pub base_seed: u64,
    pub trials: usize,
    pub k_values: Vec<u64>,
    #[serde(default)]
    pub overrides: Overrides,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Certificate radius around `x*`; defaults to `4‖x0 − x*‖`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valid_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smoothness: Option<SmoothnessSampling>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.alpha > 1.0 && self.alpha <= 2.0) {
            return bad(format!("alpha must lie in (1, 2], got {}", self.alpha));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if self.k_values.is_empty() || self.k_values.contains(&0) {
            return bad("k_values must be a non-empty list of positive integers".into());
        }
        let mut sorted = self.k_values.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.k_values.len() {
            return bad("k_values must not repeat".into());
        }
        for (name, v) in [
            ("gamma", self.overrides.gamma),
            ("lambda", self.overrides.lambda),
            ("r0", self.overrides.r0),
            ("valid_radius", self.valid_radius),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return bad(format!("{name} must be positive and finite, got {v}"));
                }
            }
        }
        if self.method == Method::Sgd && self.overrides.lambda.is_some() {
            return bad("sgd does not clip; drop the lambda override".into());
        }
        if let Some(s) = &self.smoothness {
            if s.pairs < 2 || s.seg_samples < 2 || !(s.radius > 0.0 && s.radius.is_finite()) {
                return bad("smoothness sampling needs pairs ≥ 2, seg_samples ≥ 2 and a positive radius".into());
            }
        }
        NoiseModel::new(self.noise, self.problem.dimension().max(1)).map(|_| ())
    }
}

/// Everything derived from a config for one K.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedRun {
    pub k: u64,
    pub params: TheoremParams,
    /// `None` for sgd.
    pub lambda: Option<f64>,
    pub gamma: f64,
    pub regime: u8,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedCertificate {
    pub l0: f64,
    pub l1: f64,
    pub valid_radius: Option<f64>,
}

/// A validated config with its problem, noise model and per-K parameters.
#[derive(Debug, Clone, Serialize)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub problem_name: String,
    pub dimension: usize,
    pub certificate: ResolvedCertificate,
    pub x0: RealVector,
    pub x_star: RealVector,
    pub f_star: f64,
    /// Exact `‖x0 − x*‖`.
    pub r0_exact: f64,
    /// `R0` fed to the theorem (override or exact).
    pub r0: f64,
    pub sigma: f64,
    pub sigma_exact: bool,
    pub runs: Vec<ResolvedRun>,
    #[serde(skip)]
    pub problem: Problem,
    #[serde(skip)]
    pub noise: NoiseModel,
}

impl Experiment {
    pub fn resolve(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let problem = config.problem.build()?;
        let d = problem.dimension();
        let noise = NoiseModel::new(config.noise, d)?;
        let x0 = config.x0.resolve(&problem)?;
        let r0_exact = x0.distance(problem.x_star());
        let r0 = match config.overrides.r0 {
            Some(r) => r,
            None if r0_exact > 0.0 => r0_exact,
            None => return Err(Error::Config("x0 equals x*; give an r0 override".into())),
        };
        let radius = config.valid_radius.unwrap_or(4.0 * r0_exact.max(r0));
        let problem = problem.with_valid_radius(Some(radius))?;
        let cert = moment_certificate(&noise, config.alpha)?;
        let c = *problem.certificate();
        let mut runs = Vec::with_capacity(config.k_values.len());
        for &k in &config.k_values {
            let params = theorem_params(c.l0, c.l1, r0, cert.sigma, config.alpha, k, config.delta)?;
            let lambda = match config.method {
                Method::Sgd => None,
                _ => Some(config.overrides.lambda.unwrap_or(params.lambda)),
            };
            let gamma = config.overrides.gamma.unwrap_or(params.gamma);
            runs.push(ResolvedRun {
                k,
                params,
                lambda,
                gamma,
                regime: params.regime,
            });
        }
        Ok(Self {
            problem_name: problem.name().to_owned(),
            dimension: d,
            certificate: ResolvedCertificate {
                l0: c.l0,
                l1: c.l1,
                valid_radius: Some(radius),
            },
            x_star: problem.x_star().clone(),
            f_star: problem.f_star(),
            x0,
            r0_exact,
            r0,
            sigma: cert.sigma,
            sigma_exact: cert.exact,
            runs,
            problem,
            noise,
            config,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::resolve(ExperimentConfig::load(path)?)
    }

    pub fn run_for(&self, k: u64) -> Result<&ResolvedRun> {
        self.runs
            .iter()
            .find(|r| r.k == k)
            .ok_or_else(|| domain(format!("K = {k} is not in the config's k_values")))
    }

    pub fn optimizer_config(&self, run: &ResolvedRun) -> Result<OptimizerConfig> {
        let lambda = run.lambda.unwrap_or(f64::INFINITY);
        OptimizerConfig::new(self.config.method, run.gamma, lambda, run.k as usize, self.x0.clone())
    }

    /// The theorem parameters with any γ/λ overrides substituted.
    pub fn effective_params(&self, run: &ResolvedRun) -> TheoremParams {
        let mut p = run.params;
        p.gamma = run.gamma;
        p.lambda = run.lambda.unwrap_or(f64::INFINITY);
        p
    }
}

/// Samples the configured pairs in a ball around `x*` (the origin for a
/// linear function) and fits `(L0, L1)`.
pub fn estimate_smoothness_from_config(config: &ExperimentConfig) -> Result<crate::analysis::SmoothnessEstimate> {
    let s = config
        .smoothness
        .as_ref()
        .ok_or_else(|| Error::Config("the config has no \"smoothness\" section".into()))?;
    let f = config.problem.function()?;
    let center = match &config.problem {
        ProblemSpec::Linear { slope, .. } => RealVector::zeros(slope.len()),
        other => other.build()?.x_star().clone(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let pairs: Vec<(RealVector, RealVector)> = (0..s.pairs)
        .map(|_| (sample_ball(&mut rng, &center, s.radius), sample_ball(&mut rng, &center, s.radius)))
        .collect();
    crate::analysis::estimate_smoothness(&f, &pairs, s.seg_samples)
}
