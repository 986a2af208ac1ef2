//! Built-in verification batteries with fixed configurations and seeds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::audit::audit_trajectory;
use crate::analysis::lemmas::{bernstein_tail_check, verify_clip_lemma};
use crate::error::{domain, Error, Result};
use crate::noise::{derive_stream, empirical_moment_check, NoiseKind, NoiseModel};
use crate::optimizers::{run_clip_sgd, theorem_params, Method};
use crate::problems::{check_generalized_smoothness, check_gradient_gap_bound, check_gradient_growth, sample_ball, Problem, DEFAULT_SEG_SAMPLES};
use crate::vector::RealVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    ClipLemma,
    Props,
    Bernstein,
    Audit,
    Moments,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::ClipLemma, Suite::Props, Suite::Bernstein, Suite::Audit, Suite::Moments];

    pub fn name(self) -> &'static str {
        match self {
            Suite::ClipLemma => "clip-lemma",
            Suite::Props => "props",
            Suite::Bernstein => "bernstein",
            Suite::Audit => "audit",
            Suite::Moments => "moments",
        }
    }

    pub fn parse(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| domain(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub suite: &'static str,
    pub passed: bool,
    pub failed: Vec<String>,
    pub checks: Vec<CheckResult>,
}

/// Problems exercised by the property battery, each with a certificate radius.
pub fn builtin_problems() -> Result<Vec<Problem>> {
    Ok(vec![
        Problem::quadratic(2, vec![2.0, 1.0, 1.0, 2.0], vec![1.0, -1.0])?.with_valid_radius(Some(3.0))?,
        Problem::diagonal_quadratic(&[5.0, 1.0, 0.2, 0.1, 3.0], &RealVector::new(vec![1.0, 0.0, -1.0, 2.0, 0.5])?)?.with_valid_radius(Some(3.0))?,
        Problem::power_norm(3, 4, 2.0)?.with_valid_radius(Some(3.0))?,
        Problem::power_norm(2, 3, 1.0)?.with_valid_radius(Some(2.0))?,
        Problem::cosh_norm(1)?.with_valid_radius(Some(3.0))?,
        Problem::cosh_norm(3)?.with_valid_radius(Some(3.0))?,
        Problem::sym_exp_sum(4, 3, 1)?.with_valid_radius(Some(3.0))?,
    ])
}

/// Counts proposition and certificate violations at `n` random points and
/// `n` random pairs inside the certificate radius.
pub fn property_checks(p: &Problem, n: usize, seed: u64) -> Result<Vec<CheckResult>> {
    let radius = p
        .certificate()
        .valid_radius
        .ok_or_else(|| domain("property checks need a finite certificate radius"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs = p.x_star().clone();
    let (mut grad_bound, mut exponential, mut smooth) = (0usize, 0usize, 0usize);
    for _ in 0..n {
        let x = sample_ball(&mut rng, &xs, radius);
        grad_bound += usize::from(!check_gradient_gap_bound(p, &x)?.holds);
        let y = sample_ball(&mut rng, &xs, radius);
        exponential += usize::from(!check_gradient_growth(p, &x, &y)?.holds);
        smooth += usize::from(!check_generalized_smoothness(p, &x, &y, DEFAULT_SEG_SAMPLES)?.holds);
    }
    let mk = |what: &str, v: usize| CheckResult {
        name: format!("{}/d{}/{what}", p.name(), p.dimension()),
        passed: v == 0,
        detail: json!({ "samples": n, "violations": v, "radius": radius }),
    };
    Ok(vec![
        mk("gradient_bound", grad_bound),
        mk("exponential", exponential),
        mk("generalized_smoothness", smooth),
    ])
}

fn clip_lemma_suite(n: usize) -> Result<Vec<CheckResult>> {
    let pareto2 = |d| NoiseModel::new(NoiseKind::SymmetricPareto { scale: 1.0, tail: 2.0 }, d);
    let cases: Vec<(&str, RealVector, NoiseModel, f64, f64)> = vec![
        ("noiseless", RealVector::new(vec![1.0, -1.0])?, NoiseModel::none(2), 10.0, 1.5),
        ("pareto_quarter_lambda", RealVector::basis(2, 0, 5.0), pareto2(2)?, 20.0, 1.5),
        ("pareto_origin", RealVector::zeros(3), pareto2(3)?, 4.0, 1.5),
        (
            "pareto_heavy",
            RealVector::basis(3, 1, 1.0),
            NoiseModel::new(NoiseKind::SymmetricPareto { scale: 0.5, tail: 1.5 }, 3)?,
            4.0,
            1.2,
        ),
        (
            "gaussian",
            RealVector::new(vec![0.5, 0.5, -1.0])?,
            NoiseModel::new(NoiseKind::Gaussian { scale: 1.0 }, 3)?,
            5.0,
            2.0,
        ),
        (
            "stable",
            RealVector::basis(2, 0, 0.5),
            NoiseModel::new(NoiseKind::StableRadial { stability: 1.8, scale: 1.0 }, 2)?,
            6.0,
            1.5,
        ),
    ];
    let mut out = Vec::new();
    for (i, (name, x, model, lambda, alpha)) in cases.into_iter().enumerate() {
        let r = verify_clip_lemma(&x, &model, lambda, alpha, n, &mut derive_stream(1000, i as u64))?;
        let mut passed = r.passed;
        if model.is_none() {
            passed &= r.bias.estimate == 0.0 && r.mse.estimate == 0.0 && r.variance.estimate == 0.0;
        }
        out.push(CheckResult {
            name: name.to_owned(),
            passed,
            detail: serde_json::to_value(&r)?,
        });
    }
    Ok(out)
}

fn bernstein_suite() -> Result<Vec<CheckResult>> {
    let cases = [
        (1.0, 10usize, 10.0, 1000usize),
        (1.0, 100, 30.0, 100_000),
        (1.0, 5, 0.0, 1000),
        (0.5, 400, 15.0, 50_000),
        (2.0, 50, 20.0, 50_000),
    ];
    let mut out = Vec::new();
    for (i, &(c, n, b, trials)) in cases.iter().enumerate() {
        let r = bernstein_tail_check(c, n, b, trials, &mut derive_stream(2000, i as u64))?;
        out.push(CheckResult {
            name: format!("c={c},n={n},b={b}"),
            passed: r.passed,
            detail: serde_json::to_value(r)?,
        });
    }
    Ok(out)
}

fn audit_suite() -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();

    let p = Problem::diagonal_quadratic(&[2.0, 1.0, 0.5], &RealVector::new(vec![1.0, 0.0, -1.0])?)?;
    let x0 = p.x_star() + &RealVector::basis(3, 0, 1.0);
    let params = theorem_params(2.0, 0.0, 1.0, 0.0, 2.0, 1000, 0.1)?;
    let t = run_clip_sgd(
        &p,
        &NoiseModel::none(3),
        &params.optimizer_config(Method::ClipSgd, x0)?,
        &mut derive_stream(0, 0),
    )?;
    let r = audit_trajectory(&p, &t, &params)?;
    out.push(CheckResult {
        name: "deterministic_quadratic".into(),
        passed: r.violations == 0,
        detail: json!({ "violations": r.violations, "case_counts": r.case_counts }),
    });

    let p = Problem::cosh_norm(3)?;
    let noise = NoiseModel::new(NoiseKind::SymmetricPareto { scale: 1.0, tail: 2.0 }, 3)?;
    let params = theorem_params(2.0, 1.0, 1.0, 4f64.powf(2.0 / 3.0), 1.5, 2000, 0.1)?;
    let x0 = RealVector::basis(3, 0, 1.0);
    let (mut violations, mut within, trials) = (0usize, 0usize, 10u64);
    for i in 0..trials {
        let t = run_clip_sgd(
            &p,
            &noise,
            &params.optimizer_config(Method::ClipSgd, x0.clone())?,
            &mut derive_stream(3000, i),
        )?;
        let r = audit_trajectory(&p, &t, &params)?;
        violations += r.violations;
        within += usize::from(r.t3_within_c1);
    }
    out.push(CheckResult {
        name: "cosh_regime2_pareto".into(),
        passed: violations == 0 && within as f64 >= (1.0 - 2.0 * params.delta) * trials as f64,
        detail: json!({ "trials": trials, "violations": violations, "t3_within_c1": within, "c1": params.c1() }),
    });
    Ok(out)
}

fn moments_suite(n: usize) -> Result<Vec<CheckResult>> {
    let models = [
        ("gaussian", NoiseModel::new(NoiseKind::Gaussian { scale: 0.5 }, 4)?),
        ("pareto_2.5", NoiseModel::new(NoiseKind::SymmetricPareto { scale: 1.0, tail: 2.5 }, 4)?),
        ("pareto_2", NoiseModel::new(NoiseKind::SymmetricPareto { scale: 1.0, tail: 2.0 }, 3)?),
        ("stable_1.9", NoiseModel::new(NoiseKind::StableRadial { stability: 1.9, scale: 1.0 }, 2)?),
        ("stable_1.8", NoiseModel::new(NoiseKind::StableRadial { stability: 1.8, scale: 1.0 }, 3)?),
    ];
    let mut out = Vec::new();
    for (i, (name, m)) in models.iter().enumerate() {
        for (j, alpha) in [1.2, 1.5, 2.0].into_iter().enumerate() {
            match empirical_moment_check(m, alpha, n, &mut derive_stream(4000 + i as u64, j as u64)) {
                Ok(r) => out.push(CheckResult {
                    name: format!("{name}/alpha={alpha}"),
                    passed: r.passed,
                    detail: serde_json::to_value(r)?,
                }),
                Err(Error::NoCertificate { .. }) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(out)
}

pub fn run_suite(suite: Suite) -> Result<VerifyReport> {
    let checks = match suite {
        Suite::ClipLemma => clip_lemma_suite(200_000)?,
        Suite::Props => {
            let mut v = Vec::new();
            for (i, p) in builtin_problems()?.iter().enumerate() {
                v.extend(property_checks(p, 10_000, 5000 + i as u64)?);
            }
            v
        }
        Suite::Bernstein => bernstein_suite()?,
        Suite::Audit => audit_suite()?,
        Suite::Moments => moments_suite(200_000)?,
    };
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
    Ok(VerifyReport {
        suite: suite.name(),
        passed: failed.is_empty(),
        failed,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(Suite::parse(s.name()).unwrap(), s);
        }
        assert!(Suite::parse("nope").is_err());
    }

    #[test]
    fn bernstein_and_audit_suites_pass() {
        for s in [Suite::Bernstein, Suite::Audit] {
            let r = run_suite(s).unwrap();
            assert!(r.passed, "{:?}", r.failed);
        }
    }

    #[test]
    fn property_battery_small() {
        for (i, p) in builtin_problems().unwrap().iter().enumerate() {
            for c in property_checks(p, 500, i as u64).unwrap() {
                assert!(c.passed, "{}: {}", c.name, c.detail);
            }
        }
    }
}
