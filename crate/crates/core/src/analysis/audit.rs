//! Per-step check of the case-split descent inequalities along a recorded
//! Clip-SGD trajectory.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::optimizers::{Case, Method, TheoremParams, Trajectory};
use crate::problems::Problem;
use crate::vector::{clip, RealVector};

/// Residual tolerance is `AUDIT_TOL · (1 + R_k²)`.
pub const AUDIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CaseCounts {
    pub t1: usize,
    pub t2: usize,
    pub t3: usize,
}

impl CaseCounts {
    pub fn total(&self) -> usize {
        self.t1 + self.t2 + self.t3
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub cases: Vec<u8>,
    /// `rhs − lhs` of the inequality for each step's case.
    pub residuals: Vec<f64>,
    pub violations: usize,
    /// Steps whose residual fell below the tolerance.
    pub violating_steps: Vec<usize>,
    pub case_counts: CaseCounts,
    pub c1: f64,
    pub t3_count: usize,
    pub t3_within_c1: bool,
    /// `λ/(128 L1 R0)`; absent when `L1 = 0`.
    pub b: Option<f64>,
}

fn refuse(msg: String) -> Error {
    Error::AuditRefused(msg)
}

/// Recomputes the step classes and checks, for every `k`:
///
/// * T1, T2: `γ(f(x_k) − f*) ≤ R_k² − R_{k+1}² − 2γ⟨θ_k, x_k − x*⟩ + 2γ²‖θ_k‖²`, `θ_k = g_k − ∇f(x_k)`;
/// * T3: `R_{k+1}² ≤ R_k² − γλ/(16 L1) − 2γ⟨θ̂_k, x_k − x*⟩`, `θ̂_k = g_k − clip(∇f(x_k), λ/2)`.
///
/// Refuses when the step-size conditions of a case that occurs do not hold.
pub fn audit_trajectory(p: &Problem, t: &Trajectory, params: &TheoremParams) -> Result<AuditReport> {
    if t.method == Method::ClipSgdDs {
        return Err(refuse("the descent cases are stated for single-sample clipping".into()));
    }
    if let Some(step) = t.divergence {
        return Err(refuse(format!("trajectory diverged at step {step}")));
    }
    if t.steps.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (l0, l1, gamma, lambda) = (params.l0, params.l1, t.gamma, t.lambda);
    let x_star = p.x_star();

    let cases: Vec<Case> = t.steps.iter().map(|s| Case::classify(s.grad_norm, l0, l1, lambda)).collect();
    let mut counts = CaseCounts::default();
    for c in &cases {
        match c {
            Case::T1 => counts.t1 += 1,
            Case::T2 => counts.t2 += 1,
            Case::T3 => counts.t3 += 1,
        }
    }
    if counts.t1 > 0 && l0 > 0.0 && gamma > 1.0 / (16.0 * l0) {
        return Err(refuse(format!("case 1 needs gamma <= 1/(16 L0) = {}, got {gamma}", 1.0 / (16.0 * l0))));
    }
    if counts.t2 > 0 && gamma > 1.0 / (8.0 * l1 * lambda) {
        return Err(refuse(format!(
            "case 2 needs gamma <= 1/(8 L1 lambda) = {}, got {gamma}",
            1.0 / (8.0 * l1 * lambda)
        )));
    }
    if counts.t3 > 0 {
        if gamma > 1.0 / (16.0 * l1 * lambda) {
            return Err(refuse(format!(
                "case 3 needs gamma <= 1/(16 L1 lambda) = {}, got {gamma}",
                1.0 / (16.0 * l1 * lambda)
            )));
        }
        if lambda / 2.0 < l0 / l1 {
            return Err(refuse(format!("case 3 needs lambda/2 >= L0/L1 = {}, got lambda = {lambda}", l0 / l1)));
        }
    }

    let mut residuals = Vec::with_capacity(t.steps.len());
    let mut violating_steps = Vec::new();
    for (k, (s, case)) in t.steps.iter().zip(&cases).enumerate() {
        let next: &RealVector = t.steps.get(k + 1).map(|n| &n.x).unwrap_or(&t.final_x);
        let shift = &s.x - x_star;
        let rk2 = shift.norm_squared();
        let rk12 = (next - x_star).norm_squared();
        let grad = p.gradient(&s.x);
        let residual = match case {
            Case::T1 | Case::T2 => {
                let theta = &s.g - &grad;
                rk2 - rk12 - 2.0 * gamma * theta.dot(&shift) + 2.0 * gamma * gamma * theta.norm_squared() - gamma * s.f_gap
            }
            Case::T3 => {
                let theta_hat = &s.g - &clip(&grad, lambda / 2.0)?;
                rk2 - gamma * lambda / (16.0 * l1) - 2.0 * gamma * theta_hat.dot(&shift) - rk12
            }
        };
        if !(residual >= -AUDIT_TOL * (1.0 + rk2)) {
            violating_steps.push(k);
        }
        residuals.push(residual);
    }

    let c1 = params.c1();
    Ok(AuditReport {
        cases: cases.iter().map(|c| c.index()).collect(),
        residuals,
        violations: violating_steps.len(),
        violating_steps,
        case_counts: counts,
        c1,
        t3_count: counts.t3,
        t3_within_c1: counts.t3 as f64 <= c1,
        b: params.b(),
    })
}
