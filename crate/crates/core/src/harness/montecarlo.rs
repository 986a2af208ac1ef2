//! Deterministic parallel Monte Carlo over `(K, trial)` jobs.
//!
//! Every job derives its own stream from `(base_seed, trial_index)`; the same
//! trial index is reused across K so that runs at different horizons share
//! noise draws. Results are gathered in job order, so outputs do not depend on
//! the worker count.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::config::{Experiment, ResolvedRun};
use super::output::{fmt_f64, trajectory_csv, write_json, write_text, CRITERIA_HEADER};
use crate::analysis::audit::{audit_trajectory, CaseCounts};
use crate::analysis::stats::{event_frequency, fit_rate, flag_frequency, quantile};
use crate::error::{Error, Result};
use crate::noise::derive_stream;
use crate::optimizers::{criterion, run_method, Method, Trajectory};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialAudit {
    pub violations: usize,
    pub case_counts: CaseCounts,
    pub t3_within_c1: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub trial_index: u64,
    pub criterion: f64,
    pub diverged: bool,
    pub divergence_step: Option<usize>,
    pub max_dist: f64,
    pub t3_count: usize,
    pub final_gap: f64,
    /// `Err` carries the reason the audit was refused.
    pub audit: std::result::Result<TrialAudit, String>,
}

/// One trial at horizon `run.k`.
pub fn run_trial(exp: &Experiment, run: &ResolvedRun, trial_index: u64) -> Result<Trajectory> {
    let cfg = exp.optimizer_config(run)?;
    let mut stream = derive_stream(exp.config.base_seed, trial_index);
    run_method(&exp.problem, &exp.noise, &cfg, &mut stream)
}

pub fn summarize_trial(exp: &Experiment, run: &ResolvedRun, trial_index: u64, t: &Trajectory) -> Result<TrialOutcome> {
    let params = exp.effective_params(run);
    let audit = if exp.config.method == Method::ClipSgdDs {
        Err("the descent cases are stated for single-sample clipping".to_owned())
    } else {
        match audit_trajectory(&exp.problem, t, &params) {
            Ok(r) => Ok(TrialAudit {
                violations: r.violations,
                case_counts: r.case_counts,
                t3_within_c1: r.t3_within_c1,
            }),
            Err(Error::AuditRefused(msg)) => Err(msg),
            Err(e) => return Err(e),
        }
    };
    Ok(TrialOutcome {
        trial_index,
        criterion: criterion(&exp.problem, t, run.regime)?,
        diverged: t.diverged(),
        divergence_step: t.divergence,
        max_dist: t.max_dist(),
        t3_count: t.case_count(crate::optimizers::Case::T3),
        final_gap: t.final_gap(&exp.problem)?,
        audit,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct KResults {
    pub k: u64,
    pub outcomes: Vec<TrialOutcome>,
}

#[derive(Debug, Clone, Serialize)]
pub struct JobFailure {
    pub k: u64,
    pub trial_index: u64,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct MonteCarloResults {
    pub per_k: Vec<KResults>,
    pub failures: Vec<JobFailure>,
}

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = p.downcast_ref::<&str>() {
        (*s).to_owned()
    } else if let Some(s) = p.downcast_ref::<String>() {
        s.clone()
    } else {
        "worker panicked".to_owned()
    }
}

pub fn trajectory_path(dir: &Path, k: u64, trial_index: u64) -> PathBuf {
    dir.join("trajectories").join(format!("K{k}")).join(format!("trial_{trial_index}.csv"))
}

/// Runs all `(K, trial)` jobs on `workers` threads. With `save_dir`, each
/// job also writes its trajectory CSV.
pub fn run_montecarlo(exp: &Experiment, workers: usize, save_dir: Option<&Path>) -> Result<MonteCarloResults> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let jobs: Vec<(usize, u64)> = (0..exp.runs.len())
        .flat_map(|r| (0..exp.config.trials as u64).map(move |i| (r, i)))
        .collect();
    let results: Vec<std::result::Result<TrialOutcome, String>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(r, i)| {
                let run = &exp.runs[r];
                let job = || -> Result<TrialOutcome> {
                    let t = run_trial(exp, run, i)?;
                    if let Some(dir) = save_dir {
                        write_text(&trajectory_path(dir, run.k, i), &trajectory_csv(&t))?;
                    }
                    summarize_trial(exp, run, i, &t)
                };
                match catch_unwind(AssertUnwindSafe(job)) {
                    Ok(Ok(o)) => Ok(o),
                    Ok(Err(e)) => Err(e.to_string()),
                    Err(p) => Err(panic_message(p)),
                }
            })
            .collect()
    });

    let mut per_k: Vec<KResults> = exp
        .runs
        .iter()
        .map(|r| KResults {
            k: r.k,
            outcomes: Vec::with_capacity(exp.config.trials),
        })
        .collect();
    let mut failures = Vec::new();
    for (&(r, i), res) in jobs.iter().zip(results) {
        match res {
            Ok(o) => per_k[r].outcomes.push(o),
            Err(message) => failures.push(JobFailure {
                k: exp.runs[r].k,
                trial_index: i,
                message,
            }),
        }
    }
    Ok(MonteCarloResults { per_k, failures })
}

pub fn criteria_csv(outcomes: &[TrialOutcome]) -> String {
    let mut out = String::from(CRITERIA_HEADER);
    out.push('\n');
    for o in outcomes {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            o.trial_index,
            fmt_f64(o.criterion),
            o.diverged,
            fmt_f64(o.max_dist),
            o.t3_count
        ));
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct QuantileEntry {
    pub k: u64,
    pub n: usize,
    pub confidence: f64,
    pub quantile: f64,
    /// Regime 2 only: the quantile at the weaker `1 − 2δ` level.
    pub relaxed_confidence: Option<f64>,
    pub relaxed_quantile: Option<f64>,
    /// Rate with constants and log factors set to 1.
    pub theory_bound: f64,
    /// `2R0²/(γK)`.
    pub explicit_bound: f64,
    pub within_explicit_bound: f64,
    pub lambda: Option<f64>,
    pub gamma: f64,
    pub regime: u8,
    pub k_lower_bound_regime2: f64,
    pub k_lower_bound_satisfied: bool,
    pub diverged: usize,
    /// Fraction of trials with `max_k R_k ≤ √2·R0 + γλ`.
    pub confinement: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct QuantileReport {
    pub problem: String,
    pub method: Method,
    pub alpha: f64,
    pub delta: f64,
    pub sigma: f64,
    pub r0: f64,
    pub quantiles: Vec<QuantileEntry>,
    pub slope: Option<f64>,
    pub slope_stderr: Option<f64>,
    pub theory_slope: Option<f64>,
    /// Every `(1−δ)`-quantile is within its explicit bound.
    pub passed: bool,
}

pub fn quantile_report(exp: &Experiment, results: &MonteCarloResults) -> Result<QuantileReport> {
    let delta = exp.config.delta;
    let mut entries = Vec::new();
    for (run, kr) in exp.runs.iter().zip(&results.per_k) {
        if kr.outcomes.is_empty() {
            continue;
        }
        let crit: Vec<f64> = kr.outcomes.iter().map(|o| o.criterion).collect();
        let params = exp.effective_params(run);
        let explicit_bound = params.explicit_bound();
        let relaxed = (run.regime == 2 && 2.0 * delta < 1.0).then_some(1.0 - 2.0 * delta);
        let confinement = run
            .lambda
            .map(|l| {
                let flags: Vec<bool> = kr.outcomes.iter().map(|o| o.max_dist <= 2f64.sqrt() * exp.r0 + run.gamma * l).collect();
                flag_frequency(&flags)
            })
            .transpose()?;
        entries.push(QuantileEntry {
            k: run.k,
            n: crit.len(),
            confidence: 1.0 - delta,
            quantile: quantile(&crit, 1.0 - delta)?,
            relaxed_confidence: relaxed,
            relaxed_quantile: relaxed.map(|c| quantile(&crit, c)).transpose()?,
            theory_bound: params.shape_bound(),
            explicit_bound,
            within_explicit_bound: event_frequency(&crit, explicit_bound)?,
            lambda: run.lambda,
            gamma: run.gamma,
            regime: run.regime,
            k_lower_bound_regime2: run.params.k_lower_bound_regime2,
            k_lower_bound_satisfied: run.params.k_lower_bound_satisfied,
            diverged: kr.outcomes.iter().filter(|o| o.diverged).count(),
            confinement,
        });
    }
    let (slope, slope_stderr, theory_slope) = if entries.len() >= 3 {
        let ks: Vec<u64> = entries.iter().map(|e| e.k).collect();
        let q: Vec<f64> = entries.iter().map(|e| e.quantile).collect();
        let fit = fit_rate(&ks, &q).ok();
        let shape: Vec<f64> = entries.iter().map(|e| e.theory_bound).collect();
        (fit.map(|f| f.slope), fit.map(|f| f.stderr), fit_rate(&ks, &shape).ok().map(|f| f.slope))
    } else {
        (None, None, None)
    };
    let passed = !entries.is_empty() && entries.iter().all(|e| e.quantile <= e.explicit_bound);
    Ok(QuantileReport {
        problem: exp.problem_name.clone(),
        method: exp.config.method,
        alpha: exp.config.alpha,
        delta,
        sigma: exp.sigma,
        r0: exp.r0,
        quantiles: entries,
        slope,
        slope_stderr,
        theory_slope,
        passed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditEntry {
    pub k: u64,
    pub trials_audited: usize,
    pub refused: Option<String>,
    pub violations: usize,
    pub trials_with_violations: usize,
    pub case_counts: CaseCounts,
    pub c1: f64,
    pub t3_count: usize,
    pub t3_within_c1: f64,
    pub required_fraction: f64,
    pub b: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditSummary {
    pub audits: Vec<AuditEntry>,
    pub violations: usize,
    pub passed: bool,
}

pub fn audit_summary(exp: &Experiment, results: &MonteCarloResults) -> AuditSummary {
    let mut audits = Vec::new();
    for (run, kr) in exp.runs.iter().zip(&results.per_k) {
        let params = exp.effective_params(run);
        let mut entry = AuditEntry {
            k: run.k,
            trials_audited: 0,
            refused: None,
            violations: 0,
            trials_with_violations: 0,
            case_counts: CaseCounts::default(),
            c1: params.c1(),
            t3_count: 0,
            t3_within_c1: 0.0,
            required_fraction: 1.0 - 2.0 * exp.config.delta,
            b: params.b(),
        };
        let mut within = 0usize;
        for o in &kr.outcomes {
            match &o.audit {
                Ok(a) => {
                    entry.trials_audited += 1;
                    entry.violations += a.violations;
                    entry.trials_with_violations += usize::from(a.violations > 0);
                    entry.case_counts.t1 += a.case_counts.t1;
                    entry.case_counts.t2 += a.case_counts.t2;
                    entry.case_counts.t3 += a.case_counts.t3;
                    entry.t3_count = entry.t3_count.max(a.case_counts.t3);
                    within += usize::from(a.t3_within_c1);
                }
                Err(msg) => {
                    if entry.refused.is_none() {
                        entry.refused = Some(format!("trial {}: {msg}", o.trial_index));
                    }
                }
            }
        }
        if entry.trials_audited > 0 {
            entry.t3_within_c1 = within as f64 / entry.trials_audited as f64;
        }
        audits.push(entry);
    }
    let violations = audits.iter().map(|a| a.violations).sum();
    let passed = violations == 0 && audits.iter().all(|a| a.trials_audited > 0 && a.t3_within_c1 >= a.required_fraction);
    AuditSummary { audits, violations, passed }
}

/// Runs the sweep and writes `config.resolved.json`, `criteria_K<k>.csv`,
/// `quantile_report.json` and `audit_report.json` into `dir`. Completed
/// trials are written even when some jobs fail; the failure is then returned.
pub fn montecarlo_to_dir(exp: &Experiment, dir: &Path, workers: usize, save_trajectories: bool) -> Result<(QuantileReport, AuditSummary)> {
    std::fs::create_dir_all(dir)?;
    write_json(&dir.join("config.resolved.json"), exp)?;
    let results = run_montecarlo(exp, workers, save_trajectories.then_some(dir))?;
    for kr in &results.per_k {
        write_text(&dir.join(format!("criteria_K{}.csv", kr.k)), &criteria_csv(&kr.outcomes))?;
    }
    let report = quantile_report(exp, &results)?;
    write_json(&dir.join("quantile_report.json"), &report)?;
    let audit = audit_summary(exp, &results);
    write_json(&dir.join("audit_report.json"), &audit)?;
    if let Some(f) = results.failures.first() {
        return Err(Error::Config(format!(
            "{} job(s) failed; first: K={} trial={}: {}",
            results.failures.len(),
            f.k,
            f.trial_index,
            f.message
        )));
    }
    Ok((report, audit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::ExperimentConfig;

    fn exp(trials: usize) -> Experiment {
        let text = format!(
            r#"{{
            "problem": {{"kind": "diagonal_quadratic", "eigenvalues": [1, 0.5, 2]}},
            "x0": {{"rule": "axis", "distance": 1}},
            "noise": {{"kind": "symmetric_pareto", "scale": 1, "tail": 2}},
            "method": "clip_sgd", "alpha": 1.5, "delta": 0.1, "base_seed": 3,
            "trials": {trials}, "k_values": [16, 32, 64]
        }}"#
        );
        Experiment::resolve(ExperimentConfig::from_json(&text).unwrap()).unwrap()
    }

    #[test]
    fn results_do_not_depend_on_workers() {
        let e = exp(12);
        let a = run_montecarlo(&e, 1, None).unwrap();
        let b = run_montecarlo(&e, 4, None).unwrap();
        for (x, y) in a.per_k.iter().zip(&b.per_k) {
            assert_eq!(x.outcomes, y.outcomes);
            assert_eq!(criteria_csv(&x.outcomes), criteria_csv(&y.outcomes));
        }
    }

    #[test]
    fn outcomes_are_indexed_in_order() {
        let e = exp(7);
        let r = run_montecarlo(&e, 3, None).unwrap();
        assert!(r.failures.is_empty());
        for kr in &r.per_k {
            let idx: Vec<u64> = kr.outcomes.iter().map(|o| o.trial_index).collect();
            assert_eq!(idx, (0..7).collect::<Vec<_>>());
        }
    }

    #[test]
    fn trial_matches_direct_run() {
        let e = exp(2);
        let run = &e.runs[1];
        let t = run_trial(&e, run, 1).unwrap();
        let cfg = e.optimizer_config(run).unwrap();
        let direct = crate::optimizers::run_clip_sgd(&e.problem, &e.noise, &cfg, &mut derive_stream(3, 1)).unwrap();
        assert_eq!(t, direct);
    }

    #[test]
    fn reports_are_consistent() {
        let e = exp(20);
        let r = run_montecarlo(&e, 2, None).unwrap();
        let q = quantile_report(&e, &r).unwrap();
        assert_eq!(q.quantiles.len(), 3);
        for (entry, kr) in q.quantiles.iter().zip(&r.per_k) {
            let crit: Vec<f64> = kr.outcomes.iter().map(|o| o.criterion).collect();
            assert_eq!(entry.quantile, quantile(&crit, 0.9).unwrap());
            assert_eq!(entry.n, 20);
            assert_eq!(entry.regime, 1);
        }
        assert!(q.slope.is_some());
        let a = audit_summary(&e, &r);
        assert_eq!(a.violations, 0);
        assert_eq!(a.audits[0].trials_audited, 20);
    }
}
