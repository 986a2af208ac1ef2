//! Experiment configuration, parallel Monte Carlo sweeps, persistence and
//! the built-in verification suites.

pub mod config;
pub mod montecarlo;
pub mod output;
pub mod verify;

pub use config::{estimate_smoothness_from_config, Experiment, ExperimentConfig, Overrides, ProblemSpec, ResolvedRun, SmoothnessSampling, StartRule};
pub use montecarlo::{montecarlo_to_dir, quantile_report, run_montecarlo, run_trial, QuantileEntry, QuantileReport, TrialOutcome};
pub use verify::{run_suite, Suite, VerifyReport};
