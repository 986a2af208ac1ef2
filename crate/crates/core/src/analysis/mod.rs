//! Verification of per-step descent inequalities and auxiliary lemmas, plus
//! the statistics used to summarize Monte Carlo runs.

pub mod audit;
pub mod lemmas;
pub mod smoothness;
pub mod stats;

pub use audit::{audit_trajectory, AuditReport};
pub use lemmas::{bernstein_tail_check, verify_clip_lemma, BernsteinReport, ClipLemmaReport};
pub use smoothness::{estimate_smoothness, SmoothnessEstimate};
pub use stats::{event_frequency, fit_rate, flag_frequency, quantile, RateFit, RunningMoments};
