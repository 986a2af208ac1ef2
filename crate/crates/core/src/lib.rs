//! Clipped stochastic gradient descent under heavy-tailed noise and
//! `(L0, L1)`-smoothness.
//!
//! The crate provides the clipping operator, convex test problems with
//! certified smoothness constants, noise models with moment certificates,
//! Clip-SGD and its variants with full per-step instrumentation, verification
//! of the descent inequalities and auxiliary lemmas, and a deterministic
//! parallel Monte Carlo harness.

pub mod analysis;
pub mod error;
pub mod harness;
pub mod noise;
pub mod omega;
pub mod optimizers;
pub mod problems;
pub mod quadrature;
pub mod vector;

pub use error::{Error, Result};
pub use noise::{derive_stream, moment_certificate, sample_noise, stochastic_gradient, MomentCertificate, NoiseKind, NoiseModel, SeedStream};
pub use omega::{omega_constant, OmegaConstant};
pub use optimizers::{
    criterion, run_clip_sgd, run_clip_sgd_ds, run_method, run_sgd, theorem_params, Case, Method, OptimizerConfig, StepRecord, TheoremParams,
    Trajectory,
};
pub use problems::{suboptimality, Function, Problem, SmoothnessCertificate};
pub use vector::{clip, norm, RealVector};
