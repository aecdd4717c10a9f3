//! Stochastic first-order optimization with inference-based parameter updates
//! and automatic learning-rate adaptation.
//!
//! The parameter update treats the minimizer of a local quadratic model as a
//! latent variable observed through the noisy batch loss. Its posterior mean,
//!
//! θ' = θ − W g · 2(f − f*) / (gᵀ W g + R),
//!
//! generalizes the Polyak step to an arbitrary positive definite metric W.
//! Choosing W per [`types::MetricKind`] recovers SGD, Adagrad, RMSprop,
//! momentum and Adam directions; the [`adapter`] wraps any such metric,
//! compares observed against expected decrease on a same-batch re-evaluation,
//! and scales the learning rate multiplicatively.
//!
//! Modules:
//! - [`types`]: plain-value domain types (parameters, observations, configs, traces).
//! - [`metrics`]: stateful direction generators u = W g.
//! - [`inference`]: the posterior-mean step, implied lower bound and noise estimation.
//! - [`adapter`]: the step/run loop with ratio-based η control.
//! - [`problems`]: quadratic, Rosenbrock and logistic-regression objectives,
//!   noise injection, evaluation counting and independent reference optimizers.
//! - [`rng`]: seedable SplitMix64 generator for reproducible experiments.

pub mod adapter;
pub mod error;
pub mod inference;
pub mod metrics;
pub mod problems;
pub mod rng;
pub mod types;

pub use adapter::{AdaptiveOptimizer, RunReport, StopReason, StoppingCriteria};
pub use error::{OptError, Result};
pub use types::{
    AdaptConfig, Cadence, MetricHyper, MetricKind, MetricState, NoiseMode, Observation,
    ParamVector, StepFlags, StepRecord, Validate,
};
