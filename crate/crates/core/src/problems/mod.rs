//! Desk-scale objectives with exact values and gradients, minibatch
//! machinery, and independent reference implementations used as oracles.

mod counting;
mod linalg;
mod logreg;
mod noisy;
mod quadratic;
mod reference;
mod rosenbrock;

pub use counting::CountingObjective;
pub use logreg::{LogRegDataset, LogRegProblem};
pub use noisy::NoisyValue;
pub use quadratic::{HessianMetric, QuadraticProblem};
pub use reference::ReferenceOptimizer;
pub use rosenbrock::{rosenbrock_eval, rosenbrock_value, RosenbrockProblem};

use crate::error::Result;
use crate::types::{Observation, ParamVector};

/// A minibatch objective driving the adaptation loop.
///
/// The contract mirrors the same-batch re-evaluation requirement: calling
/// `evaluate` or `reevaluate` repeatedly without `advance_batch` must return
/// bit-identical results for equal θ.
pub trait BatchObjective {
    /// Parameter dimension N.
    fn dim(&self) -> usize;

    /// Loss and gradient of the current batch at θ.
    fn evaluate(&mut self, theta: &ParamVector) -> Result<Observation>;

    /// Value-only loss of the current batch at θ (no gradient work).
    fn reevaluate(&mut self, theta: &ParamVector) -> Result<f64>;

    /// Moves the batch cursor to the next batch. A no-op for deterministic
    /// full-batch problems.
    fn advance_batch(&mut self) {}

    /// Number of optimizer steps that make up one epoch.
    fn steps_per_epoch(&self) -> usize {
        1
    }
}
