//! Evaluation-counting wrapper for cost-contract checks.

use super::BatchObjective;
use crate::error::Result;
use crate::types::{Observation, ParamVector};

/// Counts objective-value and gradient evaluations of the wrapped problem.
/// `evaluate` costs one of each; `reevaluate` costs one value only.
#[derive(Debug, Clone)]
pub struct CountingObjective<P> {
    inner: P,
    pub value_evals: usize,
    pub gradient_evals: usize,
}

impl<P: BatchObjective> CountingObjective<P> {
    pub fn new(inner: P) -> Self {
        Self {
            inner,
            value_evals: 0,
            gradient_evals: 0,
        }
    }

    pub fn reset_counts(&mut self) {
        self.value_evals = 0;
        self.gradient_evals = 0;
    }
}

impl<P: BatchObjective> BatchObjective for CountingObjective<P> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn evaluate(&mut self, theta: &ParamVector) -> Result<Observation> {
        self.value_evals += 1;
        self.gradient_evals += 1;
        self.inner.evaluate(theta)
    }

    fn reevaluate(&mut self, theta: &ParamVector) -> Result<f64> {
        self.value_evals += 1;
        self.inner.reevaluate(theta)
    }

    fn advance_batch(&mut self) {
        self.inner.advance_batch();
    }

    fn steps_per_epoch(&self) -> usize {
        self.inner.steps_per_epoch()
    }
}
