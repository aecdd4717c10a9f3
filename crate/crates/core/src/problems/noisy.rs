//! Additive Gaussian value noise for deterministic objectives.

use super::BatchObjective;
use crate::error::Result;
use crate::rng::SplitMix64;
use crate::types::{Observation, ParamVector};

/// Wraps a deterministic objective and adds ε ~ N(0, R) to the loss value.
/// One ε is drawn per batch and reused until `advance_batch`, so evaluation
/// and same-batch re-evaluation see the same offset.
#[derive(Debug, Clone)]
pub struct NoisyValue<P> {
    inner: P,
    rng: SplitMix64,
    variance: f64,
    current_offset: f64,
}

impl<P: BatchObjective> NoisyValue<P> {
    pub fn new(inner: P, variance: f64, seed: u64) -> Self {
        let mut rng = SplitMix64::new(seed);
        let std_dev = variance.sqrt();
        let current_offset = rng.normal_with(0.0, std_dev);
        Self {
            inner,
            rng,
            variance,
            current_offset,
        }
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }
}

impl<P: BatchObjective> BatchObjective for NoisyValue<P> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn evaluate(&mut self, theta: &ParamVector) -> Result<Observation> {
        let mut obs = self.inner.evaluate(theta)?;
        obs.value += self.current_offset;
        obs.per_example = None; // offsets invalidate the per-example decomposition
        obs.noise_var = self.variance;
        Ok(obs)
    }

    fn reevaluate(&mut self, theta: &ParamVector) -> Result<f64> {
        Ok(self.inner.reevaluate(theta)? + self.current_offset)
    }

    fn advance_batch(&mut self) {
        self.inner.advance_batch();
        self.current_offset = self.rng.normal_with(0.0, self.variance.sqrt());
    }

    fn steps_per_epoch(&self) -> usize {
        self.inner.steps_per_epoch()
    }
}
