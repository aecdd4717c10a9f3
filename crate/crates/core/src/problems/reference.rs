//! Textbook implementations of the five base optimizers, written without any
//! code from the metrics module. These serve as the independent side of the
//! base-optimizer equivalence checks.

use crate::types::{MetricHyper, MetricKind};

/// Standalone optimizer state applying θ ← θ − η · dir(g).
#[derive(Debug, Clone)]
pub struct ReferenceOptimizer {
    kind: MetricKind,
    accum: Vec<f64>,
    momentum: Vec<f64>,
    t: u32,
    hyper: MetricHyper,
}

impl ReferenceOptimizer {
    pub fn new(kind: MetricKind, dim: usize, hyper: MetricHyper) -> Self {
        Self {
            kind,
            accum: vec![0.0; dim],
            momentum: vec![0.0; dim],
            t: 0,
            hyper,
        }
    }

    /// One update: returns the new parameter vector.
    pub fn step(&mut self, theta: &[f64], g: &[f64], eta: f64) -> Vec<f64> {
        assert_eq!(theta.len(), g.len());
        let h = self.hyper;
        self.t += 1;
        match self.kind {
            MetricKind::Sgd => theta.iter().zip(g).map(|(t, gj)| t - eta * gj).collect(),
            MetricKind::Adagrad => {
                let mut out = Vec::with_capacity(theta.len());
                for j in 0..theta.len() {
                    self.accum[j] += g[j] * g[j];
                    out.push(theta[j] - eta * (g[j] / (self.accum[j] + h.epsilon).sqrt()));
                }
                out
            }
            MetricKind::RmsProp => {
                let mut out = Vec::with_capacity(theta.len());
                for j in 0..theta.len() {
                    self.accum[j] = h.alpha * self.accum[j] + (1.0 - h.alpha) * g[j] * g[j];
                    out.push(theta[j] - eta * (g[j] / (self.accum[j] + h.epsilon).sqrt()));
                }
                out
            }
            MetricKind::Momentum => {
                // PyTorch-style heavy ball: m ← βm + g; θ ← θ − η m.
                let mut out = Vec::with_capacity(theta.len());
                for j in 0..theta.len() {
                    self.momentum[j] = h.beta * self.momentum[j] + g[j];
                    out.push(theta[j] - eta * self.momentum[j]);
                }
                out
            }
            MetricKind::Adam => {
                let i = self.t as i32;
                let gamma = (1.0 - h.beta2.powi(i)).sqrt() / (1.0 - h.beta1.powi(i));
                let mut out = Vec::with_capacity(theta.len());
                for j in 0..theta.len() {
                    self.momentum[j] = h.beta1 * self.momentum[j] + (1.0 - h.beta1) * g[j];
                    self.accum[j] = h.beta2 * self.accum[j] + (1.0 - h.beta2) * g[j] * g[j];
                    out.push(
                        theta[j]
                            - eta * (gamma * self.momentum[j] / (self.accum[j] + h.epsilon).sqrt()),
                    );
                }
                out
            }
        }
    }
}
