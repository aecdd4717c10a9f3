//! Direction generators for the supported prior covariance choices.
//!
//! Each metric realizes one covariance W as a stateful map g ↦ u = W g.
//! The returned direction is unscaled; the adaptation loop multiplies by the
//! current η. Momentum and Adam are computed in their exponential-average
//! closed forms, which are algebraically identical to the rank-1 covariance
//! updates (see the identity tests below) at O(N) cost.

#![allow(clippy::needless_range_loop)]

use crate::error::{OptError, Result};
use crate::types::{MetricHyper, MetricKind, MetricState, Validate};

/// Creates a metric with zeroed accumulators.
pub fn make_metric(kind: MetricKind, dim: usize, hyper: MetricHyper) -> Result<MetricState> {
    if dim == 0 {
        return Err(OptError::Config(
            "metric dimension must be at least 1".into(),
        ));
    }
    let violations = hyper.violations();
    if !violations.is_empty() {
        return Err(OptError::Config(violations.join("; ")));
    }
    Ok(MetricState {
        kind,
        diag_accum: vec![0.0; dim],
        momentum_buf: vec![0.0; dim],
        step_count: 0,
        hyper,
    })
}

/// Computes u = W g for the current state and advances the state by one step.
pub fn direction(state: &mut MetricState, g: &[f64]) -> Result<Vec<f64>> {
    if g.len() != state.diag_accum.len() {
        return Err(OptError::DimensionMismatch {
            expected: state.diag_accum.len(),
            actual: g.len(),
        });
    }
    if g.iter().any(|x| !x.is_finite()) {
        return Err(OptError::NonFinite("gradient"));
    }
    let h = state.hyper;
    state.step_count += 1;
    let u = match state.kind {
        MetricKind::Sgd => g.to_vec(),
        MetricKind::Adagrad => {
            let mut u = vec![0.0; g.len()];
            for j in 0..g.len() {
                state.diag_accum[j] += g[j] * g[j];
                u[j] = g[j] / (state.diag_accum[j] + h.epsilon).sqrt();
            }
            u
        }
        MetricKind::RmsProp => {
            let mut u = vec![0.0; g.len()];
            for j in 0..g.len() {
                state.diag_accum[j] = h.alpha * state.diag_accum[j] + (1.0 - h.alpha) * g[j] * g[j];
                u[j] = g[j] / (state.diag_accum[j] + h.epsilon).sqrt();
            }
            u
        }
        MetricKind::Momentum => {
            for j in 0..g.len() {
                state.momentum_buf[j] = h.beta * state.momentum_buf[j] + g[j];
            }
            state.momentum_buf.clone()
        }
        MetricKind::Adam => {
            let i = state.step_count as i32;
            let gamma = (1.0 - h.beta2.powi(i)).sqrt() / (1.0 - h.beta1.powi(i));
            let mut u = vec![0.0; g.len()];
            for j in 0..g.len() {
                state.momentum_buf[j] = h.beta1 * state.momentum_buf[j] + (1.0 - h.beta1) * g[j];
                state.diag_accum[j] = h.beta2 * state.diag_accum[j] + (1.0 - h.beta2) * g[j] * g[j];
                u[j] = gamma * state.momentum_buf[j] / (state.diag_accum[j] + h.epsilon).sqrt();
            }
            u
        }
    };
    Ok(u)
}

/// Positive-definiteness test for the momentum rank-1 covariance:
/// true iff β⟨m_prev, g⟩ < −⟨g, g⟩.
pub fn pd_violation(m_prev: &[f64], g: &[f64], beta: f64) -> bool {
    debug_assert_eq!(m_prev.len(), g.len());
    let mg: f64 = m_prev.iter().zip(g).map(|(m, x)| m * x).sum();
    let gg: f64 = g.iter().map(|x| x * x).sum();
    beta * mg < -gg
}

/// Whether the upcoming direction call would violate positive definiteness
/// of the rank-1 covariance. False for the purely diagonal metrics. Must be
/// called before `direction` (it inspects the pre-update buffers).
pub fn pd_violation_for(state: &MetricState, g: &[f64]) -> bool {
    match state.kind {
        MetricKind::Sgd | MetricKind::Adagrad | MetricKind::RmsProp => false,
        MetricKind::Momentum => pd_violation(&state.momentum_buf, g, state.hyper.beta),
        MetricKind::Adam => {
            // Analogous condition with the V-weighted inner products:
            // β₁⟨V m_prev, g⟩ < −(1−β₁)⟨g, V g⟩ where V is this step's diagonal.
            let h = state.hyper;
            let i = state.step_count as i32 + 1;
            let gamma = (1.0 - h.beta2.powi(i)).sqrt() / (1.0 - h.beta1.powi(i));
            let mut vm_g = 0.0;
            let mut g_vg = 0.0;
            for j in 0..g.len() {
                let accum = h.beta2 * state.diag_accum[j] + (1.0 - h.beta2) * g[j] * g[j];
                let v = gamma / (accum + h.epsilon).sqrt();
                vm_g += v * state.momentum_buf[j] * g[j];
                g_vg += v * g[j] * g[j];
            }
            h.beta1 * vm_g < -(1.0 - h.beta1) * g_vg
        }
    }
}
