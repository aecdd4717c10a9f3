//! The probabilistic parameter update: posterior-mean step, the implied
//! quadratic lower bound, and observation-variance estimation.

use crate::error::{OptError, Result};
use crate::types::{NoiseMode, Observation, ParamVector};

/// Everything the posterior-mean update needs for one step.
#[derive(Debug, Clone)]
pub struct InferenceInputs<'a> {
    pub theta: &'a ParamVector,
    /// Step direction v = η W g.
    pub v: &'a [f64],
    /// φ = gᵀ v.
    pub phi: f64,
    /// Batch loss at θ.
    pub f: f64,
    /// Gap Δf = f − f* fed to the update.
    pub delta_f: f64,
    /// Observation variance R ≥ 0.
    pub r: f64,
}

/// Posterior-mean update: θ − v · 2Δf / (φ + R).
///
/// With W = I, R = 0 and known f* this is the Polyak step; with the implied
/// gap Δf = φ/2 and R = 0 it reduces to the plain optimizer step θ − v.
pub fn posterior_step(inputs: &InferenceInputs<'_>, phi_eps: f64) -> Result<ParamVector> {
    let InferenceInputs {
        theta,
        v,
        phi,
        delta_f,
        r,
        ..
    } = *inputs;
    if v.len() != theta.dim() {
        return Err(OptError::DimensionMismatch {
            expected: theta.dim(),
            actual: v.len(),
        });
    }
    if !phi.is_finite() || !delta_f.is_finite() || !r.is_finite() {
        return Err(OptError::NonFinite("inference input"));
    }
    if v.iter().any(|x| !x.is_finite()) || theta.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(OptError::NonFinite("inference input"));
    }
    let denom = phi + r;
    if denom <= phi_eps {
        return Err(OptError::DegenerateDenominator { phi_plus_r: denom });
    }
    let scale = 2.0 * delta_f / denom;
    let values = theta
        .as_slice()
        .iter()
        .zip(v)
        .map(|(t, vj)| t - vj * scale)
        .collect();
    Ok(ParamVector::new(values))
}

/// Gap to the minimum of the implied local quadratic: φ/2.
///
/// The surrogate matches f and g at θ and its minimum sits one optimizer step
/// away, so the gap depends only on φ. `f` participates only in finiteness
/// checking.
pub fn implied_gap(f: f64, phi: f64, phi_eps: f64) -> Result<f64> {
    if !f.is_finite() || !phi.is_finite() {
        return Err(OptError::NonFinite("implied-gap input"));
    }
    if phi <= phi_eps {
        return Err(OptError::NonPositivePhi { phi });
    }
    Ok(phi / 2.0)
}

/// Estimates Var[ℓ_B] from per-example losses: unbiased sample variance over B.
pub fn estimate_noise(per_example: &[f64]) -> Result<f64> {
    let b = per_example.len();
    if b < 2 {
        return Err(OptError::InsufficientSamples { got: b });
    }
    let mean = per_example.iter().sum::<f64>() / b as f64;
    let s2 = per_example
        .iter()
        .map(|x| (x - mean) * (x - mean))
        .sum::<f64>()
        / (b - 1) as f64;
    Ok(s2 / b as f64)
}

/// Resolves the observation variance for one step according to the mode.
pub fn resolve_noise(mode: NoiseMode, obs: &Observation, f: f64) -> Result<f64> {
    match mode {
        NoiseMode::Zero => Ok(0.0),
        NoiseMode::Fixed(r) => Ok(r),
        NoiseMode::Clt => match &obs.per_example {
            Some(per) => estimate_noise(per),
            None => Err(OptError::MissingPerExample),
        },
        NoiseMode::ProportionalToLoss(c) => Ok((c * f).max(0.0)),
    }
}
