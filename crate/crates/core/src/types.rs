//! Domain types shared by all modules. No algorithms live here.

use crate::error::{OptError, Result};

/// Relative tolerance for the per-example mean-consistency check.
const MEAN_CONSISTENCY_RTOL: f64 = 1e-9;

/// Checks a type's invariants and reports every violation found.
pub trait Validate {
    /// Returns one human-readable entry per violated invariant; empty when valid.
    fn violations(&self) -> Vec<String>;
}

/// Dense parameter vector θ ∈ R^N, the optimization state.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    values: Vec<f64>,
}

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            values: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Euclidean distance to another vector of the same dimension.
    pub fn distance(&self, other: &ParamVector) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl Validate for ParamVector {
    fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.values.is_empty() {
            out.push("parameter dimension must be at least 1".to_string());
        }
        if self.values.iter().any(|x| !x.is_finite()) {
            out.push("parameter entries must all be finite".to_string());
        }
        out
    }
}

impl std::ops::Index<usize> for ParamVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// One minibatch evaluation: loss value, gradient and optional noise information.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    /// Batch loss ℓ_B(θ).
    pub value: f64,
    /// Batch gradient g, same length as θ.
    pub gradient: Vec<f64>,
    /// Individual per-example losses (regularizer included), when available.
    pub per_example: Option<Vec<f64>>,
    /// Observation variance R ≥ 0 attributed to this evaluation.
    pub noise_var: f64,
}

impl Observation {
    pub fn new(value: f64, gradient: Vec<f64>) -> Self {
        Self {
            value,
            gradient,
            per_example: None,
            noise_var: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    pub fn grad_norm(&self) -> f64 {
        self.gradient.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

impl Validate for Observation {
    fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.value.is_finite() {
            out.push("loss value must be finite".to_string());
        }
        if self.gradient.is_empty() {
            out.push("gradient must be non-empty".to_string());
        }
        if self.gradient.iter().any(|x| !x.is_finite()) {
            out.push("gradient entries must all be finite".to_string());
        }
        if self.noise_var.is_nan() || self.noise_var < 0.0 {
            out.push(format!("noise_var must be >= 0, got {}", self.noise_var));
        }
        if let Some(per) = &self.per_example {
            if per.is_empty() {
                out.push("per_example losses must be non-empty when present".to_string());
            } else {
                let mean = per.iter().sum::<f64>() / per.len() as f64;
                let scale = self.value.abs().max(mean.abs()).max(1.0);
                if (mean - self.value).abs() > MEAN_CONSISTENCY_RTOL * scale {
                    out.push(format!(
                        "mean of per-example losses {mean} does not match value {} within {MEAN_CONSISTENCY_RTOL:e} relative",
                        self.value
                    ));
                }
            }
        }
        out
    }
}

/// The optimizer family realized by a prior covariance choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Sgd,
    Adagrad,
    RmsProp,
    Momentum,
    Adam,
}

impl MetricKind {
    pub fn name(&self) -> &'static str {
        match self {
            MetricKind::Sgd => "sgd",
            MetricKind::Adagrad => "adagrad",
            MetricKind::RmsProp => "rmsprop",
            MetricKind::Momentum => "momentum",
            MetricKind::Adam => "adam",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sgd" => Ok(MetricKind::Sgd),
            "adagrad" => Ok(MetricKind::Adagrad),
            "rmsprop" => Ok(MetricKind::RmsProp),
            "momentum" => Ok(MetricKind::Momentum),
            "adam" => Ok(MetricKind::Adam),
            other => Err(OptError::Config(format!("unknown optimizer '{other}'"))),
        }
    }
}

/// Hyperparameters for the diagonal/momentum metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricHyper {
    /// Momentum coefficient β ∈ [0, 1).
    pub beta: f64,
    /// Adam first-moment coefficient β₁ ∈ [0, 1).
    pub beta1: f64,
    /// Adam second-moment coefficient β₂ ∈ [0, 1).
    pub beta2: f64,
    /// RMSprop averaging coefficient α ∈ (0, 1).
    pub alpha: f64,
    /// Guard added inside the inverse square roots; must be > 0.
    pub epsilon: f64,
}

impl Default for MetricHyper {
    fn default() -> Self {
        Self {
            beta: 0.5,
            beta1: 0.5,
            beta2: 0.999,
            alpha: 0.99,
            epsilon: 1e-10,
        }
    }
}

impl Validate for MetricHyper {
    fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(0.0..1.0).contains(&self.beta) {
            out.push(format!("beta must lie in [0, 1), got {}", self.beta));
        }
        if !(0.0..1.0).contains(&self.beta1) {
            out.push(format!("beta1 must lie in [0, 1), got {}", self.beta1));
        }
        if !(0.0..1.0).contains(&self.beta2) {
            out.push(format!("beta2 must lie in [0, 1), got {}", self.beta2));
        }
        if self.alpha.is_nan() || self.alpha <= 0.0 || self.alpha >= 1.0 {
            out.push(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            out.push(format!("epsilon must be > 0, got {}", self.epsilon));
        }
        out
    }
}

/// Stateful accumulators realizing one row of the covariance table.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricState {
    pub kind: MetricKind,
    /// Diagonal accumulator G (Adagrad/RMSprop/Adam second moment); entrywise ≥ 0.
    pub diag_accum: Vec<f64>,
    /// Momentum buffer m.
    pub momentum_buf: Vec<f64>,
    /// Number of direction calls taken so far.
    pub step_count: u32,
    pub hyper: MetricHyper,
}

impl Validate for MetricState {
    fn violations(&self) -> Vec<String> {
        let mut out = self.hyper.violations();
        if self.diag_accum.iter().any(|x| *x < 0.0 || !x.is_finite()) {
            out.push("diag_accum entries must be finite and >= 0".to_string());
        }
        if self.diag_accum.len() != self.momentum_buf.len() {
            out.push("diag_accum and momentum_buf must have equal length".to_string());
        }
        out
    }
}

/// How the observation variance R is chosen each step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseMode {
    /// R = 0 (the default).
    Zero,
    /// A constant R ≥ 0.
    Fixed(f64),
    /// Estimate R from the per-example losses of the observation.
    Clt,
    /// R = max(0, c · f) for the current loss value f.
    ProportionalToLoss(f64),
}

/// When the ratio test and η update run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cadence {
    /// Adapt on every iteration.
    EveryStep,
    /// Adapt only during epochs 1, 2, 4, 8, …; other steps cost the same
    /// as the base optimizer (no re-evaluation).
    PowerOfTwoEpochs,
}

/// Controller parameters for the learning-rate adaptation loop.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptConfig {
    /// Initial learning rate η₀ > 0.
    pub eta0: f64,
    /// Multiplicative increase factor (> 1).
    pub alpha_up: f64,
    /// Multiplicative decrease factor (in (0, 1)).
    pub alpha_down: f64,
    /// Grow η when the decrease ratio exceeds this.
    pub ratio_hi: f64,
    /// Shrink η when the decrease ratio falls below this.
    pub ratio_lo: f64,
    /// Known lower bound f*, when available.
    pub f_star: Option<f64>,
    pub noise_mode: NoiseMode,
    pub cadence: Cadence,
    /// Threshold below which phi is treated as degenerate.
    pub phi_eps: f64,
    pub eta_min: f64,
    pub eta_max: f64,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        Self {
            eta0: 1e-3,
            alpha_up: 1.2,
            alpha_down: 0.5,
            ratio_hi: 4.0 / 3.0,
            ratio_lo: 3.0 / 4.0,
            f_star: None,
            noise_mode: NoiseMode::Zero,
            cadence: Cadence::EveryStep,
            phi_eps: 1e-12,
            eta_min: 1e-12,
            eta_max: 1e6,
        }
    }
}

impl AdaptConfig {
    /// Ratio thresholds pushed to ±∞ so η never changes; useful for
    /// fixed-learning-rate baselines.
    pub fn fixed_eta(eta0: f64) -> Self {
        Self {
            eta0,
            ratio_hi: f64::INFINITY,
            ratio_lo: f64::NEG_INFINITY,
            ..Self::default()
        }
    }
}

impl Validate for AdaptConfig {
    fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.eta0.is_nan() || self.eta0 <= 0.0 {
            out.push(format!("eta0 must be > 0, got {}", self.eta0));
        }
        if self.alpha_up.is_nan() || self.alpha_up <= 1.0 {
            out.push(format!("alpha_up must be > 1, got {}", self.alpha_up));
        }
        if self.alpha_down.is_nan() || self.alpha_down <= 0.0 || self.alpha_down >= 1.0 {
            out.push(format!(
                "alpha_down must lie in (0, 1), got {}",
                self.alpha_down
            ));
        }
        if self.ratio_lo.is_nan()
            || self.ratio_hi.is_nan()
            || self.ratio_lo >= 1.0
            || self.ratio_hi <= 1.0
        {
            out.push(format!(
                "ratio thresholds must satisfy ratio_lo < 1 < ratio_hi, got {} and {}",
                self.ratio_lo, self.ratio_hi
            ));
        }
        if self.eta0.is_nan() || self.eta0 < self.eta_min || self.eta0 > self.eta_max {
            out.push(format!(
                "eta0 = {} must lie in [eta_min, eta_max] = [{}, {}]",
                self.eta0, self.eta_min, self.eta_max
            ));
        }
        if self.phi_eps.is_nan() || self.phi_eps <= 0.0 {
            out.push(format!("phi_eps must be > 0, got {}", self.phi_eps));
        }
        if let NoiseMode::Fixed(r) = self.noise_mode {
            if r.is_nan() || r < 0.0 {
                out.push(format!("fixed noise variance must be >= 0, got {r}"));
            }
        }
        if let NoiseMode::ProportionalToLoss(c) = self.noise_mode {
            if c.is_nan() || c < 0.0 {
                out.push(format!(
                    "proportional noise coefficient must be >= 0, got {c}"
                ));
            }
        }
        out
    }
}

/// Events recorded on a single optimizer step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepFlags(u8);

impl StepFlags {
    /// phi = gᵀv was not positive; the Polyak scaling was not applied.
    pub const PHI_NON_POSITIVE: StepFlags = StepFlags(1 << 0);
    /// The observation fell below the supplied f*; Δf clamped to 0, step skipped.
    pub const DELTA_F_CLAMPED: StepFlags = StepFlags(1 << 1);
    /// The rank-1 metric update violated positive definiteness (diagnostic only).
    pub const PD_VIOLATION: StepFlags = StepFlags(1 << 2);
    /// η hit the lower clamp.
    pub const ETA_CLAMPED_MIN: StepFlags = StepFlags(1 << 3);
    /// η hit the upper clamp.
    pub const ETA_CLAMPED_MAX: StepFlags = StepFlags(1 << 4);
    /// Re-evaluation was non-finite; the trial step was rejected and θ restored.
    pub const STEP_REJECTED: StepFlags = StepFlags(1 << 5);

    const ALL: [(StepFlags, &'static str); 6] = [
        (StepFlags::PHI_NON_POSITIVE, "PhiNonPositive"),
        (StepFlags::DELTA_F_CLAMPED, "DeltaFClamped"),
        (StepFlags::PD_VIOLATION, "PDViolation"),
        (StepFlags::ETA_CLAMPED_MIN, "EtaClampedMin"),
        (StepFlags::ETA_CLAMPED_MAX, "EtaClampedMax"),
        (StepFlags::STEP_REJECTED, "StepRejected"),
    ];

    pub fn empty() -> Self {
        StepFlags(0)
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn contains(&self, other: StepFlags) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn insert(&mut self, other: StepFlags) {
        self.0 |= other.0;
    }

    /// Semicolon-joined flag names, empty string when no flags are set.
    pub fn encode(&self) -> String {
        let names: Vec<&str> = Self::ALL
            .iter()
            .filter(|(f, _)| self.contains(*f))
            .map(|(_, n)| *n)
            .collect();
        names.join(";")
    }

    /// Parses the `encode` format back into flags.
    pub fn decode(s: &str) -> Result<Self> {
        let mut flags = StepFlags::empty();
        for name in s.split(';').filter(|p| !p.is_empty()) {
            let found = Self::ALL.iter().find(|(_, n)| *n == name);
            match found {
                Some((f, _)) => flags.insert(*f),
                None => return Err(OptError::Config(format!("unknown step flag '{name}'"))),
            }
        }
        Ok(flags)
    }
}

impl std::fmt::Display for StepFlags {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.encode())
    }
}

/// Per-iteration trace row of the adaptation loop.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub iter: usize,
    pub epoch: usize,
    /// Loss at θ before the step.
    pub f_before: f64,
    /// Same-batch re-evaluation at the new θ; NaN when no re-evaluation ran.
    pub f_after: f64,
    /// φ = gᵀv.
    pub phi: f64,
    /// Δf fed to the inference step; NaN when no inference step ran.
    pub delta_f: f64,
    /// Observed over expected decrease; NaN when the ratio test was skipped.
    pub ratio: f64,
    pub eta_before: f64,
    pub eta_after: f64,
    /// Euclidean norm of the parameter change.
    pub step_norm: f64,
    pub flags: StepFlags,
    /// Observation variance R used in the step.
    pub r: f64,
}

impl Validate for StepRecord {
    fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        // eta_after must be one of {eta_before·up, eta_before·down, eta_before}
        // up to clamping, but the factors live in AdaptConfig; here we only
        // check internal consistency of the clamp flags.
        if self.flags.contains(StepFlags::ETA_CLAMPED_MIN)
            && self.flags.contains(StepFlags::ETA_CLAMPED_MAX)
        {
            out.push("eta cannot clamp at both bounds in one step".to_string());
        }
        if self.step_norm.is_nan() || self.step_norm < 0.0 {
            out.push(format!("step_norm must be >= 0, got {}", self.step_norm));
        }
        if self.r.is_nan() || self.r < 0.0 {
            out.push(format!("noise variance must be >= 0, got {}", self.r));
        }
        out
    }
}
