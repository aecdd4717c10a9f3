//! The adaptation loop: evaluate, form the direction, take the inference
//! step, re-evaluate the same batch, and adapt η multiplicatively from the
//! observed/expected decrease ratio.

use crate::error::{OptError, Result};
use crate::inference::{implied_gap, posterior_step, resolve_noise, InferenceInputs};
use crate::metrics::{direction, pd_violation_for};
use crate::problems::BatchObjective;
use crate::types::{
    AdaptConfig, Cadence, MetricState, ParamVector, StepFlags, StepRecord, Validate,
};

/// Early-exit thresholds for `run`.
#[derive(Debug, Clone, Copy, Default)]
pub struct StoppingCriteria {
    /// Stop once the batch loss falls to this value or below.
    pub loss_tol: Option<f64>,
    /// Stop once the batch gradient norm falls to this value or below.
    pub grad_tol: Option<f64>,
}

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxIters,
    LossTol,
    GradTol,
    /// The batch loss became non-finite; the trace up to that point is kept.
    NonFiniteLoss,
}

#[derive(Debug, Clone, Copy)]
pub struct RunReport {
    pub stop: StopReason,
    pub iterations: usize,
}

/// Multiplicative η update from the decrease ratio, clamped to the configured
/// bounds. A non-finite ratio counts as "step too large".
pub fn update_eta(eta: f64, ratio: f64, cfg: &AdaptConfig) -> f64 {
    decide_eta(eta, ratio, cfg).0
}

fn decide_eta(eta: f64, ratio: f64, cfg: &AdaptConfig) -> (f64, StepFlags) {
    let proposed = if !ratio.is_finite() {
        eta * cfg.alpha_down
    } else if ratio > cfg.ratio_hi {
        eta * cfg.alpha_up
    } else if ratio < cfg.ratio_lo {
        eta * cfg.alpha_down
    } else {
        eta
    };
    let mut flags = StepFlags::empty();
    let clamped = if proposed < cfg.eta_min {
        flags.insert(StepFlags::ETA_CLAMPED_MIN);
        cfg.eta_min
    } else if proposed > cfg.eta_max {
        flags.insert(StepFlags::ETA_CLAMPED_MAX);
        cfg.eta_max
    } else {
        proposed
    };
    (clamped, flags)
}

/// One optimizer instance: metric state, controller configuration, the
/// current parameters and learning rate, and the accumulated trace.
#[derive(Debug, Clone)]
pub struct AdaptiveOptimizer {
    metric: MetricState,
    config: AdaptConfig,
    theta: ParamVector,
    eta: f64,
    iter: usize,
    epoch: usize,
    trace: Vec<StepRecord>,
    last_grad_norm: f64,
}

impl AdaptiveOptimizer {
    pub fn new(metric: MetricState, config: AdaptConfig, theta0: ParamVector) -> Result<Self> {
        let violations = config.violations();
        if !violations.is_empty() {
            return Err(OptError::Config(violations.join("; ")));
        }
        let theta_violations = theta0.violations();
        if !theta_violations.is_empty() {
            return Err(OptError::Config(theta_violations.join("; ")));
        }
        if metric.diag_accum.len() != theta0.dim() {
            return Err(OptError::DimensionMismatch {
                expected: theta0.dim(),
                actual: metric.diag_accum.len(),
            });
        }
        let eta = config.eta0;
        Ok(Self {
            metric,
            config,
            theta: theta0,
            eta,
            iter: 0,
            epoch: 1,
            trace: Vec::new(),
            last_grad_norm: f64::INFINITY,
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn theta(&self) -> &ParamVector {
        &self.theta
    }

    pub fn iterations(&self) -> usize {
        self.iter
    }

    pub fn trace(&self) -> &[StepRecord] {
        &self.trace
    }

    pub fn into_trace(self) -> Vec<StepRecord> {
        self.trace
    }

    /// Executes one iteration of the loop against the problem's current
    /// batch, advancing the batch cursor afterwards.
    pub fn step(&mut self, problem: &mut dyn BatchObjective) -> Result<StepRecord> {
        let spe = problem.steps_per_epoch().max(1);
        self.epoch = 1 + self.iter / spe;
        let adapt_now = match self.config.cadence {
            Cadence::EveryStep => true,
            Cadence::PowerOfTwoEpochs => self.epoch.is_power_of_two(),
        };

        let obs = problem.evaluate(&self.theta)?;
        let f = obs.value;
        if !f.is_finite() {
            return Err(OptError::NonFinite("batch loss"));
        }
        self.last_grad_norm = obs.grad_norm();

        let mut flags = StepFlags::empty();
        if pd_violation_for(&self.metric, &obs.gradient) {
            flags.insert(StepFlags::PD_VIOLATION);
        }
        let u = direction(&mut self.metric, &obs.gradient)?;
        let v: Vec<f64> = u.iter().map(|x| self.eta * x).collect();
        let phi: f64 = obs.gradient.iter().zip(&v).map(|(a, b)| a * b).sum();
        let r = resolve_noise(self.config.noise_mode, &obs, f)?;

        // Observation below a supplied bound: Δf clamps to 0 and the step is
        // skipped; stepping on a negative gap would move uphill.
        if let Some(f_star) = self.config.f_star {
            if f - f_star < 0.0 {
                flags.insert(StepFlags::DELTA_F_CLAMPED);
                return Ok(self.finish_step(problem, f, f, phi, 0.0, f64::NAN, 0.0, r, flags));
            }
        }

        if phi <= self.config.phi_eps {
            flags.insert(StepFlags::PHI_NON_POSITIVE);
            return match self.config.f_star {
                // Implied bound: the inference factor is algebraically 1, so
                // the plain optimizer step stands even without a usable φ.
                None => {
                    let theta_new = ParamVector::new(
                        self.theta
                            .as_slice()
                            .iter()
                            .zip(&v)
                            .map(|(t, vj)| t - vj)
                            .collect(),
                    );
                    let step_norm = self.theta.distance(&theta_new);
                    self.theta = theta_new;
                    Ok(self.finish_step(
                        problem,
                        f,
                        f64::NAN,
                        phi,
                        f64::NAN,
                        f64::NAN,
                        step_norm,
                        r,
                        flags,
                    ))
                }
                // With a known f* the η-scaled step is not defined by the
                // surrogate; skipping keeps the iterates independent of η
                // while the momentum buffer decays back toward the gradient.
                Some(_) => {
                    Ok(self.finish_step(problem, f, f, phi, f64::NAN, f64::NAN, 0.0, r, flags))
                }
            };
        }

        let delta_f = match self.config.f_star {
            Some(f_star) => f - f_star,
            None => implied_gap(f, phi, self.config.phi_eps)?,
        };
        let theta_new = posterior_step(
            &InferenceInputs {
                theta: &self.theta,
                v: &v,
                phi,
                f,
                delta_f,
                r,
            },
            self.config.phi_eps,
        )?;

        if !adapt_now {
            // Cadence says skip: no re-evaluation, the step costs the same as
            // the base optimizer.
            let step_norm = self.theta.distance(&theta_new);
            self.theta = theta_new;
            return Ok(self.finish_step(
                problem,
                f,
                f64::NAN,
                phi,
                delta_f,
                f64::NAN,
                step_norm,
                r,
                flags,
            ));
        }

        let f_plus = problem.reevaluate(&theta_new)?;
        if !f_plus.is_finite() {
            // Divergent trial step: restore θ, halve η, keep going.
            flags.insert(StepFlags::STEP_REJECTED);
            let (eta_new, clamp_flags) = decide_eta(self.eta, f64::NAN, &self.config);
            flags.insert(clamp_flags);
            let rec = self.finish_step_with_eta(
                problem,
                f,
                f_plus,
                phi,
                delta_f,
                f64::NAN,
                0.0,
                r,
                flags,
                eta_new,
            );
            return Ok(rec);
        }

        let ratio = (f - f_plus) / (phi / 2.0);
        let (eta_new, clamp_flags) = decide_eta(self.eta, ratio, &self.config);
        flags.insert(clamp_flags);
        let step_norm = self.theta.distance(&theta_new);
        self.theta = theta_new;
        Ok(self.finish_step_with_eta(
            problem, f, f_plus, phi, delta_f, ratio, step_norm, r, flags, eta_new,
        ))
    }

    #[allow(clippy::too_many_arguments)]
    fn finish_step(
        &mut self,
        problem: &mut dyn BatchObjective,
        f_before: f64,
        f_after: f64,
        phi: f64,
        delta_f: f64,
        ratio: f64,
        step_norm: f64,
        r: f64,
        flags: StepFlags,
    ) -> StepRecord {
        let eta = self.eta;
        self.finish_step_with_eta(
            problem, f_before, f_after, phi, delta_f, ratio, step_norm, r, flags, eta,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn finish_step_with_eta(
        &mut self,
        problem: &mut dyn BatchObjective,
        f_before: f64,
        f_after: f64,
        phi: f64,
        delta_f: f64,
        ratio: f64,
        step_norm: f64,
        r: f64,
        flags: StepFlags,
        eta_after: f64,
    ) -> StepRecord {
        let record = StepRecord {
            iter: self.iter,
            epoch: self.epoch,
            f_before,
            f_after,
            phi,
            delta_f,
            ratio,
            eta_before: self.eta,
            eta_after,
            step_norm,
            flags,
            r,
        };
        self.eta = eta_after;
        self.iter += 1;
        problem.advance_batch();
        self.trace.push(record.clone());
        record
    }

    /// Repeatedly steps until a stopping criterion fires or `max_iters` is
    /// reached. A non-finite batch loss ends the run gracefully with
    /// `StopReason::NonFiniteLoss`; other errors carry the iteration index.
    pub fn run(
        &mut self,
        problem: &mut dyn BatchObjective,
        max_iters: usize,
        stop: &StoppingCriteria,
    ) -> Result<RunReport> {
        if max_iters == 0 {
            return Err(OptError::Config("max_iters must be at least 1".into()));
        }
        for done in 0..max_iters {
            match self.step(problem) {
                Ok(record) => {
                    if let Some(tol) = stop.loss_tol {
                        if record.f_before <= tol {
                            return Ok(RunReport {
                                stop: StopReason::LossTol,
                                iterations: done + 1,
                            });
                        }
                    }
                    if let Some(tol) = stop.grad_tol {
                        if self.last_grad_norm <= tol {
                            return Ok(RunReport {
                                stop: StopReason::GradTol,
                                iterations: done + 1,
                            });
                        }
                    }
                }
                Err(OptError::NonFinite(_)) => {
                    return Ok(RunReport {
                        stop: StopReason::NonFiniteLoss,
                        iterations: done,
                    });
                }
                Err(e) => return Err(e.at(self.iter)),
            }
        }
        Ok(RunReport {
            stop: StopReason::MaxIters,
            iterations: max_iters,
        })
    }
}
