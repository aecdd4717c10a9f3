//! The 2-d Rosenbrock valley, minimum 0 at (1, 1).

use super::BatchObjective;
use crate::error::{OptError, Result};
use crate::types::{Observation, ParamVector};

/// f(x, y) = (1 − x)² + 100 (y − x²)².
#[derive(Debug, Clone, Default)]
pub struct RosenbrockProblem;

pub fn rosenbrock_value(x: f64, y: f64) -> f64 {
    let a = 1.0 - x;
    let b = y - x * x;
    a * a + 100.0 * b * b
}

pub fn rosenbrock_eval(theta: &ParamVector) -> Result<Observation> {
    if theta.dim() != 2 {
        return Err(OptError::DimensionMismatch {
            expected: 2,
            actual: theta.dim(),
        });
    }
    let (x, y) = (theta[0], theta[1]);
    let value = rosenbrock_value(x, y);
    let gx = -2.0 * (1.0 - x) - 400.0 * x * (y - x * x);
    let gy = 200.0 * (y - x * x);
    Ok(Observation::new(value, vec![gx, gy]))
}

impl BatchObjective for RosenbrockProblem {
    fn dim(&self) -> usize {
        2
    }

    fn evaluate(&mut self, theta: &ParamVector) -> Result<Observation> {
        rosenbrock_eval(theta)
    }

    fn reevaluate(&mut self, theta: &ParamVector) -> Result<f64> {
        if theta.dim() != 2 {
            return Err(OptError::DimensionMismatch {
                expected: 2,
                actual: theta.dim(),
            });
        }
        Ok(rosenbrock_value(theta[0], theta[1]))
    }
}
