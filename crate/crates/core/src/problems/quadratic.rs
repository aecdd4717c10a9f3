//! Symmetric positive definite quadratic objectives.

use super::linalg::{matvec, max_asymmetry, Cholesky};
use super::BatchObjective;
use crate::error::{OptError, Result};
use crate::rng::SplitMix64;
use crate::types::{Observation, ParamVector};

const SYMMETRY_TOL: f64 = 1e-12;

/// f(θ) = ½ (θ − θ*)ᵀ B (θ − θ*) + f_min with B symmetric positive definite.
#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    hessian: Vec<f64>,
    minimizer: Vec<f64>,
    f_min: f64,
    n: usize,
}

impl QuadraticProblem {
    /// Builds the problem, verifying symmetry and positive definiteness
    /// (Cholesky success is the certificate).
    pub fn new(hessian: Vec<f64>, minimizer: Vec<f64>, f_min: f64) -> Result<Self> {
        let n = minimizer.len();
        if hessian.len() != n * n {
            return Err(OptError::DimensionMismatch {
                expected: n * n,
                actual: hessian.len(),
            });
        }
        if n == 0 {
            return Err(OptError::Config(
                "quadratic dimension must be at least 1".into(),
            ));
        }
        let asym = max_asymmetry(&hessian, n);
        if asym > SYMMETRY_TOL {
            return Err(OptError::Config(format!(
                "hessian asymmetry {asym:e} exceeds {SYMMETRY_TOL:e}"
            )));
        }
        Cholesky::factor(&hessian, n)?;
        Ok(Self {
            hessian,
            minimizer,
            f_min,
            n,
        })
    }

    /// Diagonal hessian with the given eigenvalues.
    pub fn diagonal(eigenvalues: &[f64], minimizer: Vec<f64>, f_min: f64) -> Result<Self> {
        let n = eigenvalues.len();
        let mut h = vec![0.0; n * n];
        for (j, lam) in eigenvalues.iter().enumerate() {
            h[j * n + j] = *lam;
        }
        Self::new(h, minimizer, f_min)
    }

    /// Diagonal hessian with eigenvalues log-spaced from 1 to `cond`.
    pub fn log_spaced(n: usize, cond: f64, minimizer: Vec<f64>, f_min: f64) -> Result<Self> {
        let eigs: Vec<f64> = (0..n)
            .map(|j| {
                if n == 1 {
                    1.0
                } else {
                    cond.powf(j as f64 / (n - 1) as f64)
                }
            })
            .collect();
        Self::diagonal(&eigs, minimizer, f_min)
    }

    /// Random SPD hessian with eigenvalues log-spaced in [1, cond], rotated by
    /// a sequence of random Givens rotations so the eigenbasis is not axis
    /// aligned. Deterministic in the seed.
    pub fn random_spd(rng: &mut SplitMix64, n: usize, cond: f64, f_min: f64) -> Result<Self> {
        let mut h = vec![0.0; n * n];
        for j in 0..n {
            let lam = if n == 1 {
                1.0
            } else {
                cond.powf(j as f64 / (n - 1) as f64)
            };
            h[j * n + j] = lam;
        }
        // Apply G H Gᵀ for random Givens rotations G (spectrum preserved).
        for _ in 0..(3 * n) {
            let p = rng.below(n);
            let mut q = rng.below(n);
            if p == q {
                q = (q + 1) % n;
            }
            if n == 1 {
                break;
            }
            let angle = rng.uniform(0.0, std::f64::consts::PI);
            let (c, s) = (angle.cos(), angle.sin());
            // rows p, q
            for j in 0..n {
                let hp = h[p * n + j];
                let hq = h[q * n + j];
                h[p * n + j] = c * hp - s * hq;
                h[q * n + j] = s * hp + c * hq;
            }
            // columns p, q
            for i in 0..n {
                let hp = h[i * n + p];
                let hq = h[i * n + q];
                h[i * n + p] = c * hp - s * hq;
                h[i * n + q] = s * hp + c * hq;
            }
        }
        // Symmetrize away rounding drift.
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (h[i * n + j] + h[j * n + i]);
                h[i * n + j] = avg;
                h[j * n + i] = avg;
            }
        }
        let minimizer: Vec<f64> = (0..n).map(|_| rng.uniform(-2.0, 2.0)).collect();
        Self::new(h, minimizer, f_min)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn minimizer(&self) -> &[f64] {
        &self.minimizer
    }

    pub fn f_min(&self) -> f64 {
        self.f_min
    }

    pub fn hessian(&self) -> &[f64] {
        &self.hessian
    }

    /// Exact value and gradient at θ.
    pub fn eval(&self, theta: &ParamVector) -> Result<Observation> {
        if theta.dim() != self.n {
            return Err(OptError::DimensionMismatch {
                expected: self.n,
                actual: theta.dim(),
            });
        }
        let d: Vec<f64> = theta
            .as_slice()
            .iter()
            .zip(&self.minimizer)
            .map(|(t, m)| t - m)
            .collect();
        let g = matvec(&self.hessian, self.n, &d);
        let value = 0.5 * d.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>() + self.f_min;
        Ok(Observation::new(value, g))
    }
}

impl BatchObjective for QuadraticProblem {
    fn dim(&self) -> usize {
        self.n
    }

    fn evaluate(&mut self, theta: &ParamVector) -> Result<Observation> {
        self.eval(theta)
    }

    fn reevaluate(&mut self, theta: &ParamVector) -> Result<f64> {
        Ok(self.eval(theta)?.value)
    }
}

/// Exact inverse-Hessian metric for quadratics: direction(g) = B⁻¹ g.
/// Intended for tests and diagnostics at desk scale.
#[derive(Debug, Clone)]
pub struct HessianMetric {
    chol: Cholesky,
    n: usize,
}

impl HessianMetric {
    pub fn new(problem: &QuadraticProblem) -> Result<Self> {
        Ok(Self {
            chol: Cholesky::factor(problem.hessian(), problem.dim())?,
            n: problem.dim(),
        })
    }

    pub fn direction(&self, g: &[f64]) -> Result<Vec<f64>> {
        if g.len() != self.n {
            return Err(OptError::DimensionMismatch {
                expected: self.n,
                actual: g.len(),
            });
        }
        Ok(self.chol.solve(g))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::{posterior_step, InferenceInputs};

    #[test]
    fn value_and_gradient_at_minimizer() {
        let p = QuadraticProblem::diagonal(&[1.0, 100.0], vec![0.5, -0.5], 3.0).unwrap();
        let obs = p.eval(&ParamVector::new(vec![0.5, -0.5])).unwrap();
        assert_eq!(obs.value, 3.0);
        assert_eq!(obs.gradient, vec![0.0, 0.0]);
    }

    #[test]
    fn isotropic_case() {
        let p = QuadraticProblem::diagonal(&[1.0, 1.0], vec![0.0, 0.0], 0.0).unwrap();
        let obs = p.eval(&ParamVector::new(vec![2.0, 0.0])).unwrap();
        assert_eq!(obs.value, 2.0);
        assert_eq!(obs.gradient, vec![2.0, 0.0]);
    }

    #[test]
    fn anisotropic_case() {
        let p = QuadraticProblem::diagonal(&[1.0, 100.0], vec![0.0, 0.0], 0.0).unwrap();
        let obs = p.eval(&ParamVector::new(vec![1.0, 1.0])).unwrap();
        assert_eq!(obs.value, 50.5);
        assert_eq!(obs.gradient, vec![1.0, 100.0]);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = SplitMix64::new(71);
        let p = QuadraticProblem::random_spd(&mut rng, 4, 25.0, 0.7).unwrap();
        let h = 1e-6;
        for _ in 0..100 {
            let theta: Vec<f64> = (0..4).map(|_| rng.uniform(-3.0, 3.0)).collect();
            let obs = p.eval(&ParamVector::new(theta.clone())).unwrap();
            for j in 0..4 {
                let mut tp = theta.clone();
                tp[j] += h;
                let fp = p.eval(&ParamVector::new(tp.clone())).unwrap().value;
                tp[j] = theta[j] - h;
                let fm = p.eval(&ParamVector::new(tp)).unwrap().value;
                let fd = (fp - fm) / (2.0 * h);
                let scale = fd.abs().max(1.0);
                assert!(
                    (obs.gradient[j] - fd).abs() / scale < 1e-5,
                    "coord {j}: {} vs fd {fd}",
                    obs.gradient[j]
                );
            }
        }
    }

    #[test]
    fn rejects_asymmetric_or_indefinite() {
        let asym = vec![1.0, 0.5, 0.4, 1.0];
        assert!(QuadraticProblem::new(asym, vec![0.0, 0.0], 0.0).is_err());
        let indef = vec![1.0, 2.0, 2.0, 1.0];
        assert!(QuadraticProblem::new(indef, vec![0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn hessian_metric_identity_and_diagonal() {
        let p = QuadraticProblem::diagonal(&[1.0, 1.0], vec![0.0, 0.0], 0.0).unwrap();
        let m = HessianMetric::new(&p).unwrap();
        let u = m.direction(&[0.3, -0.7]).unwrap();
        assert!((u[0] - 0.3).abs() < 1e-15);
        assert!((u[1] + 0.7).abs() < 1e-15);

        let p = QuadraticProblem::diagonal(&[2.0, 4.0], vec![0.0, 0.0], 0.0).unwrap();
        let m = HessianMetric::new(&p).unwrap();
        let u = m.direction(&[2.0, 4.0]).unwrap();
        assert!((u[0] - 1.0).abs() < 1e-14);
        assert!((u[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn newton_metric_one_step_optimality() {
        // posterior step with W = B⁻¹, R = 0, Δf = f − f* lands on θ*.
        let mut rng = SplitMix64::new(55);
        for trial in 0..20 {
            let n = 2 + rng.below(8);
            let p = QuadraticProblem::random_spd(&mut rng, n, 50.0, 1.0).unwrap();
            let metric = HessianMetric::new(&p).unwrap();
            let theta = ParamVector::new((0..n).map(|_| rng.uniform(-3.0, 3.0)).collect());
            let obs = p.eval(&theta).unwrap();
            let v = metric.direction(&obs.gradient).unwrap();
            let phi: f64 = obs.gradient.iter().zip(&v).map(|(a, b)| a * b).sum();
            if phi <= 1e-12 {
                continue; // started at the minimizer
            }
            let out = posterior_step(
                &InferenceInputs {
                    theta: &theta,
                    v: &v,
                    phi,
                    f: obs.value,
                    delta_f: obs.value - p.f_min(),
                    r: 0.0,
                },
                1e-12,
            )
            .unwrap();
            let target = ParamVector::new(p.minimizer().to_vec());
            let rel = out.distance(&target) / target.norm().max(1.0);
            assert!(rel < 1e-10, "trial {trial}: relative distance {rel:e}");
        }
    }
}
