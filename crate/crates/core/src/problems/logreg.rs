//! Binary logistic regression over a dense dataset, with synthetic data
//! generation and CSV ingestion.

use super::BatchObjective;
use crate::error::{OptError, Result};
use crate::inference::estimate_noise;
use crate::rng::SplitMix64;
use crate::types::{Observation, ParamVector};

/// Dense feature matrix (row-major, D × N), binary labels and loss settings.
#[derive(Debug, Clone)]
pub struct LogRegDataset {
    features: Vec<f64>,
    labels: Vec<u8>,
    n_features: usize,
    /// ℓ2 coefficient on ‖θ‖².
    pub l2_reg: f64,
    pub batch_size: usize,
}

impl LogRegDataset {
    pub fn new(
        features: Vec<f64>,
        labels: Vec<u8>,
        n_features: usize,
        l2_reg: f64,
        batch_size: usize,
    ) -> Result<Self> {
        let d = labels.len();
        if d == 0 || n_features == 0 {
            return Err(OptError::Config("dataset must be non-empty".into()));
        }
        if features.len() != d * n_features {
            return Err(OptError::DimensionMismatch {
                expected: d * n_features,
                actual: features.len(),
            });
        }
        if batch_size == 0 || batch_size > d {
            return Err(OptError::Config(format!(
                "batch_size must lie in [1, {d}], got {batch_size}"
            )));
        }
        if l2_reg.is_nan() || l2_reg < 0.0 {
            return Err(OptError::Config(format!(
                "l2_reg must be >= 0, got {l2_reg}"
            )));
        }
        if labels.iter().any(|y| *y > 1) {
            return Err(OptError::Config("labels must be 0 or 1".into()));
        }
        Ok(Self {
            features,
            labels,
            n_features,
            l2_reg,
            batch_size,
        })
    }

    /// Two Gaussian clusters at ±(separation/2) along a random unit direction,
    /// unit isotropic noise, alternating labels. Deterministic in the seed.
    pub fn synthetic(seed: u64, d: usize, n: usize, separation: f64) -> Result<Self> {
        if d < 2 || n == 0 {
            return Err(OptError::Config(
                "synthetic dataset needs d >= 2 and n >= 1".into(),
            ));
        }
        let mut rng = SplitMix64::new(seed);
        let mut dir: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        for x in &mut dir {
            *x /= norm;
        }
        let mut features = Vec::with_capacity(d * n);
        let mut labels = Vec::with_capacity(d);
        for row in 0..d {
            let y = (row % 2) as u8;
            let sign = if y == 1 { 0.5 } else { -0.5 };
            for d in &dir {
                features.push(rng.normal() + sign * separation * d);
            }
            labels.push(y);
        }
        Self::new(features, labels, n, 0.0, d.min(32))
    }

    /// Loads "f1,…,fN,label" rows with a header line. Labels must be 0 or 1;
    /// non-numeric cells are reported with their row and column.
    pub fn from_csv(path: &std::path::Path, l2_reg: f64, batch_size: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| OptError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut lines = text.lines().enumerate();
        let header = lines
            .next()
            .ok_or_else(|| OptError::Config("empty dataset file".into()))?;
        let n_cols = header.1.split(',').count();
        if n_cols < 2 {
            return Err(OptError::Config(
                "header must declare at least one feature column and one label column".into(),
            ));
        }
        let n_features = n_cols - 1;
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (line_no, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != n_cols {
                return Err(OptError::Config(format!(
                    "row {}: expected {n_cols} columns, found {}",
                    line_no + 1,
                    cells.len()
                )));
            }
            for (col, cell) in cells.iter().enumerate().take(n_features) {
                let v: f64 = cell.trim().parse().map_err(|_| {
                    OptError::Config(format!(
                        "row {}, column {}: non-numeric cell '{}'",
                        line_no + 1,
                        col + 1,
                        cell.trim()
                    ))
                })?;
                features.push(v);
            }
            let label_cell = cells[n_features].trim();
            let label: f64 = label_cell.parse().map_err(|_| {
                OptError::Config(format!(
                    "row {}, column {}: non-numeric label '{label_cell}'",
                    line_no + 1,
                    n_cols
                ))
            })?;
            if label != 0.0 && label != 1.0 {
                return Err(OptError::Config(format!(
                    "row {}: label must be 0 or 1, got {label_cell}",
                    line_no + 1
                )));
            }
            labels.push(label as u8);
        }
        let d = labels.len();
        Self::new(
            features,
            labels,
            n_features,
            l2_reg,
            batch_size.min(d.max(1)),
        )
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    /// Batch loss, gradient and per-example losses over the given indices.
    /// Per-example losses include the regularizer so their mean equals the
    /// batch value exactly.
    pub fn batch_eval(&self, theta: &ParamVector, batch: &[usize]) -> Result<Observation> {
        if batch.is_empty() {
            return Err(OptError::EmptyBatch);
        }
        if theta.dim() != self.n_features {
            return Err(OptError::DimensionMismatch {
                expected: self.n_features,
                actual: theta.dim(),
            });
        }
        let b = batch.len() as f64;
        let reg = self.l2_reg * theta.as_slice().iter().map(|t| t * t).sum::<f64>();
        let mut per = Vec::with_capacity(batch.len());
        let mut grad = vec![0.0; self.n_features];
        for &i in batch {
            let x = self.row(i);
            let y = self.labels[i] as f64;
            let z: f64 = theta.as_slice().iter().zip(x).map(|(t, v)| t * v).sum();
            // ln(1 + e^z) − y z, computed stably for either sign of z.
            let logloss = if z > 0.0 {
                (1.0 + (-z).exp()).ln() + (1.0 - y) * z
            } else {
                (1.0 + z.exp()).ln() - y * z
            };
            per.push(logloss + reg);
            let p = if z >= 0.0 {
                1.0 / (1.0 + (-z).exp())
            } else {
                let e = z.exp();
                e / (1.0 + e)
            };
            for j in 0..self.n_features {
                grad[j] += (p - y) * x[j];
            }
        }
        for (j, gj) in grad.iter_mut().enumerate() {
            *gj = *gj / b + 2.0 * self.l2_reg * theta[j];
        }
        let value = per.iter().sum::<f64>() / b;
        let noise_var = if batch.len() >= 2 {
            estimate_noise(&per)?
        } else {
            0.0
        };
        Ok(Observation {
            value,
            gradient: grad,
            per_example: Some(per),
            noise_var,
        })
    }

    /// Value-only batch loss over the given indices.
    pub fn batch_value(&self, theta: &ParamVector, batch: &[usize]) -> Result<f64> {
        if batch.is_empty() {
            return Err(OptError::EmptyBatch);
        }
        let b = batch.len() as f64;
        let reg = self.l2_reg * theta.as_slice().iter().map(|t| t * t).sum::<f64>();
        let mut total = 0.0;
        for &i in batch {
            let x = self.row(i);
            let y = self.labels[i] as f64;
            let z: f64 = theta.as_slice().iter().zip(x).map(|(t, v)| t * v).sum();
            let logloss = if z > 0.0 {
                (1.0 + (-z).exp()).ln() + (1.0 - y) * z
            } else {
                (1.0 + z.exp()).ln() - y * z
            };
            total += logloss + reg;
        }
        Ok(total / b)
    }

    /// Full-dataset loss.
    pub fn full_loss(&self, theta: &ParamVector) -> Result<f64> {
        let all: Vec<usize> = (0..self.len()).collect();
        self.batch_value(theta, &all)
    }

    /// Fraction of examples classified correctly by sign(θᵀx).
    pub fn accuracy(&self, theta: &ParamVector) -> f64 {
        let mut correct = 0usize;
        for i in 0..self.len() {
            let z: f64 = theta
                .as_slice()
                .iter()
                .zip(self.row(i))
                .map(|(t, v)| t * v)
                .sum();
            let pred = if z >= 0.0 { 1 } else { 0 };
            if pred == self.labels[i] {
                correct += 1;
            }
        }
        correct as f64 / self.len() as f64
    }

    /// Perceptron separability certificate: returns a separating θ when the
    /// dataset is linearly separable within the iteration budget.
    pub fn max_margin_separator(&self, max_passes: usize) -> Option<Vec<f64>> {
        let mut w = vec![0.0; self.n_features];
        for _ in 0..max_passes {
            let mut mistakes = 0;
            for i in 0..self.len() {
                let x = self.row(i);
                let y = if self.labels[i] == 1 { 1.0 } else { -1.0 };
                let z: f64 = w.iter().zip(x).map(|(a, b)| a * b).sum();
                if y * z <= 0.0 {
                    for j in 0..self.n_features {
                        w[j] += y * x[j];
                    }
                    mistakes += 1;
                }
            }
            if mistakes == 0 {
                return Some(w);
            }
        }
        None
    }
}

/// Minibatch view over a dataset with a deterministic in-order batch cursor.
#[derive(Debug, Clone)]
pub struct LogRegProblem {
    dataset: LogRegDataset,
    cursor: usize,
}

impl LogRegProblem {
    pub fn new(dataset: LogRegDataset) -> Self {
        Self { dataset, cursor: 0 }
    }

    pub fn dataset(&self) -> &LogRegDataset {
        &self.dataset
    }

    fn current_batch(&self) -> Vec<usize> {
        let d = self.dataset.len();
        let b = self.dataset.batch_size;
        let n_batches = d.div_ceil(b);
        let k = self.cursor % n_batches;
        let lo = k * b;
        let hi = (lo + b).min(d);
        (lo..hi).collect()
    }
}

impl BatchObjective for LogRegProblem {
    fn dim(&self) -> usize {
        self.dataset.n_features
    }

    fn evaluate(&mut self, theta: &ParamVector) -> Result<Observation> {
        let batch = self.current_batch();
        self.dataset.batch_eval(theta, &batch)
    }

    fn reevaluate(&mut self, theta: &ParamVector) -> Result<f64> {
        let batch = self.current_batch();
        self.dataset.batch_value(theta, &batch)
    }

    fn advance_batch(&mut self) {
        self.cursor += 1;
    }

    fn steps_per_epoch(&self) -> usize {
        self.dataset.len().div_ceil(self.dataset.batch_size)
    }
}
