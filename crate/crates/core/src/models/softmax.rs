use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::FeatureMatrix;
use crate::corpus::RoleLabel;
use crate::error::{Error, Result};

pub const NUM_CLASSES: usize = RoleLabel::COUNT;

/// Multinomial logistic regression over the four roles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxClassifier {
    /// `NUM_CLASSES` rows of `d` weights.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxParams {
    pub lr: f64,
    pub epochs: usize,
    pub l2: f64,
    pub seed: u64,
    /// Mini-batch size; `None` trains full-batch.
    pub batch_size: Option<usize>,
}

impl Default for SoftmaxParams {
    fn default() -> Self {
        SoftmaxParams {
            lr: 0.1,
            epochs: 500,
            l2: 1e-4,
            seed: 0,
            batch_size: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SoftmaxTraining {
    pub model: SoftmaxClassifier,
    /// Full-data objective before the first epoch and after each epoch.
    pub losses: Vec<f64>,
}

/// Gradient of the regularized objective.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxGradient {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

impl SoftmaxClassifier {
    pub fn zeros(d: usize) -> Self {
        SoftmaxClassifier {
            weights: vec![vec![0.0; d]; NUM_CLASSES],
            bias: vec![0.0; NUM_CLASSES],
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| b + w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>())
            .collect()
    }

    pub fn probabilities(&self, x: &[f64]) -> Vec<f64> {
        softmax(&self.logits(x))
    }

    /// Mean cross-entropy plus `l2 / 2 * ||W||^2` (bias unpenalized), and its
    /// gradient, over the rows in `batch`.
    pub fn loss_and_gradient(
        &self,
        rows: &[Vec<f64>],
        labels: &[usize],
        batch: &[usize],
        l2: f64,
    ) -> (f64, SoftmaxGradient) {
        let d = self.dim();
        let mut grad = SoftmaxGradient {
            weights: vec![vec![0.0; d]; NUM_CLASSES],
            bias: vec![0.0; NUM_CLASSES],
        };
        let mut loss = 0.0;
        let n = batch.len() as f64;
        for &i in batch {
            let x = &rows[i];
            let logits = self.logits(x);
            let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let log_z = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
            loss -= logits[labels[i]] - log_z;
            for (k, z) in logits.iter().enumerate() {
                let residual = (z - log_z).exp() - if k == labels[i] { 1.0 } else { 0.0 };
                grad.bias[k] += residual / n;
                for (g, xj) in grad.weights[k].iter_mut().zip(x) {
                    *g += residual * xj / n;
                }
            }
        }
        loss /= n;
        let mut penalty = 0.0;
        for (wk, gk) in self.weights.iter().zip(&mut grad.weights) {
            for (w, g) in wk.iter().zip(gk.iter_mut()) {
                penalty += w * w;
                *g += l2 * w;
            }
        }
        (loss + 0.5 * l2 * penalty, grad)
    }

    fn step(&mut self, grad: &SoftmaxGradient, lr: f64) {
        for (wk, gk) in self.weights.iter_mut().zip(&grad.weights) {
            for (w, g) in wk.iter_mut().zip(gk) {
                *w -= lr * g;
            }
        }
        for (b, g) in self.bias.iter_mut().zip(&grad.bias) {
            *b -= lr * g;
        }
    }

    fn check_dim(&self, m: &FeatureMatrix) -> Result<()> {
        if m.n_features() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: m.n_features(),
            });
        }
        Ok(())
    }

    /// Predicted role and class probabilities per row.
    pub fn predict(&self, rows: &FeatureMatrix) -> Result<Vec<(RoleLabel, Vec<f64>)>> {
        self.check_dim(rows)?;
        Ok(rows
            .rows
            .iter()
            .map(|x| {
                let p = self.probabilities(x);
                let role = RoleLabel::from_code(argmax(&p)).expect("four classes");
                (role, p)
            })
            .collect())
    }
}

/// Gradient descent on the regularized cross-entropy, starting from zero
/// weights. Full-batch unless `params.batch_size` is set, in which case the
/// row order is reshuffled every epoch from `params.seed`.
pub fn train_softmax(train: &FeatureMatrix, params: &SoftmaxParams) -> Result<SoftmaxTraining> {
    let labels = train
        .role_codes()
        .ok_or_else(|| Error::Invalid("training rows lack role labels".into()))?;
    if train.n_rows() == 0 {
        return Err(Error::Invalid("no training rows".into()));
    }
    if !(params.lr > 0.0 && params.lr.is_finite()) {
        return Err(Error::Invalid(format!("learning rate must be positive, got {}", params.lr)));
    }
    if params.epochs == 0 {
        return Err(Error::Invalid("epochs must be >= 1".into()));
    }
    if params.l2.is_nan() || params.l2 < 0.0 {
        return Err(Error::Invalid("l2 must be nonnegative".into()));
    }
    if params.batch_size == Some(0) {
        return Err(Error::Invalid("batch size must be >= 1".into()));
    }
    let all: Vec<usize> = (0..train.n_rows()).collect();
    let mut model = SoftmaxClassifier::zeros(train.n_features());
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut order = all.clone();
    let mut losses = Vec::with_capacity(params.epochs + 1);

    let (mut loss, mut grad) = model.loss_and_gradient(&train.rows, &labels, &all, params.l2);
    losses.push(loss);
    for epoch in 1..=params.epochs {
        match params.batch_size {
            None => model.step(&grad, params.lr),
            Some(bs) => {
                order.shuffle(&mut rng);
                for batch in order.chunks(bs) {
                    let (_, g) = model.loss_and_gradient(&train.rows, &labels, batch, params.l2);
                    model.step(&g, params.lr);
                }
            }
        }
        (loss, grad) = model.loss_and_gradient(&train.rows, &labels, &all, params.l2);
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        losses.push(loss);
    }
    Ok(SoftmaxTraining { model, losses })
}
