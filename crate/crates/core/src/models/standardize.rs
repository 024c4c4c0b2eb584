use serde::{Deserialize, Serialize};

use super::FeatureMatrix;
use crate::error::{Error, Result};

/// Smallest standard deviation used when scaling; constant columns map to 0.
pub const STD_FLOOR: f64 = 1e-8;

/// Per-column centering and scaling fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    /// Column means and population standard deviations, floored at
    /// [`STD_FLOOR`].
    pub fn fit(train: &FeatureMatrix) -> Result<Self> {
        let n = train.n_rows();
        if n < 2 {
            return Err(Error::Invalid(format!("standardizer needs at least 2 rows, got {n}")));
        }
        let d = train.n_features();
        let mut mean = vec![0.0; d];
        for row in &train.rows {
            for (m, x) in mean.iter_mut().zip(row) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut var = vec![0.0; d];
        for row in &train.rows {
            for ((v, x), m) in var.iter_mut().zip(row).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let std = var
            .into_iter()
            .map(|v| (v / n as f64).sqrt().max(STD_FLOOR))
            .collect();
        Ok(Standardizer { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }

    pub fn transform(&self, m: &FeatureMatrix) -> Result<FeatureMatrix> {
        if m.n_features() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: m.n_features(),
            });
        }
        let mut out = m.clone();
        out.rows = m.rows.iter().map(|r| self.transform_row(r)).collect();
        Ok(out)
    }
}
