use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::FeatureMatrix;
use crate::error::{Error, Result};

/// A Cholesky pivot this small relative to the largest diagonal entry of
/// the system marks it singular.
const PIVOT_TOLERANCE: f64 = 1e-12;

/// L2-penalized least squares with an unpenalized intercept; predictions are
/// clamped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeRegressor {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub lambda: f64,
}

impl RidgeRegressor {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn raw_prediction(&self, x: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(x).map(|(w, x)| w * x).sum::<f64>()
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        self.raw_prediction(x).clamp(0.0, 1.0)
    }

    pub fn predict(&self, rows: &FeatureMatrix) -> Result<Vec<f64>> {
        if rows.n_features() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: rows.n_features(),
            });
        }
        Ok(rows.rows.iter().map(|x| self.predict_row(x)).collect())
    }
}

/// Solves `(XcᵀXc + λI) w = Xcᵀ yc` on column-centered features and labels,
/// then sets the bias to the mean residual `mean(y - Xw)`. On standardized
/// inputs `Xc = X`, so `w` satisfies the plain normal equations.
pub fn train_ridge(train: &FeatureMatrix, lambda: f64) -> Result<RidgeRegressor> {
    let y = train
        .labels_lir
        .as_ref()
        .ok_or_else(|| Error::Invalid("training rows lack involvement-ratio labels".into()))?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Invalid(format!("lambda must be a nonnegative number, got {lambda}")));
    }
    let n = train.n_rows();
    if n == 0 {
        return Err(Error::Invalid("no training rows".into()));
    }
    let d = train.n_features();
    let x = DMatrix::from_fn(n, d, |i, j| train.rows[i][j]);
    let y = DVector::from_column_slice(y);
    let x_mean = x.row_mean();
    let y_mean = y.mean();
    let mut xc = x.clone();
    for mut row in xc.row_iter_mut() {
        row -= &x_mean;
    }
    let yc = y.add_scalar(-y_mean);

    let weights = if d == 0 {
        DVector::zeros(0)
    } else {
        let mut a = xc.transpose() * &xc;
        for i in 0..d {
            a[(i, i)] += lambda;
        }
        let rhs = xc.transpose() * yc;
        let scale = a.diagonal().max().max(f64::MIN_POSITIVE);
        let chol = a.clone().cholesky().ok_or(Error::Singular)?;
        let l = chol.l_dirty();
        if (0..d).any(|i| l[(i, i)] * l[(i, i)] <= PIVOT_TOLERANCE * scale) {
            return Err(Error::Singular);
        }
        chol.solve(&rhs)
    };
    let bias = (y - &x * &weights).mean();
    Ok(RidgeRegressor {
        weights: weights.iter().copied().collect(),
        bias,
        lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: Vec<Vec<f64>>, y: Vec<f64>) -> FeatureMatrix {
        let d = rows[0].len();
        let n = rows.len();
        FeatureMatrix::new(
            (0..d).map(|j| format!("f{j}")).collect(),
            (0..n).map(|i| format!("r{i}")).collect(),
            rows,
        )
        .unwrap()
        .with_lir(y)
        .unwrap()
    }

    #[test]
    fn constant_target() {
        let m = matrix(vec![vec![1.0, 5.0], vec![2.0, -1.0], vec![7.0, 0.0], vec![3.0, 3.0]], vec![0.5; 4]);
        let r = train_ridge(&m, 0.1).unwrap();
        assert!(r.weights.iter().all(|w| w.abs() < 1e-12));
        assert!((r.bias - 0.5).abs() < 1e-12);
    }

    #[test]
    fn exact_recovery_at_zero_lambda() {
        let rows = vec![
            vec![0.1, 0.3, 0.9],
            vec![0.4, 0.1, 0.2],
            vec![0.7, 0.8, 0.5],
            vec![0.2, 0.6, 0.1],
            vec![0.9, 0.2, 0.7],
        ];
        let y = rows.iter().map(|r| r[0]).collect();
        let r = train_ridge(&matrix(rows, y), 0.0).unwrap();
        assert!((r.weights[0] - 1.0).abs() < 1e-9);
        assert!(r.weights[1].abs() < 1e-9 && r.weights[2].abs() < 1e-9);
        assert!(r.bias.abs() < 1e-9);
    }

    #[test]
    fn huge_lambda_shrinks_to_mean() {
        let m = matrix(vec![vec![0.0], vec![1.0], vec![2.0]], vec![0.0, 0.3, 0.9]);
        let r = train_ridge(&m, 1e12).unwrap();
        assert!(r.weights[0].abs() < 1e-9);
        assert!((r.bias - 0.4).abs() < 1e-9);
    }

    #[test]
    fn collinear_features_are_singular_without_penalty() {
        let rows = vec![vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0], vec![5.0, 10.0]];
        let m = matrix(rows, vec![0.1, 0.2, 0.3, 0.5]);
        assert!(matches!(train_ridge(&m, 0.0), Err(Error::Singular)));
        assert!(train_ridge(&m, 1e-3).is_ok());
    }

    #[test]
    fn predictions_are_clamped() {
        let r = RidgeRegressor { weights: vec![1.0], bias: 0.0, lambda: 0.0 };
        assert_eq!(r.predict_row(&[-0.3]), 0.0);
        assert_eq!(r.predict_row(&[1.7]), 1.0);
        assert_eq!(r.predict_row(&[0.42]), 0.42);
    }

    #[test]
    fn missing_labels() {
        let m = FeatureMatrix::new(vec!["f".into()], vec!["a".into()], vec![vec![1.0]]).unwrap();
        assert!(train_ridge(&m, 1.0).is_err());
    }
}
