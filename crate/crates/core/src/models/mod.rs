//! Feature matrices, standardization and the two trainable heads: softmax
//! classification for role recognition and ridge regression for the
//! involvement ratio.

mod matrix;
mod persist;
mod ridge;
mod softmax;
mod standardize;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use matrix::FeatureMatrix;
pub use persist::{load_model, save_model, MODEL_MAGIC, MODEL_VERSION};
pub use ridge::{train_ridge, RidgeRegressor};
pub use softmax::{
    argmax, softmax, train_softmax, SoftmaxClassifier, SoftmaxGradient, SoftmaxParams,
    SoftmaxTraining, NUM_CLASSES,
};
pub use standardize::{Standardizer, STD_FLOOR};

use crate::corpus::RoleLabel;
use crate::error::{Error, Result};

/// Role recognition (`rr`) or involvement measurement (`im`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Rr,
    Im,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Rr => "rr",
            Task::Im => "im",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rr" => Ok(Task::Rr),
            "im" => Ok(Task::Im),
            other => Err(Error::Invalid(format!("unknown task {other:?} (expected rr or im)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Head {
    Softmax(SoftmaxClassifier),
    Ridge(RidgeRegressor),
}

/// A head plus the feature names and standardizer it was trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub feature_names: Vec<String>,
    pub standardizer: Standardizer,
    pub head: Head,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Predictions {
    Roles(Vec<(RoleLabel, Vec<f64>)>),
    Lir(Vec<f64>),
}

impl TrainedModel {
    pub fn task(&self) -> Task {
        match self.head {
            Head::Softmax(_) => Task::Rr,
            Head::Ridge(_) => Task::Im,
        }
    }

    /// Fits the standardizer on `train` and trains the head for `task` on the
    /// standardized rows.
    pub fn fit(
        train: &FeatureMatrix,
        task: Task,
        softmax_params: &SoftmaxParams,
        lambda: f64,
    ) -> Result<(Self, Vec<f64>)> {
        let standardizer = Standardizer::fit(train)?;
        let z = standardizer.transform(train)?;
        let (head, losses) = match task {
            Task::Rr => {
                let t = train_softmax(&z, softmax_params)?;
                (Head::Softmax(t.model), t.losses)
            }
            Task::Im => (Head::Ridge(train_ridge(&z, lambda)?), Vec::new()),
        };
        Ok((
            TrainedModel {
                feature_names: train.feature_names.clone(),
                standardizer,
                head,
            },
            losses,
        ))
    }

    pub fn predict(&self, rows: &FeatureMatrix) -> Result<Predictions> {
        if rows.feature_names != self.feature_names {
            return Err(if rows.n_features() != self.feature_names.len() {
                Error::DimensionMismatch {
                    expected: self.feature_names.len(),
                    found: rows.n_features(),
                }
            } else {
                Error::Invalid("feature columns differ from the model's".into())
            });
        }
        let z = self.standardizer.transform(rows)?;
        Ok(match &self.head {
            Head::Softmax(m) => Predictions::Roles(m.predict(&z)?),
            Head::Ridge(m) => Predictions::Lir(m.predict(&z)?),
        })
    }
}
