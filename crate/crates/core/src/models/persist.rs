//! Line-oriented model files:
//!
//! ```text
//! llmdetect-model 1
//! task rr
//! features 2
//! feature ling.word_count
//! feature ling.sentiment
//! mean <v> <v>
//! std <v> <v>
//! softmax
//! weights <v> <v>      (one line per class)
//! bias <v> <v> <v> <v>
//! end
//! ```
//!
//! A ridge head is written as `ridge <lambda>`, one `weights` line and a
//! scalar `bias`. Values use 17 significant digits so they read back
//! bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use super::{Head, RidgeRegressor, SoftmaxClassifier, Standardizer, Task, TrainedModel, NUM_CLASSES};
use crate::error::{Error, Result};

pub const MODEL_MAGIC: &str = "llmdetect-model";
pub const MODEL_VERSION: &str = "1";

fn fmt_values(values: &[f64]) -> String {
    let mut s = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{v:.16e}");
    }
    s
}

pub fn model_to_string(model: &TrainedModel) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{MODEL_MAGIC} {MODEL_VERSION}");
    let _ = writeln!(s, "task {}", model.task());
    let _ = writeln!(s, "features {}", model.feature_names.len());
    for name in &model.feature_names {
        let _ = writeln!(s, "feature {name}");
    }
    let _ = writeln!(s, "mean {}", fmt_values(&model.standardizer.mean));
    let _ = writeln!(s, "std {}", fmt_values(&model.standardizer.std));
    match &model.head {
        Head::Softmax(m) => {
            s.push_str("softmax\n");
            for row in &m.weights {
                let _ = writeln!(s, "weights {}", fmt_values(row));
            }
            let _ = writeln!(s, "bias {}", fmt_values(&m.bias));
        }
        Head::Ridge(m) => {
            let _ = writeln!(s, "ridge {:.16e}", m.lambda);
            let _ = writeln!(s, "weights {}", fmt_values(&m.weights));
            let _ = writeln!(s, "bias {:.16e}", m.bias);
        }
    }
    s.push_str("end\n");
    s
}

pub fn save_model(model: &TrainedModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model_to_string(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_model(&text, path)
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    path: &'a Path,
}

impl<'a> Cursor<'a> {
    fn error(&self, offset: usize, message: impl Into<String>) -> Error {
        Error::CorruptModel {
            path: self.path.to_path_buf(),
            offset,
            message: message.into(),
        }
    }

    /// Next line (without newline) and its byte offset. A final line without
    /// its newline counts as truncated.
    fn line(&mut self) -> Result<(usize, &'a str)> {
        let start = self.pos;
        let rest = &self.text[start..];
        match rest.find('\n') {
            Some(n) => {
                self.pos = start + n + 1;
                Ok((start, &rest[..n]))
            }
            None => Err(self.error(self.text.len(), "unexpected end of file")),
        }
    }

    /// Next line, which must start with `key`; returns the remainder.
    fn keyed(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (offset, line) = self.line()?;
        let (k, rest) = line.split_once(' ').unwrap_or((line, ""));
        if k != key {
            return Err(self.error(offset, format!("expected {key:?}, found {k:?}")));
        }
        Ok((offset + k.len() + 1, rest))
    }

    fn values(&mut self, key: &str, expected: usize) -> Result<Vec<f64>> {
        let (offset, rest) = self.keyed(key)?;
        let values: Vec<f64> = rest
            .split(' ')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>().map_err(|e| self.error(offset, format!("bad number {t:?}: {e}"))))
            .collect::<Result<_>>()?;
        if values.len() != expected {
            return Err(self.error(offset, format!("{key}: expected {expected} values, found {}", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(self.error(offset, format!("{key}: non-finite value")));
        }
        Ok(values)
    }
}

fn parse_model(text: &str, path: &Path) -> Result<TrainedModel> {
    let mut c = Cursor { text, pos: 0, path };
    let (_, header) = c.line()?;
    match header.split_once(' ') {
        Some((MODEL_MAGIC, version)) if version == MODEL_VERSION => {}
        Some((MODEL_MAGIC, version)) => {
            return Err(Error::ModelVersion {
                found: version.to_string(),
                expected: MODEL_VERSION.to_string(),
            })
        }
        _ => return Err(c.error(0, "not a model file")),
    }
    let (offset, task) = c.keyed("task")?;
    let task: Task = task.parse().map_err(|e: Error| c.error(offset, e.to_string()))?;
    let (offset, count) = c.keyed("features")?;
    let d: usize = count
        .parse()
        .map_err(|_| c.error(offset, format!("bad feature count {count:?}")))?;
    let mut feature_names = Vec::with_capacity(d);
    for _ in 0..d {
        let (offset, name) = c.keyed("feature")?;
        if name.is_empty() {
            return Err(c.error(offset, "empty feature name"));
        }
        feature_names.push(name.to_string());
    }
    let mean = c.values("mean", d)?;
    let std = c.values("std", d)?;
    let (offset, line) = c.line()?;
    let head = match (task, line.split_once(' ').unwrap_or((line, ""))) {
        (Task::Rr, ("softmax", "")) => {
            let weights = (0..NUM_CLASSES)
                .map(|_| c.values("weights", d))
                .collect::<Result<Vec<_>>>()?;
            let bias = c.values("bias", NUM_CLASSES)?;
            Head::Softmax(SoftmaxClassifier { weights, bias })
        }
        (Task::Im, ("ridge", lambda)) => {
            let lambda: f64 = lambda
                .parse()
                .map_err(|_| c.error(offset, format!("bad lambda {lambda:?}")))?;
            let weights = c.values("weights", d)?;
            let bias = c.values("bias", 1)?[0];
            Head::Ridge(RidgeRegressor { weights, bias, lambda })
        }
        _ => return Err(c.error(offset, format!("head {line:?} does not match task {task}"))),
    };
    let (offset, end) = c.line()?;
    if end != "end" {
        return Err(c.error(offset, "expected \"end\""));
    }
    if c.pos != text.len() {
        return Err(c.error(c.pos, "trailing data after end"));
    }
    Ok(TrainedModel {
        feature_names,
        standardizer: Standardizer { mean, std },
        head,
    })
}
