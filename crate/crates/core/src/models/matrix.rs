use std::collections::HashSet;
use std::path::Path;

use crate::corpus::{RoleLabel, Split};
use crate::error::{Error, Result};

const KEY_COLUMNS: [&str; 4] = ["doc_id", "split", "role", "lir"];

/// Documents × features, with optional labels and split assignment.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureMatrix {
    pub feature_names: Vec<String>,
    pub doc_ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub splits: Vec<Option<Split>>,
    /// Present only when every row has a role.
    pub labels_role: Option<Vec<RoleLabel>>,
    /// Present only when every row has an involvement ratio.
    pub labels_lir: Option<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn new(feature_names: Vec<String>, doc_ids: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let m = FeatureMatrix {
            feature_names,
            doc_ids,
            rows,
            splits: vec![None; n],
            labels_role: None,
            labels_lir: None,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn with_roles(mut self, roles: Vec<RoleLabel>) -> Result<Self> {
        self.labels_role = Some(roles);
        self.validate()?;
        Ok(self)
    }

    pub fn with_lir(mut self, lir: Vec<f64>) -> Result<Self> {
        self.labels_lir = Some(lir);
        self.validate()?;
        Ok(self)
    }

    pub fn with_splits(mut self, splits: Vec<Option<Split>>) -> Result<Self> {
        self.splits = splits;
        self.validate()?;
        Ok(self)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.rows.len();
        if self.doc_ids.len() != n || self.splits.len() != n {
            return Err(Error::Invalid(format!(
                "{n} rows but {} ids and {} split entries",
                self.doc_ids.len(),
                self.splits.len()
            )));
        }
        let mut names = HashSet::new();
        for name in &self.feature_names {
            if name.is_empty() || name.contains(char::is_whitespace) || name.contains(',') {
                return Err(Error::Invalid(format!("bad feature name {name:?}")));
            }
            if KEY_COLUMNS.contains(&name.as_str()) || !names.insert(name) {
                return Err(Error::Invalid(format!("duplicate feature name {name:?}")));
            }
        }
        let d = self.n_features();
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Invalid(format!(
                    "non-finite value in row {:?}, column {:?}",
                    self.doc_ids[i], self.feature_names[j]
                )));
            }
        }
        if self.labels_role.as_ref().is_some_and(|l| l.len() != n) {
            return Err(Error::Invalid("role label count differs from row count".into()));
        }
        if let Some(l) = &self.labels_lir {
            if l.len() != n {
                return Err(Error::Invalid("lir label count differs from row count".into()));
            }
            if l.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::Invalid("lir labels must lie in [0, 1]".into()));
            }
        }
        Ok(())
    }

    /// The rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            feature_names: self.feature_names.clone(),
            doc_ids: indices.iter().map(|&i| self.doc_ids[i].clone()).collect(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            splits: indices.iter().map(|&i| self.splits[i]).collect(),
            labels_role: self
                .labels_role
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i]).collect()),
            labels_lir: self
                .labels_lir
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i]).collect()),
        }
    }

    pub fn split(&self, split: Split) -> FeatureMatrix {
        let idx: Vec<usize> = (0..self.n_rows())
            .filter(|&i| self.splits[i] == Some(split))
            .collect();
        self.select(&idx)
    }

    pub fn role_codes(&self) -> Option<Vec<usize>> {
        self.labels_role
            .as_ref()
            .map(|l| l.iter().map(|r| r.code()).collect())
    }

    /// Writes `doc_id,split,role,lir,<features...>` CSV. Empty cells mark
    /// missing split/role/lir values.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
        let header: Vec<&str> = KEY_COLUMNS
            .iter()
            .copied()
            .chain(self.feature_names.iter().map(String::as_str))
            .collect();
        w.write_record(&header).map_err(|e| csv_io(path, e))?;
        for i in 0..self.n_rows() {
            let mut rec = vec![
                self.doc_ids[i].clone(),
                self.splits[i].map_or(String::new(), |s| s.as_str().to_string()),
                self.labels_role
                    .as_ref()
                    .map_or(String::new(), |l| l[i].code().to_string()),
                self.labels_lir
                    .as_ref()
                    .map_or(String::new(), |l| l[i].to_string()),
            ];
            rec.extend(self.rows[i].iter().map(f64::to_string));
            w.write_record(&rec).map_err(|e| csv_io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut r = csv::Reader::from_path(path).map_err(|e| csv_io(path, e))?;
        let header = r.headers().map_err(|e| csv_io(path, e))?.clone();
        if header.len() < KEY_COLUMNS.len()
            || header.iter().take(KEY_COLUMNS.len()).ne(KEY_COLUMNS.iter().copied())
        {
            return Err(Error::parse(path, 1, format!("header must start with {}", KEY_COLUMNS.join(","))));
        }
        let feature_names: Vec<String> = header.iter().skip(KEY_COLUMNS.len()).map(String::from).collect();
        let mut doc_ids = Vec::new();
        let mut rows = Vec::new();
        let mut splits = Vec::new();
        let mut roles: Vec<Option<RoleLabel>> = Vec::new();
        let mut lirs: Vec<Option<f64>> = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::parse(path, line, e.to_string()))?;
            let bad = |msg: String| Error::parse(path, line, msg);
            doc_ids.push(rec[0].to_string());
            splits.push(match &rec[1] {
                "" => None,
                s => Some(s.parse::<Split>().map_err(|e| bad(e.to_string()))?),
            });
            roles.push(match &rec[2] {
                "" => None,
                s => {
                    let code: usize = s.parse().map_err(|_| bad(format!("bad role code {s:?}")))?;
                    Some(RoleLabel::from_code(code).ok_or_else(|| bad(format!("role code {code} out of range")))?)
                }
            });
            lirs.push(match &rec[3] {
                "" => None,
                s => Some(s.parse::<f64>().map_err(|e| bad(format!("bad lir {s:?}: {e}")))?),
            });
            let row: Vec<f64> = rec
                .iter()
                .skip(KEY_COLUMNS.len())
                .map(|v| v.parse::<f64>().map_err(|e| bad(format!("bad value {v:?}: {e}"))))
                .collect::<Result<_>>()?;
            rows.push(row);
        }
        let m = FeatureMatrix {
            feature_names,
            doc_ids,
            rows,
            splits,
            labels_role: roles.into_iter().collect(),
            labels_lir: lirs.into_iter().collect(),
        };
        m.validate().map_err(|e| Error::parse(path, 0, e.to_string()))?;
        Ok(m)
    }
}

fn csv_io(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::parse(path, 0, format!("{other:?}")),
    }
}
