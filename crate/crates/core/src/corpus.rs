//! Role-labelled documents, line-delimited JSON persistence and stratified
//! train/val/test splitting.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a text came to be. The integer codes are fixed and used in feature
/// files, model files and confusion matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RoleLabel {
    HumanAuthor,
    LlmCreator,
    LlmPolisher,
    LlmExtender,
}

impl RoleLabel {
    pub const COUNT: usize = 4;
    pub const ALL: [RoleLabel; 4] = [
        RoleLabel::HumanAuthor,
        RoleLabel::LlmCreator,
        RoleLabel::LlmPolisher,
        RoleLabel::LlmExtender,
    ];

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Option<Self> {
        Self::ALL.get(code).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RoleLabel::HumanAuthor => "Human-Author",
            RoleLabel::LlmCreator => "LLM-Creator",
            RoleLabel::LlmPolisher => "LLM-Polisher",
            RoleLabel::LlmExtender => "LLM-Extender",
        }
    }
}

impl fmt::Display for RoleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RoleLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RoleLabel::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::UnknownRole(s.to_string()))
    }
}

impl Serialize for RoleLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for RoleLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(Error::Invalid(format!("unknown split {other:?}"))),
        }
    }
}

/// One text with its labels. `lir` holds the numeric involvement ratio; the
/// labelling evidence lives in [`crate::lir::LirLabel`] and is not persisted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub role: RoleLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lir: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub meta: BTreeMap<String, String>,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>, role: RoleLabel) -> Self {
        Document {
            id: id.into(),
            text: text.into(),
            role,
            lir: None,
            split: None,
            meta: BTreeMap::new(),
        }
    }

    /// Checks the per-document invariants.
    pub fn validate(&self) -> Result<()> {
        if self.text.trim().is_empty() {
            return Err(Error::Invalid(format!("document {:?} has empty text", self.id)));
        }
        if let Some(v) = self.lir {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Invalid(format!(
                    "document {:?}: lir {v} outside [0, 1]",
                    self.id
                )));
            }
            let fixed = match self.role {
                RoleLabel::HumanAuthor => Some(0.0),
                RoleLabel::LlmCreator => Some(1.0),
                _ => None,
            };
            if let Some(expected) = fixed {
                if v != expected {
                    return Err(Error::Invalid(format!(
                        "document {:?}: role {} requires lir {expected}, found {v}",
                        self.id, self.role
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Train/val/test proportions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatio {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl SplitRatio {
    pub fn new(train: f64, val: f64, test: f64) -> Result<Self> {
        let parts = [train, val, test];
        if parts.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Invalid(format!(
                "split ratio components must be nonnegative: {parts:?}"
            )));
        }
        if ((train + val + test) - 1.0).abs() > 1e-9 {
            return Err(Error::Invalid(format!("split ratio must sum to 1: {parts:?}")));
        }
        Ok(SplitRatio { train, val, test })
    }

    fn parts(&self) -> [f64; 3] {
        [self.train, self.val, self.test]
    }

    /// Integer allocation of `total` items: floors first, remainders handed
    /// out by largest fractional part (ties to the earlier split). Each count
    /// stays within 1 of `total * ratio`.
    pub fn allocate(&self, total: usize) -> [usize; 3] {
        let exact = self.parts().map(|p| p * total as f64);
        let mut counts = exact.map(|x| x.floor() as usize);
        let mut remaining = total.saturating_sub(counts.iter().sum());
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| {
            let fa = exact[a] - exact[a].floor();
            let fb = exact[b] - exact[b].floor();
            fb.total_cmp(&fa).then(a.cmp(&b))
        });
        for &i in order.iter().cycle() {
            if remaining == 0 {
                break;
            }
            if self.parts()[i] > 0.0 {
                counts[i] += 1;
                remaining -= 1;
            }
        }
        counts
    }
}

impl FromStr for SplitRatio {
    type Err = Error;

    /// Parses `"0.7,0.2,0.1"`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Invalid(format!("bad split ratio {s:?}: {e}")))?;
        match parts.as_slice() {
            [a, b, c] => SplitRatio::new(*a, *b, *c),
            _ => Err(Error::Invalid(format!("split ratio needs three parts: {s:?}"))),
        }
    }
}

/// An ordered collection of documents with unique ids.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub documents: Vec<Document>,
}

impl Corpus {
    pub fn new(documents: Vec<Document>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (i, doc) in documents.iter().enumerate() {
            doc.validate()?;
            if !seen.insert(doc.id.as_str()) {
                return Err(Error::DuplicateId {
                    id: doc.id.clone(),
                    line: i + 1,
                });
            }
        }
        Ok(Corpus { documents })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.id == id)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Document> {
        self.documents.iter()
    }

    /// Number of documents with `role` assigned to `split`.
    pub fn count(&self, role: RoleLabel, split: Split) -> usize {
        self.documents
            .iter()
            .filter(|d| d.role == role && d.split == Some(split))
            .count()
    }
}

/// Reads a line-delimited JSON corpus. Blank lines are skipped; line numbers
/// in errors are 1-based.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut documents = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document =
            serde_json::from_str(&line).map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        doc.validate()
            .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        if !seen.insert(doc.id.clone()) {
            return Err(Error::DuplicateId {
                id: doc.id,
                line: lineno,
            });
        }
        documents.push(doc);
    }
    Ok(Corpus { documents })
}

/// Writes one JSON record per line, keys in a fixed order.
pub fn save_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for doc in &corpus.documents {
        let line = serde_json::to_string(doc).expect("document serializes");
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Assigns every document to train/val/test, stratified by role.
///
/// Each role's documents are shuffled with a ChaCha8 generator seeded from
/// `seed` (roles processed in code order, one generator for the whole call)
/// and cut according to [`SplitRatio::allocate`]. Document order is kept.
pub fn assign_splits(corpus: &Corpus, ratio: SplitRatio, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assigned = corpus.documents.clone();
    for role in RoleLabel::ALL {
        let mut idx: Vec<usize> = assigned
            .iter()
            .enumerate()
            .filter(|(_, d)| d.role == role)
            .map(|(i, _)| i)
            .collect();
        idx.shuffle(&mut rng);
        let [n_train, n_val, _] = ratio.allocate(idx.len());
        for (pos, &i) in idx.iter().enumerate() {
            let split = if pos < n_train {
                Split::Train
            } else if pos < n_train + n_val {
                Split::Val
            } else {
                Split::Test
            };
            assigned[i].split = Some(split);
        }
    }
    Corpus {
        documents: assigned,
    }
}
