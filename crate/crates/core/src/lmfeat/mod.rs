//! Perplexity and token-rank features.
//!
//! Per-token log-probabilities and ranks arrive as a [`LogprobSidecar`],
//! either produced by the built-in [`NGramModel`] or loaded from a file
//! written by an external scorer. Everything downstream only sees sidecars.

mod gltr;
mod ngram;

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use gltr::{render_gltr, render_gltr_html, BUCKET_COLORS};
pub use ngram::{uniform_weights, NGramModel, BOS, MAX_ORDER, UNKNOWN, UNKNOWN_FLOOR};

use crate::error::{Error, Result};

/// Inclusive upper rank of each of the first three buckets; anything above
/// the last falls in the fourth.
pub const RANK_BOUNDARIES: [u64; 3] = [10, 100, 1000];
pub const BUCKET_NAMES: [&str; 4] = ["top10", "top100", "top1000", "rest"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidecarToken {
    pub text: String,
    pub logprob: f64,
    pub rank: u64,
}

/// Per-token scores for one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogprobSidecar {
    pub doc_id: String,
    pub model_name: String,
    pub tokens: Vec<SidecarToken>,
}

impl LogprobSidecar {
    pub fn validate(&self) -> Result<()> {
        if self.tokens.is_empty() {
            return Err(Error::Invalid(format!("sidecar {:?} has no tokens", self.doc_id)));
        }
        for (i, t) in self.tokens.iter().enumerate() {
            if t.rank < 1 {
                return Err(Error::Invalid(format!("token {i}: rank must be >= 1")));
            }
            if !t.logprob.is_finite() {
                return Err(Error::Invalid(format!("token {i}: logprob must be finite")));
            }
            if t.logprob > 0.0 {
                return Err(Error::Invalid(format!(
                    "token {i}: logprob {} is positive",
                    t.logprob
                )));
            }
        }
        Ok(())
    }

    pub fn mean_logprob(&self) -> f64 {
        self.tokens.iter().map(|t| t.logprob).sum::<f64>() / self.tokens.len() as f64
    }
}

/// Reads line-delimited sidecar records, validating each one. Duplicate
/// `doc_id`s are rejected.
pub fn load_sidecar(path: impl AsRef<Path>) -> Result<Vec<LogprobSidecar>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: LogprobSidecar =
            serde_json::from_str(&line).map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        rec.validate()
            .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        if !seen.insert(rec.doc_id.clone()) {
            return Err(Error::DuplicateId {
                id: rec.doc_id,
                line: lineno,
            });
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn save_sidecar(sidecars: &[LogprobSidecar], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for s in sidecars {
        let line = serde_json::to_string(s).expect("sidecar serializes");
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `exp(-mean logprob)`.
pub fn perplexity(sidecar: &LogprobSidecar) -> f64 {
    (-sidecar.mean_logprob()).exp()
}

/// Bucket index 0..4 for a 1-based rank.
pub fn rank_bucket(rank: u64) -> usize {
    RANK_BOUNDARIES
        .iter()
        .position(|&b| rank <= b)
        .unwrap_or(RANK_BOUNDARIES.len())
}

/// Token counts per rank bucket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankFeatures {
    pub counts: [u64; 4],
    pub fractions: [f64; 4],
    pub token_total: u64,
}

pub fn rank_features(sidecar: &LogprobSidecar) -> RankFeatures {
    let mut counts = [0u64; 4];
    for t in &sidecar.tokens {
        counts[rank_bucket(t.rank)] += 1;
    }
    let token_total = sidecar.tokens.len() as u64;
    let fractions = if token_total == 0 {
        [0.0; 4]
    } else {
        counts.map(|c| c as f64 / token_total as f64)
    };
    RankFeatures {
        counts,
        fractions,
        token_total,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmFeatures {
    pub perplexity: f64,
    pub mean_logprob: f64,
    pub rank: RankFeatures,
}

impl LmFeatures {
    pub const PERPLEXITY_NAMES: [&'static str; 2] = ["perplexity", "mean_logprob"];
    pub const RANK_NAMES: [&'static str; 6] = [
        "frac_top10",
        "frac_top100",
        "frac_top1000",
        "frac_rest",
        "mean_logprob",
        "perplexity",
    ];

    pub fn from_sidecar(sidecar: &LogprobSidecar) -> Self {
        let mean_logprob = sidecar.mean_logprob();
        LmFeatures {
            perplexity: (-mean_logprob).exp(),
            mean_logprob,
            rank: rank_features(sidecar),
        }
    }

    /// The perplexity detector's vector.
    pub fn perplexity_vector(&self) -> [f64; 2] {
        [self.perplexity, self.mean_logprob]
    }

    /// The rank detector's vector: bucket fractions, mean logprob, perplexity.
    pub fn rank_vector(&self) -> [f64; 6] {
        let f = self.rank.fractions;
        [f[0], f[1], f[2], f[3], self.mean_logprob, self.perplexity]
    }
}
