//! Golden LLM involvement ratio (LIR) labels.
//!
//! Pure roles get fixed labels (human 0, creator 1). Extended texts use the
//! share of words written by the model; polished texts use the Jaccard
//! distance between the word-type sets before and after polishing.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, RoleLabel};
use crate::error::{Error, Result};
use crate::lingfeat::{fold, tokenize, words};

/// Most polish stages supported by [`label_polish_stage`].
pub const MAX_POLISH_STAGES: usize = 6;
/// Sentences always kept (and always left for the model) when truncating.
pub const MIN_RETAINED_SENTENCES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LirMethod {
    FixedZero,
    FixedOne,
    ExtensionRatio,
    JaccardPolish,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LirEvidence {
    /// Model-written and total word counts.
    Tokens { llm: usize, total: usize },
    /// Sizes of the word-type intersection and union.
    WordSets { intersection: usize, union: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LirLabel {
    pub value: f64,
    pub method: LirMethod,
    pub evidence: Option<LirEvidence>,
}

impl LirLabel {
    pub fn fixed_zero() -> Self {
        LirLabel {
            value: 0.0,
            method: LirMethod::FixedZero,
            evidence: None,
        }
    }

    pub fn fixed_one() -> Self {
        LirLabel {
            value: 1.0,
            method: LirMethod::FixedOne,
            evidence: None,
        }
    }
}

/// Rounds to at most six decimals.
pub fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

fn word_types(text: &str) -> Result<HashSet<String>> {
    let set: HashSet<String> = words(text).map(|w| fold(&w)).collect();
    if set.is_empty() {
        return Err(Error::EmptyText);
    }
    Ok(set)
}

/// `(|A ∩ B|, |A ∪ B|)` over case-folded word types.
pub fn word_set_overlap(a: &str, b: &str) -> Result<(usize, usize)> {
    let a = word_types(a)?;
    let b = word_types(b)?;
    let inter = a.intersection(&b).count();
    Ok((inter, a.len() + b.len() - inter))
}

/// `1 - |A ∩ B| / |A ∪ B|` over case-folded word types. Either text having
/// no words is an error.
pub fn jaccard_distance(a: &str, b: &str) -> Result<f64> {
    let (inter, union) = word_set_overlap(a, b)?;
    Ok(1.0 - inter as f64 / union as f64)
}

fn normalize_ws(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Share of `full_text` words that follow the human-written prefix.
pub fn extension_lir(retained_prefix: &str, full_text: &str) -> Result<LirLabel> {
    let prefix = normalize_ws(retained_prefix);
    let full = normalize_ws(full_text);
    let continues_at_boundary = full
        .strip_prefix(&prefix)
        .is_some_and(|rest| !rest.starts_with(|c: char| c.is_alphanumeric()));
    if !continues_at_boundary {
        return Err(Error::Invalid("full text does not start with the retained prefix".into()));
    }
    let prefix_words = words(&prefix).count();
    let total = words(&full).count();
    if prefix_words == 0 {
        return Err(Error::Invalid("retained prefix has no words".into()));
    }
    if prefix_words > total {
        return Err(Error::Invalid(format!(
            "prefix has {prefix_words} words but the full text only {total}"
        )));
    }
    let llm = total - prefix_words;
    Ok(LirLabel {
        value: round6(llm as f64 / total as f64),
        method: LirMethod::ExtensionRatio,
        evidence: Some(LirEvidence::Tokens { llm, total }),
    })
}

/// Jaccard distance between the original and polished word-type sets.
pub fn polish_lir(original: &str, polished: &str) -> Result<LirLabel> {
    let (intersection, union) = word_set_overlap(original, polished)?;
    Ok(LirLabel {
        value: 1.0 - intersection as f64 / union as f64,
        method: LirMethod::JaccardPolish,
        evidence: Some(LirEvidence::WordSets {
            intersection,
            union,
        }),
    })
}

/// Labels a document by role. `companion` is the pre-polish original for
/// polishers and the retained human prefix for extenders; pure roles ignore
/// both the companion and the text.
pub fn label_role_lir(doc: &Document, companion: Option<&str>) -> Result<LirLabel> {
    match doc.role {
        RoleLabel::HumanAuthor => Ok(LirLabel::fixed_zero()),
        RoleLabel::LlmCreator => Ok(LirLabel::fixed_one()),
        RoleLabel::LlmPolisher => {
            let original = companion.ok_or_else(|| Error::MissingCompanion(doc.id.clone()))?;
            polish_lir(original, &doc.text)
        }
        RoleLabel::LlmExtender => {
            let prefix = companion.ok_or_else(|| Error::MissingCompanion(doc.id.clone()))?;
            extension_lir(prefix, &doc.text)
        }
    }
}

/// Labels each polish stage against the stage-0 original.
pub fn label_polish_stage(original: &str, staged: &[impl AsRef<str>]) -> Result<Vec<LirLabel>> {
    if staged.is_empty() || staged.len() > MAX_POLISH_STAGES {
        return Err(Error::Invalid(format!(
            "expected 1..={MAX_POLISH_STAGES} polish stages, got {}",
            staged.len()
        )));
    }
    staged
        .iter()
        .map(|p| {
            if p.as_ref().trim().is_empty() {
                return Err(Error::EmptyText);
            }
            polish_lir(original, p.as_ref())
        })
        .collect()
}

/// How much of an article is kept before the model continues it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TruncationBucket {
    Low,
    Medium,
    High,
}

impl TruncationBucket {
    pub const ALL: [TruncationBucket; 3] =
        [TruncationBucket::Low, TruncationBucket::Medium, TruncationBucket::High];

    pub fn as_str(self) -> &'static str {
        match self {
            TruncationBucket::Low => "Low",
            TruncationBucket::Medium => "Medium",
            TruncationBucket::High => "High",
        }
    }

    /// Inclusive range of retained sentence counts for a text of `l`
    /// sentences: Low `[3, l/3]`, Medium `[l/3, 2l/3]`, High `[2l/3, l-3]`,
    /// lower bounds rounded up (and at least 3), upper bounds rounded down.
    /// `None` when the range is empty.
    pub fn retained_range(self, l: usize) -> Option<(usize, usize)> {
        let ceil_third = l.div_ceil(3);
        let ceil_two_thirds = (2 * l).div_ceil(3);
        let (lo, hi) = match self {
            TruncationBucket::Low => (MIN_RETAINED_SENTENCES, l / 3),
            TruncationBucket::Medium => (ceil_third, 2 * l / 3),
            TruncationBucket::High => (ceil_two_thirds, l.saturating_sub(MIN_RETAINED_SENTENCES)),
        };
        let lo = lo.max(MIN_RETAINED_SENTENCES);
        (lo <= hi).then_some((lo, hi))
    }
}

impl fmt::Display for TruncationBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TruncationBucket {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TruncationBucket::ALL
            .into_iter()
            .find(|b| b.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Invalid(format!("unknown truncation bucket {s:?}")))
    }
}

/// Number of sentences to keep, drawn uniformly from the bucket's range.
pub fn truncation_length(sentences: usize, bucket: TruncationBucket, seed: u64) -> Result<usize> {
    let (lo, hi) = bucket.retained_range(sentences).ok_or_else(|| {
        Error::Invalid(format!(
            "bucket {bucket} has no admissible length for {sentences} sentences"
        ))
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(rng.random_range(lo..=hi))
}

/// The retained human prefix: the first `s` sentences of `text`, with `s`
/// drawn from the bucket's range. The result is a slice of the input ending
/// on a sentence boundary.
pub fn make_truncation(text: &str, bucket: TruncationBucket, seed: u64) -> Result<String> {
    let tok = tokenize(text)?;
    let s = truncation_length(tok.sentence_count(), bucket, seed)?;
    let end = tok.sentence_spans[s - 1].end;
    let start = tok.sentence_spans[0].start;
    Ok(text[start..end].to_string())
}
