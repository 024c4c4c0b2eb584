use std::collections::HashMap;
use std::path::Path;

use super::tokenize::{fold, TokenizedText};
use crate::error::{Error, Result};

/// Source of raw grammatical-error counts for a document.
pub trait ErrorCountProvider: Send + Sync {
    fn error_count(&self, doc_id: &str, tok: &TokenizedText) -> Result<usize>;
}

/// A small, approximate rule set:
///
/// * the same word twice in a row;
/// * `a` before a vowel-initial word, `an` before a consonant-initial word
///   (with a handful of pronunciation exceptions);
/// * a sentence starting with a lowercase letter;
/// * a sentence not ending in `.`, `!` or `?` (closing quotes allowed).
///
/// This is no substitute for a full grammar checker; use
/// [`ExternalErrorCounts`] to ingest counts from one.
#[derive(Debug, Clone, Copy, Default)]
pub struct BuiltinRules;

const AN_BEFORE_CONSONANT: &[&str] = &["hour", "honest", "honor", "honour", "heir", "herb"];
const A_BEFORE_VOWEL: &[&str] = &["uni", "use", "usu", "one", "once", "eu", "ewe", "ur"];

impl BuiltinRules {
    pub fn doubled_words(tok: &TokenizedText) -> usize {
        (0..tok.sentence_count())
            .map(|i| {
                tok.sentence_word_slice(i)
                    .windows(2)
                    .filter(|w| fold(&w[0]) == fold(&w[1]))
                    .count()
            })
            .sum()
    }

    pub fn article_agreement(tok: &TokenizedText) -> usize {
        (0..tok.sentence_count())
            .map(|i| {
                tok.sentence_word_slice(i)
                    .windows(2)
                    .filter(|w| {
                        let article = fold(&w[0]);
                        let next = fold(&w[1]);
                        let Some(first) = next.chars().next() else {
                            return false;
                        };
                        if !first.is_alphabetic() {
                            return false;
                        }
                        let vowel = matches!(first, 'a' | 'e' | 'i' | 'o' | 'u');
                        match article.as_str() {
                            "a" => vowel && !A_BEFORE_VOWEL.iter().any(|p| next.starts_with(p)),
                            "an" => {
                                !vowel && !AN_BEFORE_CONSONANT.iter().any(|p| next.starts_with(p))
                            }
                            _ => false,
                        }
                    })
                    .count()
            })
            .sum()
    }

    pub fn lowercase_starts(tok: &TokenizedText) -> usize {
        tok.sentences
            .iter()
            .filter(|s| s.chars().find(|c| c.is_alphanumeric()).is_some_and(char::is_lowercase))
            .count()
    }

    pub fn missing_terminal(tok: &TokenizedText) -> usize {
        tok.sentences
            .iter()
            .filter(|s| {
                let last = s
                    .trim_end()
                    .trim_end_matches(['"', '\'', '\u{201D}', '\u{2019}', ')', ']'])
                    .chars()
                    .last();
                !matches!(last, Some('.' | '!' | '?'))
            })
            .count()
    }
}

impl ErrorCountProvider for BuiltinRules {
    fn error_count(&self, _doc_id: &str, tok: &TokenizedText) -> Result<usize> {
        Ok(Self::doubled_words(tok)
            + Self::article_agreement(tok)
            + Self::lowercase_starts(tok)
            + Self::missing_terminal(tok))
    }
}

/// Per-document counts produced by an external checker, read from
/// `doc_id<TAB>count` lines.
#[derive(Debug, Clone, Default)]
pub struct ExternalErrorCounts {
    counts: HashMap<String, usize>,
}

impl ExternalErrorCounts {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut counts = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (id, count) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, i + 1, "expected doc_id<TAB>count"))?;
            let count: usize = count
                .trim()
                .parse()
                .map_err(|e| Error::parse(path, i + 1, format!("bad count: {e}")))?;
            if counts.insert(id.to_string(), count).is_some() {
                return Err(Error::DuplicateId {
                    id: id.to_string(),
                    line: i + 1,
                });
            }
        }
        Ok(ExternalErrorCounts { counts })
    }

    pub fn from_counts(counts: impl IntoIterator<Item = (String, usize)>) -> Self {
        ExternalErrorCounts {
            counts: counts.into_iter().collect(),
        }
    }
}

impl ErrorCountProvider for ExternalErrorCounts {
    fn error_count(&self, doc_id: &str, _tok: &TokenizedText) -> Result<usize> {
        self.counts
            .get(doc_id)
            .copied()
            .ok_or_else(|| Error::MissingDocument(doc_id.to_string()))
    }
}

/// Errors per thousand words.
pub fn errors_per_1k(errors: usize, words: usize) -> Result<f64> {
    if words == 0 {
        return Err(Error::Invalid("error density undefined for 0 words".into()));
    }
    Ok(errors as f64 / words as f64 * 1000.0)
}

/// Raw count from `checker`, scaled per thousand words.
pub fn grammar_errors_per_1k(
    doc_id: &str,
    tok: &TokenizedText,
    checker: &dyn ErrorCountProvider,
) -> Result<f64> {
    errors_per_1k(checker.error_count(doc_id, tok)?, tok.word_count())
}
