//! Tokenization and the seven linguistic feature metrics: word count,
//! sentence count, sentiment polarity, grammatical error density, syntactic
//! diversity, vocabulary richness (type-token ratio) and the Fog index.

mod grammar;
mod sentiment;
mod tokenize;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

pub use grammar::{
    errors_per_1k, grammar_errors_per_1k, BuiltinRules, ErrorCountProvider, ExternalErrorCounts,
};
pub use sentiment::{
    normalize as normalize_valence, sentence_valence, sentiment_polarity, SentimentLexicon,
    BOOSTER_INCREMENT, LEXICON_DIR_ENV, NEGATION_SCALAR, NORMALIZATION_ALPHA, SENTIMENT_FILE,
};
pub use tokenize::{count_syllables, fold, tokenize, words, TokenizedText};

use crate::corpus::Document;
use crate::error::{Error, Result};

/// Words that open a subordinate clause.
pub const SUBORDINATORS: &[&str] = &[
    "because", "although", "while", "since", "unless", "whereas", "that", "which", "who", "whom",
    "whose", "when", "if",
];

/// Syllable count at which a word counts as complex for the Fog index.
pub const COMPLEX_SYLLABLES: usize = 3;

/// The 7-dimensional linguistic feature vector, in this field order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinguisticFeatures {
    pub word_count: f64,
    pub sentence_count: f64,
    pub sentiment: f64,
    pub grammar_errors_per_1k: f64,
    pub syntactic_diversity: f64,
    pub vocab_richness: f64,
    pub readability_fog: f64,
}

impl LinguisticFeatures {
    pub const NAMES: [&'static str; 7] = [
        "word_count",
        "sentence_count",
        "sentiment",
        "grammar_errors_per_1k",
        "syntactic_diversity",
        "vocab_richness",
        "readability_fog",
    ];

    pub fn to_array(&self) -> [f64; 7] {
        [
            self.word_count,
            self.sentence_count,
            self.sentiment,
            self.grammar_errors_per_1k,
            self.syntactic_diversity,
            self.vocab_richness,
            self.readability_fog,
        ]
    }
}

/// Subordinate-clause markers per sentence.
///
/// A subordinator counts anywhere except sentence-initially, where it counts
/// only if a comma follows later in the sentence ("Although tired, he ran").
pub fn syntactic_diversity(tok: &TokenizedText) -> f64 {
    if tok.sentence_count() == 0 {
        return 0.0;
    }
    let mut markers = 0usize;
    for i in 0..tok.sentence_count() {
        let words = tok.sentence_word_slice(i);
        for (pos, w) in words.iter().enumerate() {
            if !SUBORDINATORS.contains(&fold(w).as_str()) {
                continue;
            }
            if pos > 0 || initial_clause_has_comma(&tok.sentences[i], w) {
                markers += 1;
            }
        }
    }
    markers as f64 / tok.sentence_count() as f64
}

fn initial_clause_has_comma(sentence: &str, first_word: &str) -> bool {
    sentence
        .find(first_word)
        .is_some_and(|at| sentence[at + first_word.len()..].contains(','))
}

/// Distinct case-folded word types over total words.
pub fn vocab_richness(tok: &TokenizedText) -> Result<f64> {
    if tok.word_count() == 0 {
        return Err(Error::Invalid("type-token ratio undefined for 0 words".into()));
    }
    let types: HashSet<String> = tok.words.iter().map(|w| fold(w)).collect();
    Ok(types.len() as f64 / tok.word_count() as f64)
}

/// Gunning Fog index: `0.4 * (words/sentences + 100 * complex/words)`.
pub fn readability_fog(tok: &TokenizedText) -> Result<f64> {
    let words = tok.word_count();
    if words == 0 || tok.sentence_count() == 0 {
        return Err(Error::Invalid("Fog index undefined for 0 words".into()));
    }
    let complex = tok
        .syllables
        .iter()
        .filter(|&&s| s >= COMPLEX_SYLLABLES)
        .count();
    let avg_sentence = words as f64 / tok.sentence_count() as f64;
    Ok(0.4 * (avg_sentence + 100.0 * complex as f64 / words as f64))
}

/// All seven metrics for an already tokenized text.
pub fn linguistic_features(
    doc_id: &str,
    tok: &TokenizedText,
    checker: &dyn ErrorCountProvider,
    lexicon: &SentimentLexicon,
) -> Result<LinguisticFeatures> {
    Ok(LinguisticFeatures {
        word_count: tok.word_count() as f64,
        sentence_count: tok.sentence_count() as f64,
        sentiment: sentiment_polarity(tok, lexicon),
        grammar_errors_per_1k: grammar_errors_per_1k(doc_id, tok, checker)?,
        syntactic_diversity: syntactic_diversity(tok),
        vocab_richness: vocab_richness(tok)?,
        readability_fog: readability_fog(tok)?,
    })
}

/// Tokenizes the document text and computes its linguistic feature vector.
/// Only `id` and `text` are read.
pub fn extract_linguistic(
    doc: &Document,
    checker: &dyn ErrorCountProvider,
    lexicon: &SentimentLexicon,
) -> Result<LinguisticFeatures> {
    let tok = tokenize(&doc.text)?;
    linguistic_features(&doc.id, &tok, checker, lexicon)
}
