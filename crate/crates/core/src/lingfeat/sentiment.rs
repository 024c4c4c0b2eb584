use std::collections::HashMap;
use std::path::Path;

use super::tokenize::{fold, TokenizedText};
use crate::error::{Error, Result};

/// Environment variable naming a directory that overrides bundled lexicons.
pub const LEXICON_DIR_ENV: &str = "LLMDETECT_LEXICON_DIR";
pub const SENTIMENT_FILE: &str = "sentiment.tsv";

/// Normalization constant in `S / sqrt(S^2 + alpha)`.
pub const NORMALIZATION_ALPHA: f64 = 15.0;
/// Multiplier applied to a valence preceded by a negator.
pub const NEGATION_SCALAR: f64 = -0.74;
/// Valence shift contributed by each booster word.
pub const BOOSTER_INCREMENT: f64 = 0.293;
/// How many preceding words are inspected for negators and boosters.
pub const LOOKBACK: usize = 3;

const BUNDLED: &str = include_str!("../../lexicon/sentiment.tsv");

const NEGATORS: &[&str] = &[
    "not", "no", "never", "none", "nobody", "nothing", "neither", "nor", "nowhere", "cannot",
    "can't", "don't", "doesn't", "didn't", "isn't", "wasn't", "aren't", "weren't", "won't",
    "wouldn't", "shouldn't", "couldn't", "without", "ain't", "hasn't", "haven't",
];

const BOOSTERS_UP: &[&str] = &[
    "very", "extremely", "really", "absolutely", "incredibly", "highly", "so", "totally",
    "completely", "most", "more", "particularly", "remarkably", "exceptionally", "deeply",
    "truly", "especially", "hugely", "enormously", "entirely", "fully", "utterly", "quite",
];

const BOOSTERS_DOWN: &[&str] = &[
    "slightly", "somewhat", "barely", "hardly", "marginally", "partly", "less", "occasionally",
    "scarcely", "little", "fairly",
];

/// Word valence table read from `word<TAB>valence` lines.
#[derive(Debug, Clone, Default)]
pub struct SentimentLexicon {
    valences: HashMap<String, f64>,
}

impl SentimentLexicon {
    /// The bundled lexicon, or `$LLMDETECT_LEXICON_DIR/sentiment.tsv` when set.
    pub fn load_default() -> Result<Self> {
        match std::env::var_os(LEXICON_DIR_ENV) {
            Some(dir) => Self::from_path(Path::new(&dir).join(SENTIMENT_FILE)),
            None => Ok(Self::bundled()),
        }
    }

    pub fn bundled() -> Self {
        Self::parse(BUNDLED, Path::new("<bundled>")).expect("bundled lexicon is valid")
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        SentimentLexicon {
            valences: pairs.into_iter().map(|(w, v)| (fold(w), v)).collect(),
        }
    }

    fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut valences = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, value) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, i + 1, "expected word<TAB>valence"))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|e| Error::parse(path, i + 1, format!("bad valence: {e}")))?;
            if !value.is_finite() {
                return Err(Error::parse(path, i + 1, "valence must be finite"));
            }
            valences.insert(fold(word.trim()), value);
        }
        Ok(SentimentLexicon { valences })
    }

    pub fn valence(&self, word: &str) -> Option<f64> {
        self.valences.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.valences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valences.is_empty()
    }
}

/// Maps a raw valence sum into (-1, 1).
pub fn normalize(sum: f64) -> f64 {
    if sum == 0.0 {
        0.0
    } else {
        sum / (sum * sum + NORMALIZATION_ALPHA).sqrt()
    }
}

/// Raw valence sum of one sentence's (folded) words.
pub fn sentence_valence(words: &[String], lexicon: &SentimentLexicon) -> f64 {
    let mut sum = 0.0;
    for (i, word) in words.iter().enumerate() {
        let Some(mut v) = lexicon.valence(word) else {
            continue;
        };
        let window = &words[i.saturating_sub(LOOKBACK)..i];
        for prev in window {
            if BOOSTERS_UP.contains(&prev.as_str()) {
                v += BOOSTER_INCREMENT * v.signum();
            } else if BOOSTERS_DOWN.contains(&prev.as_str()) {
                v -= BOOSTER_INCREMENT * v.signum();
            }
        }
        if window.iter().any(|p| NEGATORS.contains(&p.as_str())) {
            v *= NEGATION_SCALAR;
        }
        sum += v;
    }
    sum
}

/// Mean over sentences of the normalized sentence valence.
pub fn sentiment_polarity(tok: &TokenizedText, lexicon: &SentimentLexicon) -> f64 {
    if tok.sentence_count() == 0 {
        return 0.0;
    }
    let total: f64 = (0..tok.sentence_count())
        .map(|i| {
            let folded: Vec<String> = tok.sentence_word_slice(i).iter().map(|w| fold(w)).collect();
            normalize(sentence_valence(&folded, lexicon))
        })
        .sum();
    total / tok.sentence_count() as f64
}
