use std::ops::Range;

use crate::error::{Error, Result};

/// Abbreviations whose trailing period never ends a sentence. Compared
/// case-insensitively against the token before the period, without it.
const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "mt", "vs", "etc", "e.g", "i.e", "u.s",
    "u.k", "u.n", "e.u", "inc", "ltd", "co", "corp", "gen", "gov", "sen", "rep", "col", "lt",
    "sgt", "capt", "no", "fig", "approx", "dept", "est", "jan", "feb", "mar", "apr", "aug",
    "sept", "sep", "oct", "nov", "dec", "a.m", "p.m",
];

const TERMINATORS: [char; 3] = ['.', '!', '?'];
const CLOSERS: [char; 6] = ['"', '\'', '\u{201D}', '\u{2019}', ')', ']'];

/// Segmented text: words, sentences and per-word syllable estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenizedText {
    pub words: Vec<String>,
    pub sentences: Vec<String>,
    /// Byte span of each sentence in the source text.
    pub sentence_spans: Vec<Range<usize>>,
    /// Index range into `words` for each sentence.
    pub sentence_words: Vec<Range<usize>>,
    pub syllables: Vec<usize>,
}

impl TokenizedText {
    pub fn word_count(&self) -> usize {
        self.words.len()
    }

    pub fn sentence_count(&self) -> usize {
        self.sentences.len()
    }

    pub fn sentence_word_slice(&self, i: usize) -> &[String] {
        &self.words[self.sentence_words[i].clone()]
    }
}

/// Segments `text` into sentences and words.
///
/// Sentences end at `.`, `!` or `?` (runs allowed) plus any closing quotes or
/// brackets, when followed by whitespace or end of input. A period after a
/// known abbreviation does not end a sentence, and neither does a quoted span
/// whose closing mark is followed by a lowercase word (`"Stop!" he said.`).
/// Words are maximal runs of alphanumerics and inner apostrophes.
pub fn tokenize(text: &str) -> Result<TokenizedText> {
    if text.trim().is_empty() {
        return Err(Error::EmptyText);
    }
    let spans = merge_wordless(sentence_spans(text), text);

    let mut tok = TokenizedText {
        words: Vec::new(),
        sentences: Vec::with_capacity(spans.len()),
        sentence_spans: Vec::with_capacity(spans.len()),
        sentence_words: Vec::with_capacity(spans.len()),
        syllables: Vec::new(),
    };
    for span in spans {
        let start = tok.words.len();
        tok.words.extend(words(&text[span.clone()]));
        tok.sentence_words.push(start..tok.words.len());
        tok.sentences.push(text[span.clone()].to_string());
        tok.sentence_spans.push(span);
    }
    tok.syllables = tok.words.iter().map(|w| count_syllables(w)).collect();
    Ok(tok)
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\'' || c == '\u{2019}'
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Word tokens of `text` in order, apostrophes trimmed from the edges.
pub fn words(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !is_word_char(c))
        .map(|w| w.trim_matches(is_apostrophe))
        .filter(|w| !w.is_empty())
        .map(str::to_string)
}

/// Lowercased word with curly apostrophes normalized.
pub fn fold(word: &str) -> String {
    word.to_lowercase().replace('\u{2019}', "'")
}

fn sentence_spans(text: &str) -> Vec<Range<usize>> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut spans = Vec::new();
    let mut start: Option<usize> = None;
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if start.is_none() {
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            start = Some(pos);
        }
        if !TERMINATORS.contains(&c) {
            i += 1;
            continue;
        }
        let first_term = i;
        let mut j = i;
        while j < chars.len() && TERMINATORS.contains(&chars[j].1) {
            j += 1;
        }
        let terms = j - first_term;
        let mut closed = false;
        while j < chars.len() && CLOSERS.contains(&chars[j].1) {
            closed = true;
            j += 1;
        }
        let end = chars.get(j).map_or(text.len(), |&(p, _)| p);
        let at_boundary = j == chars.len() || chars[j].1.is_whitespace();
        let mut split = at_boundary;
        if split && c == '.' && terms == 1 && is_abbreviation(&text[start.unwrap()..pos]) {
            split = false;
        }
        if split && closed {
            let next = chars[j..].iter().map(|&(_, c)| c).find(|c| !c.is_whitespace());
            if next.is_some_and(char::is_lowercase) {
                split = false;
            }
        }
        if split {
            spans.push(start.take().unwrap()..end);
        }
        i = j.max(i + 1);
    }
    if let Some(s) = start {
        let end = text.trim_end().len();
        if end > s {
            spans.push(s..end);
        }
    }
    spans
}

fn is_abbreviation(before: &str) -> bool {
    let token = before
        .rsplit(char::is_whitespace)
        .next()
        .unwrap_or("")
        .trim_start_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase();
    ABBREVIATIONS.contains(&token.as_str())
}

/// Folds sentences without any word characters into a neighbour so that
/// every sentence carries words whenever the text does.
fn merge_wordless(spans: Vec<Range<usize>>, text: &str) -> Vec<Range<usize>> {
    let has_words = |r: &Range<usize>| text[r.clone()].chars().any(char::is_alphanumeric);
    let mut merged: Vec<Range<usize>> = Vec::with_capacity(spans.len());
    let mut pending: Option<usize> = None;
    for span in spans {
        if has_words(&span) {
            let start = pending.take().unwrap_or(span.start);
            merged.push(start..span.end);
        } else if let Some(last) = merged.last_mut() {
            last.end = span.end;
        } else {
            pending.get_or_insert(span.start);
        }
    }
    if merged.is_empty() {
        let start = text.len() - text.trim_start().len();
        merged.push(start..text.trim_end().len());
    } else if let Some(p) = pending {
        merged[0].start = p;
    }
    merged
}

/// Vowel-group syllable estimate: counts runs of `aeiouy`, drops a silent
/// trailing `e` (but not `-le` after a consonant or `-ee`), minimum 1.
pub fn count_syllables(word: &str) -> usize {
    let w: Vec<char> = word
        .chars()
        .filter(|c| c.is_alphabetic())
        .flat_map(char::to_lowercase)
        .collect();
    let is_vowel = |c: char| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y');
    let mut groups = 0;
    let mut prev_vowel = false;
    for &c in &w {
        let v = is_vowel(c);
        if v && !prev_vowel {
            groups += 1;
        }
        prev_vowel = v;
    }
    let n = w.len();
    if groups > 1 && n >= 2 && w[n - 1] == 'e' {
        let before = w[n - 2];
        let consonant_le = before == 'l' && n >= 3 && !is_vowel(w[n - 3]);
        if !is_vowel(before) && !consonant_le {
            groups -= 1;
        }
    }
    groups.max(1)
}
