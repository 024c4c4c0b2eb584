//! Seeded synthetic corpora with controlled per-role statistics.
//!
//! Human-style text draws uniformly from a large pool of short pseudo-words
//! in short sentences. Model-style text walks a bigram chain over a small
//! pool rich in long words, in long sentences with more subordinate clauses
//! and positive words. Polished text is a human article with a fraction of
//! its word types swapped for model-pool words; extended text is a human
//! prefix followed by model-style sentences.
//!
//! Pseudo-words are consonant-vowel syllables over `aiou`, so the syllable
//! heuristic counts them exactly.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Document, RoleLabel};
use crate::error::Result;
use crate::eval::INTENSITY_KEY;
use crate::lingfeat::{tokenize, SentimentLexicon};
use crate::lir::{make_truncation, TruncationBucket, MAX_POLISH_STAGES};

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aiou";
const FUNCTION_WORDS: &[&str] = &["the", "of", "and", "to", "in", "it", "was", "for", "on", "with"];
const MODEL_SUBORDINATORS: &[&str] = &["which", "because", "while", "although", "whereas", "since"];
const POSITIVE_WORDS: &[&str] = &[
    "good", "great", "excellent", "effective", "valuable", "beautiful", "confident", "enjoy", "benefit",
    "brilliant",
];
const SOURCES: &[&str] = &["news", "wiki", "forum"];

const HUMAN_SENTENCE_WORDS: (usize, usize) = (6, 12);
const HUMAN_SENTENCES: (usize, usize) = (12, 18);
const MODEL_SENTENCE_WORDS: (usize, usize) = (18, 26);
const MODEL_SENTENCES: (usize, usize) = (6, 9);
const CHAIN_FOLLOW: f64 = 0.9;
const SUCCESSORS: usize = 3;
const POLISH_FRACTION: (f64, f64) = (0.15, 0.85);
/// Share of a human article's replaceable types swapped at the last polish
/// stage.
const MAX_STAGE_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthConfig {
    pub docs_per_role: usize,
    /// Texts for training the reference n-gram model, half of each style.
    pub reference_docs: usize,
    /// Human articles per intensity dataset.
    pub intensity_articles: usize,
    pub human_pool: usize,
    pub model_pool: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            docs_per_role: 100,
            reference_docs: 200,
            intensity_articles: 30,
            human_pool: 2500,
            model_pool: 300,
            seed: 0,
        }
    }
}

/// A generated corpus (ratios unlabeled), the companion texts that the
/// labeler needs for polished and extended documents, and reference texts.
#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub corpus: Corpus,
    pub companions: BTreeMap<String, String>,
    pub reference: Vec<String>,
}

/// Vocabulary and bigram chain shared by everything generated from one seed.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    pub human: Vec<String>,
    pub model: Vec<String>,
    successors: Vec<[usize; SUCCESSORS]>,
}

fn pseudo_word(rng: &mut impl Rng, syllables: usize) -> String {
    let mut w = String::with_capacity(syllables * 2);
    for _ in 0..syllables {
        w.push(*CONSONANTS.choose(rng).unwrap() as char);
        w.push(*VOWELS.choose(rng).unwrap() as char);
    }
    w
}

impl Vocabulary {
    /// Disjoint pools: the human pool is 90% two-syllable words, the model
    /// pool 60% words of three or four syllables.
    pub fn generate(human_pool: usize, model_pool: usize, rng: &mut impl Rng) -> Self {
        let lexicon = SentimentLexicon::bundled();
        let mut seen: BTreeSet<String> = BTreeSet::new();
        let mut draw = |rng: &mut ChaCha8Rng, syllables: usize| loop {
            let w = pseudo_word(rng, syllables);
            if lexicon.valence(&w).is_none() && seen.insert(w.clone()) {
                return w;
            }
        };
        let mut inner = ChaCha8Rng::seed_from_u64(rng.random());
        let human = (0..human_pool)
            .map(|i| draw(&mut inner, if i % 10 == 9 { 3 } else { 2 }))
            .collect();
        let model: Vec<String> = (0..model_pool)
            .map(|i| draw(&mut inner, [2, 2, 3, 3, 3, 4, 2, 3, 4, 2][i % 10]))
            .collect();
        let successors = (0..model.len())
            .map(|_| std::array::from_fn(|_| inner.random_range(0..model_pool)))
            .collect();
        Vocabulary { human, model, successors }
    }
}

fn capitalize(sentence: &mut String) {
    if let Some(c) = sentence.chars().next() {
        let upper: String = c.to_uppercase().collect();
        sentence.replace_range(..c.len_utf8(), &upper);
    }
}

fn human_sentence(v: &Vocabulary, rng: &mut impl Rng) -> String {
    let n = rng.random_range(HUMAN_SENTENCE_WORDS.0..=HUMAN_SENTENCE_WORDS.1);
    let mut words: Vec<&str> = Vec::with_capacity(n + 4);
    for i in 0..n {
        if i > 0 && rng.random_bool(0.25) {
            words.push(FUNCTION_WORDS.choose(rng).unwrap());
        }
        let w = v.human.choose(rng).unwrap().as_str();
        words.push(w);
        if rng.random_bool(0.02) {
            words.push(w);
        }
    }
    let mut s = words.join(" ");
    capitalize(&mut s);
    s.push('.');
    s
}

fn model_sentence(v: &Vocabulary, rng: &mut impl Rng) -> String {
    let n = rng.random_range(MODEL_SENTENCE_WORDS.0..=MODEL_SENTENCE_WORDS.1);
    let mut cur = rng.random_range(0..v.model.len());
    let clause_at = rng.random_bool(0.6).then(|| rng.random_range(4..n - 4));
    let positive_at = rng.random_bool(0.6).then(|| rng.random_range(1..n));
    let mut words: Vec<&str> = Vec::with_capacity(n + 2);
    for i in 0..n {
        if Some(i) == clause_at {
            words.push(MODEL_SUBORDINATORS.choose(rng).unwrap());
        }
        if Some(i) == positive_at {
            words.push(POSITIVE_WORDS.choose(rng).unwrap());
        }
        words.push(&v.model[cur]);
        cur = if rng.random_bool(CHAIN_FOLLOW) {
            v.successors[cur][rng.random_range(0..SUCCESSORS)]
        } else {
            rng.random_range(0..v.model.len())
        };
    }
    let mut s = words.join(" ");
    capitalize(&mut s);
    s.push('.');
    s
}

fn join_sentences(sentences: impl IntoIterator<Item = String>) -> String {
    sentences.into_iter().collect::<Vec<_>>().join(" ")
}

pub fn human_article(v: &Vocabulary, rng: &mut impl Rng) -> String {
    let n = rng.random_range(HUMAN_SENTENCES.0..=HUMAN_SENTENCES.1);
    join_sentences((0..n).map(|_| human_sentence(v, rng)))
}

pub fn model_article(v: &Vocabulary, rng: &mut impl Rng) -> String {
    let n = rng.random_range(MODEL_SENTENCES.0..=MODEL_SENTENCES.1);
    join_sentences((0..n).map(|_| model_sentence(v, rng)))
}

/// Replaces every occurrence of the word types in `map` (case-folded),
/// keeping the capitalization of sentence-initial words.
fn replace_types(text: &str, map: &HashMap<String, String>) -> String {
    let mut out = String::with_capacity(text.len());
    let mut word = String::new();
    let flush = |word: &mut String, out: &mut String| {
        if word.is_empty() {
            return;
        }
        let lower = word.to_lowercase();
        match map.get(&lower) {
            Some(r) => {
                let mut r = r.clone();
                if word.chars().next().is_some_and(char::is_uppercase) {
                    capitalize(&mut r);
                }
                out.push_str(&r);
            }
            None => out.push_str(word),
        }
        word.clear();
    };
    for c in text.chars() {
        if c.is_alphanumeric() {
            word.push(c);
        } else {
            flush(&mut word, &mut out);
            out.push(c);
        }
    }
    flush(&mut word, &mut out);
    out
}

/// Human-pool types of `text` in first-occurrence order.
fn replaceable_types(v: &Vocabulary, text: &str) -> Vec<String> {
    let pool: BTreeSet<&str> = v.human.iter().map(String::as_str).collect();
    let mut seen = BTreeSet::new();
    crate::lingfeat::words(text)
        .map(|w| w.to_lowercase())
        .filter(|w| pool.contains(w.as_str()) && seen.insert(w.clone()))
        .collect()
}

/// Swaps a `fraction` of the human-pool types for model-pool words.
pub fn polish(v: &Vocabulary, original: &str, fraction: f64, rng: &mut impl Rng) -> String {
    let mut types = replaceable_types(v, original);
    types.shuffle(rng);
    let k = (fraction * types.len() as f64).round() as usize;
    let map = types
        .into_iter()
        .take(k)
        .map(|t| (t, v.model.choose(rng).unwrap().clone()))
        .collect();
    replace_types(original, &map)
}

/// Keeps a bucket-sized prefix of `article` and continues it with
/// model-style sentences up to the article's sentence count. Returns the
/// prefix and the full text.
pub fn extend(
    v: &Vocabulary,
    article: &str,
    bucket: TruncationBucket,
    rng: &mut impl Rng,
) -> Result<(String, String)> {
    let total = tokenize(article)?.sentence_count();
    let prefix = make_truncation(article, bucket, rng.random())?;
    let kept = tokenize(&prefix)?.sentence_count();
    let continuation = join_sentences((kept..total).map(|_| model_sentence(v, rng)));
    let full = format!("{prefix} {continuation}");
    Ok((prefix, full))
}

fn meta(rng: &mut impl Rng, extra: &[(&str, String)]) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    m.insert("source".to_string(), SOURCES.choose(rng).unwrap().to_string());
    m.insert("generator".to_string(), "synthetic".to_string());
    for (k, val) in extra {
        m.insert(k.to_string(), val.clone());
    }
    m
}

fn with_meta(mut doc: Document, meta: BTreeMap<String, String>) -> Document {
    doc.meta = meta;
    doc
}

struct Generator {
    vocab: Vocabulary,
    rng: ChaCha8Rng,
}

impl Generator {
    fn new(cfg: &SynthConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let vocab = Vocabulary::generate(cfg.human_pool, cfg.model_pool, &mut rng);
        Generator { vocab, rng }
    }

    fn reference(&mut self, n: usize) -> Vec<String> {
        (0..n)
            .map(|i| {
                if i % 2 == 0 {
                    human_article(&self.vocab, &mut self.rng)
                } else {
                    model_article(&self.vocab, &mut self.rng)
                }
            })
            .collect()
    }
}

/// Four roles, `docs_per_role` each, plus reference texts for the n-gram
/// model drawn from the same vocabulary.
pub fn generate_corpus(cfg: &SynthConfig) -> Result<SynthOutput> {
    let mut g = Generator::new(cfg);
    let reference = g.reference(cfg.reference_docs);
    let (v, rng) = (&g.vocab, &mut g.rng);
    let mut docs = Vec::with_capacity(4 * cfg.docs_per_role);
    let mut companions = BTreeMap::new();
    for i in 0..cfg.docs_per_role {
        let text = human_article(v, rng);
        docs.push(with_meta(Document::new(format!("h{i:04}"), text, RoleLabel::HumanAuthor), meta(rng, &[])));
        let text = model_article(v, rng);
        docs.push(with_meta(Document::new(format!("c{i:04}"), text, RoleLabel::LlmCreator), meta(rng, &[])));

        let original = human_article(v, rng);
        let fraction = rng.random_range(POLISH_FRACTION.0..=POLISH_FRACTION.1);
        let polished = polish(v, &original, fraction, rng);
        let id = format!("p{i:04}");
        companions.insert(id.clone(), original);
        docs.push(with_meta(Document::new(id, polished, RoleLabel::LlmPolisher), meta(rng, &[])));

        let article = human_article(v, rng);
        let bucket = *TruncationBucket::ALL.choose(rng).unwrap();
        let (prefix, full) = extend(v, &article, bucket, rng)?;
        let id = format!("e{i:04}");
        companions.insert(id.clone(), prefix);
        docs.push(with_meta(Document::new(id, full, RoleLabel::LlmExtender), meta(rng, &[])));
    }
    Ok(SynthOutput {
        corpus: Corpus::new(docs)?,
        companions,
        reference,
    })
}

/// Extender documents at every truncation bucket for each of
/// `intensity_articles` human articles, tagged `ext:<bucket>`. Each keeps its
/// article's sentence count.
pub fn generate_extension_intensity(cfg: &SynthConfig) -> Result<SynthOutput> {
    let mut g = Generator::new(cfg);
    let reference = g.reference(cfg.reference_docs);
    let (v, rng) = (&g.vocab, &mut g.rng);
    let mut docs = Vec::new();
    let mut companions = BTreeMap::new();
    for i in 0..cfg.intensity_articles {
        let article = human_article(v, rng);
        for bucket in TruncationBucket::ALL {
            let (prefix, full) = extend(v, &article, bucket, rng)?;
            let id = format!("ext{i:04}-{bucket}");
            companions.insert(id.clone(), prefix);
            let m = meta(rng, &[(INTENSITY_KEY, format!("ext:{bucket}"))]);
            docs.push(with_meta(Document::new(id, full, RoleLabel::LlmExtender), m));
        }
    }
    Ok(SynthOutput {
        corpus: Corpus::new(docs)?,
        companions,
        reference,
    })
}

/// Cumulative polish stages: stage `m` swaps the first `m/6` share (up to
/// 80%) of a fixed random ordering of each article's types, so every stage
/// edits a superset of the previous one. Tagged `pol:<m>`.
pub fn generate_polish_intensity(cfg: &SynthConfig) -> Result<SynthOutput> {
    let mut g = Generator::new(cfg);
    let reference = g.reference(cfg.reference_docs);
    let (v, rng) = (&g.vocab, &mut g.rng);
    let mut docs = Vec::new();
    let mut companions = BTreeMap::new();
    for i in 0..cfg.intensity_articles {
        let original = human_article(v, rng);
        let mut types = replaceable_types(v, &original);
        types.shuffle(rng);
        let fresh: Vec<String> = types.iter().map(|_| v.model.choose(rng).unwrap().clone()).collect();
        for m in 1..=MAX_POLISH_STAGES {
            let share = MAX_STAGE_FRACTION * m as f64 / MAX_POLISH_STAGES as f64;
            let k = (share * types.len() as f64).round() as usize;
            let map = types.iter().cloned().zip(fresh.iter().cloned()).take(k).collect();
            let id = format!("pol{i:04}-{m}");
            companions.insert(id.clone(), original.clone());
            let m_meta = meta(rng, &[(INTENSITY_KEY, format!("pol:{m}"))]);
            docs.push(with_meta(
                Document::new(id, replace_types(&original, &map), RoleLabel::LlmPolisher),
                m_meta,
            ));
        }
    }
    Ok(SynthOutput {
        corpus: Corpus::new(docs)?,
        companions,
        reference,
    })
}
