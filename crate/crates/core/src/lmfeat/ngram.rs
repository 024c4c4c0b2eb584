use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LogprobSidecar, SidecarToken};
use crate::error::{Error, Result};
use crate::lingfeat::{fold, words};

pub const MAX_ORDER: usize = 5;
pub const UNKNOWN: &str = "<unk>";
pub const BOS: &str = "<s>";
/// Pseudo-count given to the unknown symbol when training has no singletons,
/// so unseen words keep a nonzero probability.
pub const UNKNOWN_FLOOR: f64 = 1e-10;

const FORMAT_TAG: &str = "llmdetect-ngram";
const FORMAT_VERSION: u32 = 1;

type WordId = u32;
const BOS_ID: WordId = WordId::MAX;
type ContextKey = [WordId; MAX_ORDER - 1];

#[derive(Debug, Clone, PartialEq)]
struct Successors {
    total: u64,
    /// Sorted by word id.
    counts: Vec<(WordId, u64)>,
}

impl Successors {
    fn count(&self, w: WordId) -> u64 {
        self.counts
            .binary_search_by_key(&w, |&(id, _)| id)
            .map_or(0, |i| self.counts[i].1)
    }
}

/// Interpolated maximum-likelihood n-gram language model over case-folded
/// words.
///
/// `P(w | h) = Σ_k λ'_k P_k(w | h)`, where `P_1` is the unigram estimate over
/// the vocabulary plus [`UNKNOWN`] and `P_k` for `k ≥ 2` is the ML estimate
/// given the previous `k - 1` words. Orders whose context was never seen in
/// training drop out and the remaining weights are renormalized, so every
/// conditional distribution sums to one. The unknown symbol's unigram count
/// is the number of singleton types (each singleton is counted both as
/// itself and as unknown), or [`UNKNOWN_FLOOR`] if there are none.
#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    order: usize,
    weights: Vec<f64>,
    /// Sorted vocabulary; the unknown symbol has id `words.len() - 1`.
    words: Vec<String>,
    index: HashMap<String, WordId>,
    unigram: Vec<f64>,
    unigram_total: f64,
    /// `tables[k - 2]` holds contexts of length `k - 1`.
    tables: Vec<HashMap<ContextKey, Successors>>,
    /// Ids sorted by unigram count descending, then word ascending.
    unigram_rank: Vec<WordId>,
}

/// Conditional state for one position: active higher-order tables and the
/// renormalized weights.
struct Mixture<'a> {
    unigram_weight: f64,
    higher: Vec<(f64, &'a Successors)>,
}

impl NGramModel {
    /// Trains on `texts`. `weights[k]` is the interpolation weight of order
    /// `k + 1`; they must be nonnegative, sum to 1, and the unigram weight
    /// must be positive.
    pub fn train<S: AsRef<str>>(texts: &[S], order: usize, weights: &[f64]) -> Result<Self> {
        if !(1..=MAX_ORDER).contains(&order) {
            return Err(Error::Invalid(format!("n-gram order must be in 1..={MAX_ORDER}, got {order}")));
        }
        validate_weights(order, weights)?;
        let tokenized: Vec<Vec<String>> = texts
            .iter()
            .map(|t| words(t.as_ref()).map(|w| fold(&w)).collect())
            .collect();
        let mut type_counts: BTreeMap<&str, u64> = BTreeMap::new();
        for w in tokenized.iter().flatten() {
            *type_counts.entry(w.as_str()).or_default() += 1;
        }
        if type_counts.is_empty() {
            return Err(Error::Invalid("n-gram training corpus has no words".into()));
        }
        let singletons = type_counts.values().filter(|&&c| c == 1).count();
        let unknown = if singletons > 0 { singletons as f64 } else { UNKNOWN_FLOOR };

        let mut unigrams: Vec<(String, f64)> =
            type_counts.iter().map(|(w, c)| (w.to_string(), *c as f64)).collect();
        unigrams.push((UNKNOWN.to_string(), unknown));

        let mut model = NGramModel::from_unigrams(order, weights.to_vec(), unigrams)?;
        for sentence in &tokenized {
            let ids: Vec<WordId> = sentence.iter().map(|w| model.id(w)).collect();
            for (i, &w) in ids.iter().enumerate() {
                for k in 2..=order {
                    let key = context_key(&ids[..i], k - 1);
                    let entry = model.tables[k - 2].entry(key).or_insert(Successors {
                        total: 0,
                        counts: Vec::new(),
                    });
                    entry.total += 1;
                    match entry.counts.binary_search_by_key(&w, |&(id, _)| id) {
                        Ok(j) => entry.counts[j].1 += 1,
                        Err(j) => entry.counts.insert(j, (w, 1)),
                    }
                }
            }
        }
        Ok(model)
    }

    fn from_unigrams(order: usize, weights: Vec<f64>, mut unigrams: Vec<(String, f64)>) -> Result<Self> {
        let unk_pos = unigrams
            .iter()
            .position(|(w, _)| w == UNKNOWN)
            .ok_or_else(|| Error::Invalid("unigram table lacks the unknown symbol".into()))?;
        let unk = unigrams.remove(unk_pos);
        unigrams.sort_by(|a, b| a.0.cmp(&b.0));
        unigrams.push(unk);
        if unigrams.iter().any(|(_, c)| !c.is_finite() || *c < 0.0) {
            return Err(Error::Invalid("unigram counts must be finite and nonnegative".into()));
        }
        let words: Vec<String> = unigrams.iter().map(|(w, _)| w.clone()).collect();
        let unigram: Vec<f64> = unigrams.iter().map(|(_, c)| *c).collect();
        let index: HashMap<String, WordId> = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as WordId))
            .collect();
        if index.len() != words.len() {
            return Err(Error::Invalid("duplicate word in unigram table".into()));
        }
        let unigram_total: f64 = unigram.iter().sum();
        if unigram_total <= 0.0 {
            return Err(Error::Invalid("unigram table has no mass".into()));
        }
        let mut unigram_rank: Vec<WordId> = (0..words.len() as WordId).collect();
        unigram_rank.sort_by(|&a, &b| {
            unigram[b as usize]
                .total_cmp(&unigram[a as usize])
                .then_with(|| words[a as usize].cmp(&words[b as usize]))
        });
        Ok(NGramModel {
            order,
            weights,
            words,
            index,
            unigram,
            unigram_total,
            tables: vec![HashMap::new(); order - 1],
            unigram_rank,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Vocabulary size including the unknown symbol.
    pub fn vocab_size(&self) -> usize {
        self.words.len()
    }

    pub fn name(&self) -> String {
        format!("ngram-{}", self.order)
    }

    fn unk_id(&self) -> WordId {
        (self.words.len() - 1) as WordId
    }

    fn id(&self, folded: &str) -> WordId {
        self.index.get(folded).copied().unwrap_or_else(|| self.unk_id())
    }

    fn mixture(&self, history: &[WordId]) -> Mixture<'_> {
        let mut higher = Vec::with_capacity(self.order - 1);
        let mut mass = self.weights[0];
        for k in 2..=self.order {
            if self.weights[k - 1] == 0.0 {
                continue;
            }
            if let Some(s) = self.tables[k - 2].get(&context_key(history, k - 1)) {
                higher.push((self.weights[k - 1], s));
                mass += self.weights[k - 1];
            }
        }
        for h in &mut higher {
            h.0 /= mass;
        }
        Mixture {
            unigram_weight: self.weights[0] / mass,
            higher,
        }
    }

    fn unigram_term(&self, mix: &Mixture<'_>, w: WordId) -> f64 {
        mix.unigram_weight * (self.unigram[w as usize] / self.unigram_total)
    }

    fn prob(&self, mix: &Mixture<'_>, w: WordId) -> f64 {
        let mut p = self.unigram_term(mix, w);
        for &(lambda, s) in &mix.higher {
            p += lambda * (s.count(w) as f64 / s.total as f64);
        }
        p
    }

    fn beats(&self, pv: f64, v: WordId, pw: f64, w: WordId) -> bool {
        pv > pw || (pv == pw && self.words[v as usize] < self.words[w as usize])
    }

    /// 1-based rank of `w` in the descending distribution, ties broken by
    /// word string. Words absent from every active higher-order table are
    /// ordered by their unigram term alone, which lets them be counted with a
    /// binary search over the precomputed unigram ranking.
    fn rank(&self, mix: &Mixture<'_>, w: WordId, pw: f64) -> usize {
        let prefix = self
            .unigram_rank
            .partition_point(|&v| self.beats(self.unigram_term(mix, v), v, pw, w));
        let mut candidates: Vec<WordId> = mix
            .higher
            .iter()
            .flat_map(|(_, s)| s.counts.iter().map(|&(id, _)| id))
            .filter(|&v| v != w)
            .collect();
        candidates.sort_unstable();
        candidates.dedup();
        let mut rank = prefix + 1;
        for v in candidates {
            if self.beats(self.unigram_term(mix, v), v, pw, w) {
                rank -= 1;
            }
            if self.beats(self.prob(mix, v), v, pw, w) {
                rank += 1;
            }
        }
        rank
    }

    fn history_ids(&self, context: &[&str]) -> Vec<WordId> {
        context
            .iter()
            .map(|w| if *w == BOS { BOS_ID } else { self.id(&fold(w)) })
            .collect()
    }

    /// `P(word | context)`. Context words are folded; [`BOS`] marks the start
    /// of a text.
    pub fn probability(&self, context: &[&str], word: &str) -> f64 {
        let mix = self.mixture(&self.history_ids(context));
        self.prob(&mix, self.id(&fold(word)))
    }

    /// The full conditional distribution over the vocabulary and the unknown
    /// symbol, in vocabulary order.
    pub fn distribution(&self, context: &[&str]) -> Vec<(&str, f64)> {
        let mix = self.mixture(&self.history_ids(context));
        (0..self.words.len() as WordId)
            .map(|v| (self.words[v as usize].as_str(), self.prob(&mix, v)))
            .collect()
    }

    /// Scores each word of `text` given its preceding words.
    pub fn score_tokens(&self, doc_id: &str, text: &str) -> Result<LogprobSidecar> {
        let surface: Vec<String> = words(text).collect();
        if surface.is_empty() {
            return Err(Error::EmptyText);
        }
        let ids: Vec<WordId> = surface.iter().map(|w| self.id(&fold(w))).collect();
        let tokens = surface
            .into_iter()
            .enumerate()
            .map(|(i, text)| {
                let mix = self.mixture(&ids[..i]);
                let w = ids[i];
                let p = self.prob(&mix, w);
                SidecarToken {
                    text,
                    logprob: p.ln(),
                    rank: self.rank(&mix, w, p) as u64,
                }
            })
            .collect();
        Ok(LogprobSidecar {
            doc_id: doc_id.to_string(),
            model_name: self.name(),
            tokens,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut ngrams = Vec::new();
        for (k, table) in self.tables.iter().enumerate() {
            let ctx_len = k + 1;
            for (key, succ) in table {
                let ctx: Vec<String> = key[MAX_ORDER - 1 - ctx_len..]
                    .iter()
                    .map(|&id| {
                        if id == BOS_ID {
                            BOS.to_string()
                        } else {
                            self.words[id as usize].clone()
                        }
                    })
                    .collect();
                for &(w, c) in &succ.counts {
                    ngrams.push((ctx.clone(), self.words[w as usize].clone(), c));
                }
            }
        }
        ngrams.sort();
        let file = ModelFile {
            format: FORMAT_TAG.to_string(),
            version: FORMAT_VERSION,
            order: self.order,
            weights: self.weights.clone(),
            unigrams: self
                .words
                .iter()
                .cloned()
                .zip(self.unigram.iter().copied())
                .collect(),
            ngrams,
        };
        let text = serde_json::to_string(&file).expect("model serializes");
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: ModelFile =
            serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
        if file.format != FORMAT_TAG || file.version != FORMAT_VERSION {
            return Err(Error::ModelVersion {
                found: format!("{} v{}", file.format, file.version),
                expected: format!("{FORMAT_TAG} v{FORMAT_VERSION}"),
            });
        }
        if !(1..=MAX_ORDER).contains(&file.order) {
            return Err(Error::Invalid(format!("bad n-gram order {}", file.order)));
        }
        validate_weights(file.order, &file.weights)?;
        let mut model = NGramModel::from_unigrams(file.order, file.weights, file.unigrams)?;
        for (ctx, word, count) in file.ngrams {
            let k = ctx.len() + 1;
            if !(2..=model.order).contains(&k) {
                return Err(Error::Invalid(format!("n-gram of order {k} in an order-{} model", model.order)));
            }
            let lookup = |w: &str| -> Result<WordId> {
                if w == BOS {
                    return Ok(BOS_ID);
                }
                model
                    .index
                    .get(w)
                    .copied()
                    .ok_or_else(|| Error::Invalid(format!("n-gram word {w:?} not in vocabulary")))
            };
            let ids: Vec<WordId> = ctx.iter().map(|w| lookup(w)).collect::<Result<_>>()?;
            let w = lookup(&word)?;
            let entry = model.tables[k - 2]
                .entry(context_key(&ids, ids.len()))
                .or_insert(Successors {
                    total: 0,
                    counts: Vec::new(),
                });
            entry.total += count;
            match entry.counts.binary_search_by_key(&w, |&(id, _)| id) {
                Ok(_) => return Err(Error::Invalid(format!("duplicate n-gram ending in {word:?}"))),
                Err(j) => entry.counts.insert(j, (w, count)),
            }
        }
        Ok(model)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    order: usize,
    weights: Vec<f64>,
    unigrams: Vec<(String, f64)>,
    ngrams: Vec<(Vec<String>, String, u64)>,
}

fn validate_weights(order: usize, weights: &[f64]) -> Result<()> {
    if weights.len() != order {
        return Err(Error::Invalid(format!(
            "expected {order} interpolation weights, got {}",
            weights.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::Invalid("interpolation weights must be nonnegative".into()));
    }
    if (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::Invalid(format!("interpolation weights must sum to 1: {weights:?}")));
    }
    if weights[0] == 0.0 {
        return Err(Error::Invalid("unigram weight must be positive".into()));
    }
    Ok(())
}

/// The last `len` ids of `history` (BOS-padded on the left), right-aligned
/// in a fixed-size key.
fn context_key(history: &[WordId], len: usize) -> ContextKey {
    let mut key = [BOS_ID; MAX_ORDER - 1];
    let take = len.min(history.len());
    let src = &history[history.len() - take..];
    key[MAX_ORDER - 1 - take..].copy_from_slice(src);
    for slot in key.iter_mut().take(MAX_ORDER - 1 - len) {
        *slot = 0;
    }
    key
}

/// Equal-weight interpolation for `order`.
pub fn uniform_weights(order: usize) -> Vec<f64> {
    vec![1.0 / order as f64; order]
}
