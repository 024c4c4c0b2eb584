//! Fine-grained detection of LLM involvement in text.
//!
//! Two tasks are supported:
//!
//! * **role recognition**: 4-way classification of how a text was produced
//!   ([`RoleLabel`]: human author, LLM creator, LLM polisher, LLM extender);
//! * **involvement measurement**: regression of the LLM involvement ratio
//!   ([`LirLabel`]), the fraction of the final text contributed by the model.
//!
//! The crate covers the whole pipeline: corpus I/O and stratified splitting
//! ([`corpus`]), golden ratio labelling ([`lir`]), linguistic features
//! ([`lingfeat`]), n-gram perplexity and token-rank features ([`lmfeat`]),
//! the two linear heads ([`models`]) and evaluation ([`eval`]). [`synth`]
//! generates controlled synthetic corpora for end-to-end checks.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod lingfeat;
pub mod lir;
pub mod lmfeat;
pub mod models;
pub mod synth;

pub use corpus::{Corpus, Document, RoleLabel, Split, SplitRatio};
pub use error::{Error, Result};
pub use eval::{ConfusionMatrix, EvalReport};
pub use lingfeat::{LinguisticFeatures, TokenizedText};
pub use lir::{LirLabel, LirMethod, TruncationBucket};
pub use lmfeat::{LmFeatures, LogprobSidecar, NGramModel, RankFeatures};
pub use models::{FeatureMatrix, RidgeRegressor, SoftmaxClassifier, Standardizer};
