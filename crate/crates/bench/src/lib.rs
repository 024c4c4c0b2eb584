//! Fixtures shared by the criterion benchmarks.

use llmdetect_core::synth::{generate_corpus, SynthConfig, SynthOutput};

/// A small seeded corpus: `docs_per_role` documents per role and as many
/// reference texts.
pub fn fixture(docs_per_role: usize) -> SynthOutput {
    generate_corpus(&SynthConfig {
        docs_per_role,
        reference_docs: 2 * docs_per_role,
        seed: 7,
        ..SynthConfig::default()
    })
    .expect("synthetic corpus")
}
