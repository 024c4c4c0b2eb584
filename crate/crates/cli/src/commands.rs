use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use llmdetect_core::corpus::{assign_splits, load_corpus, save_corpus};
use llmdetect_core::eval::{grouped_report, intensity_curve, EvaluatedDoc};
use llmdetect_core::lingfeat::{
    extract_linguistic, BuiltinRules, ErrorCountProvider, ExternalErrorCounts, LinguisticFeatures,
    SentimentLexicon,
};
use llmdetect_core::lir::label_role_lir;
use llmdetect_core::lmfeat::{load_sidecar, render_gltr, save_sidecar, uniform_weights};
use llmdetect_core::models::{load_model, save_model, Predictions, SoftmaxParams, Task, TrainedModel};
use llmdetect_core::synth::{
    generate_corpus, generate_extension_intensity, generate_polish_intensity, SynthConfig,
};
use llmdetect_core::{
    Corpus, Document, EvalReport, FeatureMatrix, LmFeatures, LogprobSidecar, NGramModel, RoleLabel, Split,
    SplitRatio,
};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{resolve, stamp_path, write_stamp};
use crate::error::{usage, CliError, CliResult};
use crate::io::{ensure_parent, load_companions, save_companions, write_text};
use crate::{
    EvalArgs, FeaturizeArgs, GltrArgs, LabelArgs, NgramArgs, ScoreArgs, SplitArgs, SynthArgs, TrainArgs,
};

fn required<T: Clone>(value: &Option<T>, flag: &str) -> CliResult<T> {
    value.clone().ok_or_else(|| usage(format!("missing --{flag}")))
}

fn pool(jobs: Option<usize>) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Internal(format!("thread pool: {e}")))
}

fn finish(out: &Path, is_dir: bool, command: &str, resolved: &crate::config::Table) -> CliResult<()> {
    write_stamp(&stamp_path(out, is_dir), command, resolved)
}

pub fn synth(args: SynthArgs, cfg: Option<&Path>) -> CliResult<()> {
    let d = SynthConfig::default();
    let (a, resolved) = resolve(
        "synth",
        &args,
        cfg,
        &[
            ("seed", json!(0)),
            ("kind", json!("main")),
            ("docs_per_role", json!(d.docs_per_role)),
            ("reference_docs", json!(d.reference_docs)),
            ("intensity_articles", json!(d.intensity_articles)),
        ],
    )?;
    let out = required(&a.out, "out")?;
    let config = SynthConfig {
        docs_per_role: a.docs_per_role.unwrap_or(d.docs_per_role),
        reference_docs: a.reference_docs.unwrap_or(d.reference_docs),
        intensity_articles: a.intensity_articles.unwrap_or(d.intensity_articles),
        seed: a.seed.unwrap_or(0),
        ..d
    };
    let generated = match a.kind.as_deref().unwrap_or("main") {
        "main" => generate_corpus(&config)?,
        "extension" => generate_extension_intensity(&config)?,
        "polish" => generate_polish_intensity(&config)?,
        other => return Err(usage(format!("unknown synth kind {other:?} (main, extension, polish)"))),
    };
    std::fs::create_dir_all(&out).map_err(|e| CliError::Data(format!("{}: {e}", out.display())))?;
    save_corpus(&generated.corpus, out.join("corpus.jsonl"))?;
    save_companions(&generated.companions, &out.join("companions.jsonl"))?;
    let reference = Corpus::new(
        generated
            .reference
            .iter()
            .enumerate()
            .map(|(i, text)| {
                let role = if i % 2 == 0 { RoleLabel::HumanAuthor } else { RoleLabel::LlmCreator };
                Document::new(format!("ref{i:04}"), text.clone(), role)
            })
            .collect(),
    )?;
    save_corpus(&reference, out.join("reference.jsonl"))?;
    println!(
        "wrote {} documents, {} companions, {} reference texts to {}",
        generated.corpus.len(),
        generated.companions.len(),
        reference.len(),
        out.display()
    );
    finish(&out, true, "synth", &resolved)
}

pub fn label(args: LabelArgs, cfg: Option<&Path>) -> CliResult<()> {
    let (a, resolved) = resolve("label", &args, cfg, &[])?;
    let corpus_path = required(&a.corpus, "corpus")?;
    let out = required(&a.out, "out")?;
    let corpus = load_corpus(&corpus_path)?;
    let companions = match &a.companions {
        Some(p) => load_companions(p)?,
        None => BTreeMap::new(),
    };
    let labels: Vec<_> = pool(a.jobs)?.install(|| {
        corpus
            .documents
            .par_iter()
            .map(|d| label_role_lir(d, companions.get(&d.id).map(String::as_str)))
            .collect()
    });
    let mut docs = corpus.documents.clone();
    let mut failures = Vec::new();
    for (doc, label) in docs.iter_mut().zip(labels) {
        match label {
            Ok(l) => doc.lir = Some(l.value),
            Err(e) => {
                doc.lir = None;
                failures.push(format!("{}: {e}", doc.id));
            }
        }
    }
    let labeled = Corpus::new(docs)?;
    ensure_parent(&out)?;
    save_corpus(&labeled, &out)?;
    finish(&out, false, "label", &resolved)?;
    for role in RoleLabel::ALL {
        let values: Vec<f64> = labeled.iter().filter(|d| d.role == role).filter_map(|d| d.lir).collect();
        let mean = if values.is_empty() { 0.0 } else { values.iter().sum::<f64>() / values.len() as f64 };
        println!("{:<14} {:>6} labeled  mean ratio {:.4}", role.as_str(), values.len(), mean);
    }
    if failures.is_empty() {
        Ok(())
    } else {
        for f in &failures {
            eprintln!("label failed: {f}");
        }
        Err(CliError::Data(format!("{} document(s) could not be labeled", failures.len())))
    }
}

pub fn split(args: SplitArgs, cfg: Option<&Path>) -> CliResult<()> {
    let (a, resolved) = resolve("split", &args, cfg, &[("ratio", json!("0.7,0.2,0.1")), ("seed", json!(0))])?;
    let corpus = load_corpus(required(&a.corpus, "corpus")?)?;
    let out = required(&a.out, "out")?;
    let ratio: SplitRatio = required(&a.ratio, "ratio")?
        .parse()
        .map_err(|e: llmdetect_core::Error| usage(e.to_string()))?;
    let split = assign_splits(&corpus, ratio, a.seed.unwrap_or(0));
    ensure_parent(&out)?;
    save_corpus(&split, &out)?;
    for role in RoleLabel::ALL {
        let counts: Vec<String> =
            Split::ALL.iter().map(|&s| format!("{} {}", s.as_str(), split.count(role, s))).collect();
        println!("{:<14} {}", role.as_str(), counts.join("  "));
    }
    finish(&out, false, "split", &resolved)
}

fn parse_weights(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|w| w.trim().parse::<f64>().map_err(|e| usage(format!("bad weight {w:?}: {e}"))))
        .collect()
}

pub fn ngram(args: NgramArgs, cfg: Option<&Path>) -> CliResult<()> {
    let (a, resolved) = resolve("ngram", &args, cfg, &[("ngram_order", json!(3))])?;
    let corpus = load_corpus(required(&a.corpus, "corpus")?)?;
    let out = required(&a.out, "out")?;
    let order = a.ngram_order.unwrap_or(3);
    let weights = match &a.weights {
        Some(w) => parse_weights(w)?,
        None => uniform_weights(order),
    };
    let texts: Vec<&str> = corpus.iter().map(|d| d.text.as_str()).collect();
    let model = NGramModel::train(&texts, order, &weights).map_err(|e| match e {
        llmdetect_core::Error::Invalid(m) => usage(m),
        e => e.into(),
    })?;
    ensure_parent(&out)?;
    model.save(&out)?;
    println!("{}: {} word types from {} texts", model.name(), model.vocab_size(), texts.len());
    finish(&out, false, "ngram", &resolved)
}

fn score_corpus(model: &NGramModel, corpus: &Corpus, jobs: Option<usize>) -> CliResult<Vec<LogprobSidecar>> {
    Ok(pool(jobs)?.install(|| {
        corpus
            .documents
            .par_iter()
            .map(|d| model.score_tokens(&d.id, &d.text))
            .collect::<llmdetect_core::Result<Vec<_>>>()
    })?)
}

pub fn score(args: ScoreArgs, cfg: Option<&Path>) -> CliResult<()> {
    let (a, resolved) = resolve("score", &args, cfg, &[])?;
    let corpus = load_corpus(required(&a.corpus, "corpus")?)?;
    let model = NGramModel::load(required(&a.ngram_model, "ngram-model")?)?;
    let out = required(&a.out, "out")?;
    let sidecars = score_corpus(&model, &corpus, a.jobs)?;
    ensure_parent(&out)?;
    save_sidecar(&sidecars, &out)?;
    println!("scored {} documents with {}", sidecars.len(), model.name());
    finish(&out, false, "score", &resolved)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    Linguistic,
    Lm,
    Rank,
}

fn parse_families(s: &str) -> CliResult<Vec<Family>> {
    let mut out = Vec::new();
    for f in s.split(',').map(str::trim) {
        let fam = match f {
            "linguistic" => Family::Linguistic,
            "lm" => Family::Lm,
            "rank" => Family::Rank,
            other => return Err(usage(format!("unknown feature family {other:?} (linguistic, lm, rank)"))),
        };
        if !out.contains(&fam) {
            out.push(fam);
        }
    }
    Ok(out)
}

fn column_names(families: &[Family]) -> Vec<String> {
    let mut names = Vec::new();
    for f in families {
        match f {
            Family::Linguistic => names.extend(LinguisticFeatures::NAMES.iter().map(|n| format!("ling.{n}"))),
            Family::Lm => names.extend(LmFeatures::PERPLEXITY_NAMES.iter().map(|n| format!("lm.{n}"))),
            Family::Rank => names.extend(LmFeatures::RANK_NAMES.iter().map(|n| format!("rank.{n}"))),
        }
    }
    names
}

enum LmSource {
    None,
    Sidecars(HashMap<String, LogprobSidecar>),
    Model(NGramModel),
}

pub fn featurize(args: FeaturizeArgs, cfg: Option<&Path>) -> CliResult<()> {
    let (a, resolved) = resolve("featurize", &args, cfg, &[("families", json!("linguistic"))])?;
    let corpus = load_corpus(required(&a.corpus, "corpus")?)?;
    let out = required(&a.out, "out")?;
    let families = parse_families(&required(&a.families, "families")?)?;
    let needs_lm = families.iter().any(|f| *f != Family::Linguistic);
    let source = match (needs_lm, &a.sidecar, &a.ngram_model) {
        (false, _, _) => LmSource::None,
        (true, Some(p), _) => {
            LmSource::Sidecars(load_sidecar(p)?.into_iter().map(|s| (s.doc_id.clone(), s)).collect())
        }
        (true, None, Some(p)) => LmSource::Model(NGramModel::load(p)?),
        (true, None, None) => return Err(usage("the lm and rank families need --sidecar or --ngram-model")),
    };
    let checker: Box<dyn ErrorCountProvider> = match &a.grammar_counts {
        Some(p) => Box::new(ExternalErrorCounts::from_path(p)?),
        None => Box::new(BuiltinRules),
    };
    let lexicon = SentimentLexicon::load_default()?;

    let row = |doc: &Document| -> llmdetect_core::Result<Vec<f64>> {
        let mut row = Vec::new();
        let scored;
        let lm = match &source {
            LmSource::None => None,
            LmSource::Sidecars(map) => Some(
                map.get(&doc.id)
                    .ok_or_else(|| llmdetect_core::Error::MissingDocument(doc.id.clone()))?,
            ),
            LmSource::Model(m) => {
                scored = m.score_tokens(&doc.id, &doc.text)?;
                Some(&scored)
            }
        }
        .map(LmFeatures::from_sidecar);
        for f in &families {
            match f {
                Family::Linguistic => {
                    row.extend(extract_linguistic(doc, checker.as_ref(), &lexicon)?.to_array())
                }
                Family::Lm => row.extend(lm.expect("lm source").perplexity_vector()),
                Family::Rank => row.extend(lm.expect("lm source").rank_vector()),
            }
        }
        Ok(row)
    };
    let rows = pool(a.jobs)?.install(|| {
        corpus
            .documents
            .par_iter()
            .map(row)
            .collect::<llmdetect_core::Result<Vec<_>>>()
    })?;

    let docs = &corpus.documents;
    let mut matrix = FeatureMatrix::new(column_names(&families), docs.iter().map(|d| d.id.clone()).collect(), rows)?
        .with_splits(docs.iter().map(|d| d.split).collect())?
        .with_roles(docs.iter().map(|d| d.role).collect())?;
    if let Some(lir) = docs.iter().map(|d| d.lir).collect::<Option<Vec<f64>>>() {
        matrix = matrix.with_lir(lir)?;
    }
    ensure_parent(&out)?;
    matrix.save_csv(&out)?;
    println!("{} rows x {} features", matrix.n_rows(), matrix.n_features());
    finish(&out, false, "featurize", &resolved)
}

fn role_metrics(model: &TrainedModel, m: &FeatureMatrix) -> CliResult<EvalReport> {
    let docs = evaluated_docs(model, m, &BTreeMap::new())?;
    Ok(EvalReport::from_docs(&docs.iter().collect::<Vec<_>>())?)
}

fn print_metrics(name: &str, r: &EvalReport) {
    let mut parts = vec![format!("{name}: n={}", r.count)];
    if let Some(w) = r.weighted_f1 {
        parts.push(format!("weighted F1 {w:.2}"));
    }
    if let (Some(mse), Some(mae)) = (r.mse, r.mae) {
        parts.push(format!("MSE {mse:.4} MAE {mae:.4}"));
    }
    println!("{}", parts.join("  "));
}

pub fn train(args: TrainArgs, cfg: Option<&Path>) -> CliResult<()> {
    let d = SoftmaxParams::default();
    let (a, resolved) = resolve(
        "train",
        &args,
        cfg,
        &[
            ("task", json!("rr")),
            ("lr", json!(d.lr)),
            ("epochs", json!(d.epochs)),
            ("l2", json!(d.l2)),
            ("lambda", json!(1.0)),
            ("seed", json!(0)),
        ],
    )?;
    let task: Task = required(&a.task, "task")?
        .parse()
        .map_err(|e: llmdetect_core::Error| usage(e.to_string()))?;
    let matrix = FeatureMatrix::load_csv(required(&a.matrix, "matrix")?)?;
    let out = required(&a.out, "out")?;
    let params = SoftmaxParams {
        lr: a.lr.unwrap_or(d.lr),
        epochs: a.epochs.unwrap_or(d.epochs),
        l2: a.l2.unwrap_or(d.l2),
        seed: a.seed.unwrap_or(0),
        batch_size: a.batch_size,
    };
    let train = matrix.split(Split::Train);
    if train.n_rows() == 0 {
        return Err(CliError::Data("matrix has no train rows; run split first".into()));
    }
    match task {
        Task::Rr if train.labels_role.is_none() => return Err(CliError::Data("no role labels for task rr".into())),
        Task::Im if train.labels_lir.is_none() => {
            return Err(CliError::Data("no involvement-ratio labels for task im; run label first".into()))
        }
        _ => {}
    }
    let (model, losses) = TrainedModel::fit(&train, task, &params, a.lambda.unwrap_or(1.0))?;
    ensure_parent(&out)?;
    save_model(&model, &out)?;
    if let Some(last) = losses.last() {
        println!("final training loss {last:.6} after {} epochs", losses.len() - 1);
    }
    print_metrics("train", &role_metrics(&model, &train)?);
    let val = matrix.split(Split::Val);
    if val.n_rows() > 0 {
        print_metrics("val", &role_metrics(&model, &val)?);
    }
    finish(&out, false, "train", &resolved)
}

fn evaluated_docs(
    model: &TrainedModel,
    m: &FeatureMatrix,
    meta: &BTreeMap<&str, &BTreeMap<String, String>>,
) -> CliResult<Vec<EvaluatedDoc>> {
    let preds = model.predict(m)?;
    Ok((0..m.n_rows())
        .map(|i| {
            let mut d = EvaluatedDoc {
                doc_id: m.doc_ids[i].clone(),
                meta: meta.get(m.doc_ids[i].as_str()).map(|&m| m.clone()).unwrap_or_default(),
                ..Default::default()
            };
            match &preds {
                Predictions::Roles(p) => {
                    d.gold_role = m.labels_role.as_ref().map(|l| l[i]);
                    d.pred_role = Some(p[i].0);
                }
                Predictions::Lir(p) => {
                    d.gold_lir = m.labels_lir.as_ref().map(|l| l[i]);
                    d.pred_lir = Some(p[i]);
                }
            }
            d
        })
        .collect())
}

pub fn eval(args: EvalArgs, cfg: Option<&Path>) -> CliResult<()> {
    let (a, resolved) = resolve("eval", &args, cfg, &[("split", json!("test"))])?;
    let matrix = FeatureMatrix::load_csv(required(&a.matrix, "matrix")?)?;
    let model = load_model(required(&a.model, "model")?)?;
    let out = required(&a.out, "out")?;
    let selected = match required(&a.split, "split")?.as_str() {
        "all" => matrix,
        s => matrix.split(s.parse().map_err(|e: llmdetect_core::Error| usage(e.to_string()))?),
    };
    if selected.n_rows() == 0 {
        return Err(CliError::Data("no rows in the selected split".into()));
    }
    if (a.group_by.is_some() || a.intensity) && a.corpus.is_none() {
        return Err(usage("--group-by and --intensity need --corpus for document metadata"));
    }
    let corpus = a.corpus.as_ref().map(load_corpus).transpose()?;
    let meta: BTreeMap<&str, &BTreeMap<String, String>> = corpus
        .iter()
        .flat_map(|c| c.iter())
        .map(|d| (d.id.as_str(), &d.meta))
        .collect();
    let docs = evaluated_docs(&model, &selected, &meta)?;
    let mut report = EvalReport::from_docs(&docs.iter().collect::<Vec<_>>())?;
    if report.weighted_f1.is_none() && report.mse.is_none() {
        return Err(CliError::Data("the matrix has no gold labels for this model's task".into()));
    }
    if let Some(key) = &a.group_by {
        let (groups, average) = grouped_report(&docs, key)?;
        report.group_key = Some(key.clone());
        report.groups = Some(groups);
        report.group_average = Some(average);
    }
    if a.intensity {
        report.intensity = Some(intensity_curve(&docs)?);
    }
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Internal(e.to_string()))?;
    text.push('\n');
    write_text(&out, &text)?;
    print!("{}", report.to_table());
    finish(&out, false, "eval", &resolved)
}

pub fn gltr(args: GltrArgs, cfg: Option<&Path>) -> CliResult<()> {
    let (a, resolved) = resolve("gltr", &args, cfg, &[])?;
    let sidecars = load_sidecar(required(&a.sidecar, "sidecar")?)?;
    let doc_id = required(&a.doc_id, "doc-id")?;
    let out: PathBuf = required(&a.out, "out")?;
    let sidecar = sidecars
        .iter()
        .find(|s| s.doc_id == doc_id)
        .ok_or_else(|| CliError::Data(format!("document {doc_id:?} is not in the sidecar")))?;
    render_gltr(sidecar, &out)?;
    println!("wrote {}", out.display());
    finish(&out, false, "gltr", &resolved)
}
