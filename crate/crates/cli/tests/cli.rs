use std::path::Path;
use std::process::{Command, Output};

use llmdetect_core::corpus::{load_corpus, save_corpus};
use llmdetect_core::{Corpus, Document, EvalReport, FeatureMatrix, RoleLabel, Split};

fn llmdetect(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_llmdetect")).args(args).current_dir(dir).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = llmdetect(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn four_roles(dir: &Path) {
    let docs = vec![
        Document::new("h", "I walked home. It was late.", RoleLabel::HumanAuthor),
        Document::new("c", "The model wrote this. It is fluent.", RoleLabel::LlmCreator),
        Document::new("p", "I strolled home. It was late.", RoleLabel::LlmPolisher),
        Document::new("e", "I walked home. It was late. The night was calm and quiet.", RoleLabel::LlmExtender),
    ];
    save_corpus(&Corpus::new(docs).unwrap(), dir.join("corpus.jsonl")).unwrap();
    write(
        dir,
        "companions.jsonl",
        "{\"id\":\"p\",\"text\":\"I walked home. It was late.\"}\n{\"id\":\"e\",\"text\":\"I walked home. It was late.\"}\n",
    );
}

#[test]
fn label_four_roles() {
    let dir = tempfile::tempdir().unwrap();
    four_roles(dir.path());
    ok(dir.path(), &["label", "--corpus", "corpus.jsonl", "--companions", "companions.jsonl", "--out", "out.jsonl"]);
    let c = load_corpus(dir.path().join("out.jsonl")).unwrap();
    let lir = |id: &str| c.get(id).unwrap().lir.unwrap();
    assert_eq!(lir("h"), 0.0);
    assert_eq!(lir("c"), 1.0);
    // {i, walked, home, it, was, late} vs {i, strolled, home, it, was, late}
    assert!((lir("p") - (1.0 - 5.0 / 7.0)).abs() < 1e-12);
    assert!((lir("e") - 0.5).abs() < 1e-12);
    assert!(dir.path().join("out.jsonl.run.toml").exists());
}

#[test]
fn label_all_human_without_companions() {
    let dir = tempfile::tempdir().unwrap();
    let docs = (0..3).map(|i| Document::new(format!("h{i}"), "Some words.", RoleLabel::HumanAuthor)).collect();
    save_corpus(&Corpus::new(docs).unwrap(), dir.path().join("c.jsonl")).unwrap();
    ok(dir.path(), &["label", "--corpus", "c.jsonl", "--out", "o.jsonl"]);
    assert!(load_corpus(dir.path().join("o.jsonl")).unwrap().iter().all(|d| d.lir == Some(0.0)));
}

#[test]
fn label_missing_companion_exits_2_and_lists_doc() {
    let dir = tempfile::tempdir().unwrap();
    four_roles(dir.path());
    write(dir.path(), "partial.jsonl", "{\"id\":\"e\",\"text\":\"I walked home. It was late.\"}\n");
    let out = llmdetect(dir.path(), &["label", "--corpus", "corpus.jsonl", "--companions", "partial.jsonl", "--out", "o.jsonl"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("p:"), "{stderr}");
    let c = load_corpus(dir.path().join("o.jsonl")).unwrap();
    assert_eq!(c.get("p").unwrap().lir, None);
    assert_eq!(c.get("e").unwrap().lir, Some(0.5));
}

fn synth_pipeline(dir: &Path) {
    ok(dir, &["synth", "--out", "syn", "--docs-per-role", "20", "--reference-docs", "40", "--seed", "3"]);
    ok(dir, &["label", "--corpus", "syn/corpus.jsonl", "--companions", "syn/companions.jsonl", "--out", "l.jsonl"]);
    ok(dir, &["split", "--corpus", "l.jsonl", "--seed", "3", "--out", "s.jsonl"]);
    ok(dir, &["ngram", "--corpus", "syn/reference.jsonl", "--out", "ng.json"]);
    ok(dir, &["score", "--corpus", "s.jsonl", "--ngram-model", "ng.json", "--out", "side.jsonl"]);
}

#[test]
fn featurize_column_counts_and_missing_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth_pipeline(d);
    ok(d, &["featurize", "--corpus", "s.jsonl", "--families", "linguistic", "--out", "a.csv"]);
    let a = FeatureMatrix::load_csv(d.join("a.csv")).unwrap();
    assert_eq!(a.n_features(), 7);
    assert!(a.feature_names.iter().all(|n| n.starts_with("ling.")));
    ok(d, &["featurize", "--corpus", "s.jsonl", "--families", "linguistic,rank", "--sidecar", "side.jsonl", "--out", "b.csv"]);
    let b = FeatureMatrix::load_csv(d.join("b.csv")).unwrap();
    assert_eq!(b.n_features(), 13);
    ok(d, &["featurize", "--corpus", "s.jsonl", "--families", "lm", "--ngram-model", "ng.json", "--out", "c.csv"]);
    assert_eq!(FeatureMatrix::load_csv(d.join("c.csv")).unwrap().n_features(), 2);

    let side = std::fs::read_to_string(d.join("side.jsonl")).unwrap();
    let dropped: Vec<&str> = side.lines().filter(|l| !l.contains("\"doc_id\":\"c0005\"")).collect();
    write(d, "partial.jsonl", &(dropped.join("\n") + "\n"));
    let out = llmdetect(d, &["featurize", "--corpus", "s.jsonl", "--families", "rank", "--sidecar", "partial.jsonl", "--out", "x.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("c0005"));

    let out = llmdetect(d, &["featurize", "--corpus", "s.jsonl", "--families", "rank", "--out", "x.csv"]);
    assert_eq!(out.status.code(), Some(1));
    let out = llmdetect(d, &["featurize", "--corpus", "s.jsonl", "--families", "syntax", "--out", "x.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

fn separable_matrix(dir: &Path, constant_lir: bool) {
    let mut rows = Vec::new();
    let mut roles = Vec::new();
    let mut splits = Vec::new();
    for i in 0..80 {
        let c = i % 4;
        let jitter = (i / 4) as f64 * 0.01;
        rows.push(vec![c as f64 * 10.0 + jitter, (c % 2) as f64 * 5.0 - jitter]);
        roles.push(RoleLabel::ALL[c]);
        splits.push(Some(match i % 10 {
            0..=6 => Split::Train,
            7 | 8 => Split::Val,
            _ => Split::Test,
        }));
    }
    let lir = (0..80).map(|i| if constant_lir { 0.5 } else { (i % 4) as f64 / 3.0 }).collect();
    FeatureMatrix::new(vec!["a".into(), "b".into()], (0..80).map(|i| format!("d{i}")).collect(), rows)
        .unwrap()
        .with_roles(roles)
        .unwrap()
        .with_lir(lir)
        .unwrap()
        .with_splits(splits)
        .unwrap()
        .save_csv(dir.join("m.csv"))
        .unwrap();
}

#[test]
fn train_rr_on_separable_matrix() {
    let dir = tempfile::tempdir().unwrap();
    separable_matrix(dir.path(), false);
    let stdout = ok(dir.path(), &["train", "--matrix", "m.csv", "--task", "rr", "--out", "rr.model"]);
    let val = stdout.lines().find(|l| l.starts_with("val:")).unwrap();
    let f1: f64 = val.split("weighted F1 ").nth(1).unwrap().trim().parse().unwrap();
    assert!(f1 >= 99.0, "{stdout}");

    ok(dir.path(), &["eval", "--matrix", "m.csv", "--model", "rr.model", "--out", "r.json"]);
    let r: EvalReport = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(r.weighted_f1, Some(100.0));
}

#[test]
fn train_im_on_constant_labels() {
    let dir = tempfile::tempdir().unwrap();
    separable_matrix(dir.path(), true);
    let stdout = ok(dir.path(), &["train", "--matrix", "m.csv", "--task", "im", "--out", "im.model"]);
    assert!(stdout.contains("val: n=16  MSE 0.0000"), "{stdout}");
    ok(dir.path(), &["eval", "--matrix", "m.csv", "--model", "im.model", "--out", "r.json"]);
    let r: EvalReport = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert!(r.mse.unwrap() < 1e-20);
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    separable_matrix(dir.path(), false);
    for args in [
        &["train", "--matrix", "m.csv", "--task", "regress", "--out", "x"][..],
        &["train", "--task", "rr"][..],
        &["frobnicate"][..],
        &["train", "--lr", "fast"][..],
    ] {
        assert_eq!(llmdetect(dir.path(), args).status.code(), Some(1), "{args:?}");
    }
    assert_eq!(llmdetect(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn eval_dimension_mismatch_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    separable_matrix(dir.path(), false);
    ok(dir.path(), &["train", "--matrix", "m.csv", "--task", "rr", "--out", "rr.model"]);
    FeatureMatrix::new(vec!["a".into()], vec!["x".into()], vec![vec![1.0]])
        .unwrap()
        .with_roles(vec![RoleLabel::HumanAuthor])
        .unwrap()
        .with_splits(vec![Some(Split::Test)])
        .unwrap()
        .save_csv(dir.path().join("small.csv"))
        .unwrap();
    let out = llmdetect(dir.path(), &["eval", "--matrix", "small.csv", "--model", "rr.model", "--out", "r.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn grouped_and_intensity_reports() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth_pipeline(d);
    ok(d, &["featurize", "--corpus", "s.jsonl", "--families", "linguistic,rank", "--ngram-model", "ng.json", "--out", "m.csv"]);
    ok(d, &["train", "--matrix", "m.csv", "--task", "rr", "--out", "rr.model"]);
    ok(d, &["train", "--matrix", "m.csv", "--task", "im", "--out", "im.model"]);

    // two sources only
    let mut c = load_corpus(d.join("s.jsonl")).unwrap();
    for (i, doc) in c.documents.iter_mut().enumerate() {
        doc.meta.insert("source".into(), if i % 2 == 0 { "news" } else { "wiki" }.into());
    }
    save_corpus(&c, d.join("two.jsonl")).unwrap();
    let table = ok(d, &["eval", "--matrix", "m.csv", "--model", "rr.model", "--corpus", "two.jsonl", "--group-by", "source", "--out", "g.json"]);
    assert!(table.contains("group average"));
    let r: EvalReport = serde_json::from_str(&std::fs::read_to_string(d.join("g.json")).unwrap()).unwrap();
    let groups = r.groups.unwrap();
    assert_eq!(groups.keys().collect::<Vec<_>>(), vec!["news", "wiki"]);
    let mean = (groups["news"].weighted_f1.unwrap() + groups["wiki"].weighted_f1.unwrap()) / 2.0;
    assert!((r.group_average.unwrap().weighted_f1.unwrap() - mean).abs() < 1e-12);

    ok(d, &["synth", "--kind", "extension", "--out", "ext", "--intensity-articles", "4", "--reference-docs", "2"]);
    ok(d, &["label", "--corpus", "ext/corpus.jsonl", "--companions", "ext/companions.jsonl", "--out", "ext.jsonl"]);
    ok(d, &["featurize", "--corpus", "ext.jsonl", "--families", "linguistic,rank", "--ngram-model", "ng.json", "--out", "ext.csv"]);
    ok(d, &["eval", "--matrix", "ext.csv", "--model", "im.model", "--split", "all", "--intensity", "--corpus", "ext.jsonl", "--out", "i.json"]);
    let r: EvalReport = serde_json::from_str(&std::fs::read_to_string(d.join("i.json")).unwrap()).unwrap();
    let curve = r.intensity.unwrap();
    let buckets: Vec<&str> = curve.iter().map(|p| p.bucket.as_str()).collect();
    assert_eq!(buckets, vec!["ext:Low", "ext:Medium", "ext:High"]);

    let out = llmdetect(d, &["eval", "--matrix", "ext.csv", "--model", "im.model", "--split", "all", "--intensity", "--out", "i.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn gltr_page_and_absent_doc() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth_pipeline(d);
    ok(d, &["gltr", "--sidecar", "side.jsonl", "--doc-id", "h0001", "--out", "pages/h.html"]);
    let html = std::fs::read_to_string(d.join("pages/h.html")).unwrap();
    assert!(html.contains("<span class=\"b"));
    let out = llmdetect(d, &["gltr", "--sidecar", "side.jsonl", "--doc-id", "nope", "--out", "x.html"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    separable_matrix(dir.path(), false);
    write(dir.path(), "run.toml", "seed = 4\n[train]\nmatrix = \"m.csv\"\ntask = \"rr\"\nepochs = 3\nlr = 0.5\n");
    ok(dir.path(), &["--config", "run.toml", "train", "--epochs", "7", "--out", "a.model"]);
    let stamp = std::fs::read_to_string(dir.path().join("a.model.run.toml")).unwrap();
    let t: toml::Table = toml::from_str(&stamp).unwrap();
    let train = t["train"].as_table().unwrap();
    assert_eq!(train["epochs"].as_integer(), Some(7));
    assert_eq!(train["lr"].as_float(), Some(0.5));
    assert_eq!(train["seed"].as_integer(), Some(4));
    assert_eq!(train["matrix"].as_str(), Some("m.csv"));

    write(dir.path(), "bad.toml", "[train]\nlearning_rate = 1\n");
    let out = llmdetect(dir.path(), &["--config", "bad.toml", "train", "--out", "b.model"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn split_prints_stratified_counts() {
    let dir = tempfile::tempdir().unwrap();
    let docs = RoleLabel::ALL
        .iter()
        .flat_map(|&r| (0..10).map(move |i| Document::new(format!("{}{i}", r.code()), "Text here.", r)))
        .collect();
    save_corpus(&Corpus::new(docs).unwrap(), dir.path().join("c.jsonl")).unwrap();
    let stdout = ok(dir.path(), &["split", "--corpus", "c.jsonl", "--out", "s.jsonl"]);
    assert_eq!(stdout.matches("train 7  val 2  test 1").count(), 4, "{stdout}");
}
