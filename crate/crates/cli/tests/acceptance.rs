//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
//! fails. Tolerances are pinned next to each check.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use llmdetect_core::corpus::load_corpus;
use llmdetect_core::eval::{f1_from_counts, f1_scores, regression_metrics, IntensityTag, INTENSITY_KEY};
use llmdetect_core::lingfeat::{
    fold, grammar_errors_per_1k, normalize_valence, readability_fog, sentiment_polarity, syntactic_diversity, tokenize,
    vocab_richness, BuiltinRules, SentimentLexicon,
};
use llmdetect_core::lir::{extension_lir, jaccard_distance, label_role_lir, polish_lir};
use llmdetect_core::lmfeat::{rank_bucket, rank_features, uniform_weights, SidecarToken, BOS, UNKNOWN};
use llmdetect_core::models::{train_ridge, SoftmaxClassifier, SoftmaxParams, Task, TrainedModel};
use llmdetect_core::synth::{generate_extension_intensity, generate_polish_intensity, SynthConfig};
use llmdetect_core::{EvalReport, FeatureMatrix, LogprobSidecar, NGramModel, RoleLabel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(name: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || format!("{name}: got {got}, want {want} (tol {tol:e})"))
}

// Word-set and word-count ratio fixtures, values enumerated by hand.
fn lir_oracles() -> Check {
    const TOL: f64 = 1e-9;
    let start = Instant::now();
    let jaccard: &[(&str, &str, f64)] = &[
        ("the cat sat", "the cat sat", 0.0),
        ("the cat", "a dog", 1.0),
        ("The Cat", "the cat", 0.0),
        ("the cat sat", "the cat ran", 1.0 - 2.0 / 4.0),
        ("a b c d", "c d e f", 1.0 - 2.0 / 6.0),
        ("one two three", "one", 1.0 - 1.0 / 3.0),
        ("x x x y", "y y", 1.0 - 1.0 / 2.0),
        ("alpha beta gamma delta epsilon", "alpha beta gamma delta zeta", 1.0 - 4.0 / 6.0),
        ("Hello, world!", "hello world", 0.0),
        ("it's fine", "its fine", 1.0 - 1.0 / 3.0),
    ];
    for (a, b, want) in jaccard {
        close(&format!("jaccard({a:?}, {b:?})"), jaccard_distance(a, b).map_err(|e| e.to_string())?, *want, TOL)?;
    }
    let forty: Vec<String> = (0..40).map(|i| format!("w{i}")).collect();
    let eighty: Vec<String> = (0..80).map(|i| format!("w{i}")).collect();
    let ten = (0..10).map(|i| format!("p{i}")).collect::<Vec<_>>().join(" ");
    let thirty = format!("{ten} {}", (0..20).map(|i| format!("q{i}")).collect::<Vec<_>>().join(" "));
    let extension: Vec<(String, String, f64)> = vec![
        (forty.join(" "), eighty.join(" "), 0.5),
        ("One two three.".into(), "One two three. Four five six seven.".into(), 0.571429),
        ("Same text here.".into(), "Same text here.".into(), 0.0),
        ("A b.".into(), "A  b.\n\nC d e f g h i j.".into(), 0.8),
        ("Hi".into(), "Hi there friend".into(), 0.666667),
        (ten.clone(), thirty, 0.666667),
        ("Start".into(), "Start one two three four five six".into(), 0.857143),
    ];
    for (prefix, full, want) in &extension {
        let got = extension_lir(prefix, full).map_err(|e| e.to_string())?.value;
        close(&format!("extension({prefix:.20?})"), got, *want, TOL)?;
    }
    let polish: &[(&str, &str, f64)] = &[
        ("the cat sat", "the cat sat", 0.0),
        ("the cat sat on the mat", "the dog sat on the rug", 1.0 - 3.0 / 7.0),
        ("good day", "bad night", 1.0),
        ("We went home early", "We went home late", 1.0 - 3.0 / 5.0),
        ("A B C", "a b c d", 1.0 - 3.0 / 4.0),
    ];
    for (a, b, want) in polish {
        close(&format!("polish({a:?})"), polish_lir(a, b).map_err(|e| e.to_string())?.value, *want, TOL)?;
    }
    ensure(extension_lir("Hel", "Hello there").is_err(), || "prefix inside a word accepted".into())?;
    ensure(jaccard_distance("", "x").is_err(), || "empty text accepted".into())?;
    ensure(
        label_role_lir(&llmdetect_core::Document::new("h", "x", RoleLabel::HumanAuthor), None).unwrap().value == 0.0
            && label_role_lir(&llmdetect_core::Document::new("c", "x", RoleLabel::LlmCreator), None).unwrap().value
                == 1.0,
        || "pure roles not fixed at 0 and 1".into(),
    )?;
    let n = jaccard.len() + extension.len() + polish.len();
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("{n} fixtures within {TOL:e} plus edge cases, {elapsed:.2?}"))
}

enum Metric {
    Ttr,
    Fog,
    Sentiment,
    ErrorsPer1k,
    Diversity,
}

fn linguistic_oracles() -> Check {
    use Metric::*;
    const TOL: f64 = 1e-6;
    let start = Instant::now();
    let lex = SentimentLexicon::bundled();
    let norm = |s: f64| s / (s * s + 15.0).sqrt();
    let fixtures: Vec<(Metric, &str, f64)> = vec![
        (Ttr, "The cat sat. The cat ran.", 4.0 / 6.0),
        (Ttr, "Dog dog DOG.", 1.0 / 3.0),
        (Ttr, "One two three four five.", 1.0),
        (Ttr, "It's its IT'S.", 2.0 / 3.0),
        (Fog, "The cat sat on the mat.", 0.4 * (6.0 / 1.0 + 100.0 * 0.0 / 6.0)),
        (Fog, "Beautiful elephants celebrate. Dogs run.", 0.4 * (5.0 / 2.0 + 100.0 * 3.0 / 5.0)),
        (Fog, "I went home. She stayed. We laughed loudly today.", 0.4 * (9.0 / 3.0)),
        (Sentiment, "This is good.", norm(1.9)),
        (Sentiment, "This is not good.", norm(1.9 * -0.74)),
        (Sentiment, "This is very good.", norm(1.9 + 0.293)),
        (Sentiment, "Good. Bad.", (norm(1.9) + norm(-2.5)) / 2.0),
        (Sentiment, "The table is brown.", 0.0),
        (Sentiment, "Great and awful.", norm(3.1 - 2.0)),
        (ErrorsPer1k, "The the cat sat.", 1.0 / 4.0 * 1000.0),
        (ErrorsPer1k, "a apple fell. it broke", 4.0 / 5.0 * 1000.0),
        (ErrorsPer1k, "An hour passed. A unicorn ran.", 0.0),
        (Diversity, "I left because it rained. Although tired, she ran. When done we ate.", 2.0 / 3.0),
        (Diversity, "She said that he knew which road was closed.", 2.0),
        (Diversity, "The dog barked.", 0.0),
    ];
    for (metric, text, want) in &fixtures {
        let tok = tokenize(text).map_err(|e| e.to_string())?;
        let (name, got) = match metric {
            Ttr => ("ttr", vocab_richness(&tok).map_err(|e| e.to_string())?),
            Fog => ("fog", readability_fog(&tok).map_err(|e| e.to_string())?),
            Sentiment => ("sentiment", sentiment_polarity(&tok, &lex)),
            ErrorsPer1k => ("errors", grammar_errors_per_1k("d", &tok, &BuiltinRules).map_err(|e| e.to_string())?),
            Diversity => ("diversity", syntactic_diversity(&tok)),
        };
        close(&format!("{name}({text:?})"), got, *want, TOL)?;
    }
    close("normalize(0)", normalize_valence(0.0), 0.0, TOL)?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("{} fixtures within {TOL:e}, {elapsed:.2?}", fixtures.len()))
}

fn random_text(rng: &mut ChaCha8Rng, vocab: &[String], len: usize) -> String {
    (0..len).map(|_| vocab[rng.random_range(0..vocab.len())].as_str()).collect::<Vec<_>>().join(" ")
}

fn ngram_properties() -> Check {
    const TOL: f64 = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let vocab: Vec<String> = (0..30).map(|i| format!("w{i}")).collect();
    let texts: Vec<String> = (0..40)
        .map(|_| {
            let k = 20 + rng.random_range(0..10);
            random_text(&mut rng, &vocab[..k], 30)
        })
        .collect();
    let model = NGramModel::train(&texts, 3, &[0.2, 0.3, 0.5]).map_err(|e| e.to_string())?;
    ensure(model.vocab_size() <= 50, || format!("vocabulary {}", model.vocab_size()))?;

    let mut pool: Vec<String> = vocab.clone();
    pool.push("unseen".into());
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let len = rng.random_range(0..5);
        let mut ctx: Vec<&str> = (0..len).map(|_| pool[rng.random_range(0..pool.len())].as_str()).collect();
        if rng.random_bool(0.2) {
            ctx.insert(0, BOS);
        }
        let sum: f64 = model.distribution(&ctx).iter().map(|(_, p)| p).sum();
        worst = worst.max((sum - 1.0).abs());
    }
    ensure(worst <= TOL, || format!("distribution sum off by {worst:e}"))?;

    let single = NGramModel::train(&["a a a a a a"], 1, &uniform_weights(1)).map_err(|e| e.to_string())?;
    let ppl = llmdetect_core::lmfeat::perplexity(&single.score_tokens("d", "a a a").map_err(|e| e.to_string())?);
    close("single-type perplexity", ppl, 1.0, TOL)?;

    let mut positions = 0;
    for t in 0..50 {
        let text = random_text(&mut rng, &pool, 25);
        let sc = model.score_tokens(&format!("t{t}"), &text).map_err(|e| e.to_string())?;
        let surface: Vec<&str> = text.split(' ').collect();
        for (i, tok) in sc.tokens.iter().enumerate() {
            let dist = model.distribution(&surface[..i]);
            let folded = fold(surface[i]);
            let target = if dist.iter().any(|(w, _)| *w == folded) { folded.as_str() } else { UNKNOWN };
            let p = dist.iter().find(|(w, _)| *w == target).unwrap().1;
            let brute = 1 + dist.iter().filter(|(w, q)| *q > p || (*q == p && *w < target)).count() as u64;
            ensure(tok.rank == brute, || format!("rank {} vs brute force {brute} at {t}:{i}", tok.rank))?;
            let argmax = dist
                .iter()
                .fold(None::<(&str, f64)>, |best, &(w, q)| match best {
                    Some((bw, bq)) if bq > q || (bq == q && bw < w) => Some((bw, bq)),
                    _ => Some((w, q)),
                })
                .unwrap()
                .0;
            ensure((tok.rank == 1) == (argmax == target), || format!("rank-1 disagrees with argmax at {t}:{i}"))?;
            positions += 1;
        }
    }
    Ok(format!(
        "max |sum-1| {worst:.1e} over 1000 contexts; perplexity {ppl}; {positions} ranks match brute force (vocab {})",
        model.vocab_size()
    ))
}

fn rank_buckets() -> Check {
    let cases = [(1, 0), (10, 0), (11, 1), (100, 1), (101, 2), (1000, 2), (1001, 3), (u64::MAX, 3)];
    for (rank, want) in cases {
        ensure(rank_bucket(rank) == want, || format!("rank {rank} in bucket {}", rank_bucket(rank)))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for s in 0..100 {
        let n = rng.random_range(1..500);
        let sidecar = LogprobSidecar {
            doc_id: format!("s{s}"),
            model_name: "random".into(),
            tokens: (0..n)
                .map(|i| SidecarToken {
                    text: format!("t{i}"),
                    logprob: -rng.random_range(0.0..20.0),
                    rank: 1 + rng.random_range(0..5000u64),
                })
                .collect(),
        };
        let f = rank_features(&sidecar);
        ensure(f.counts.iter().sum::<u64>() == n as u64 && f.token_total == n as u64, || {
            format!("sidecar {s}: counts {:?} for {n} tokens", f.counts)
        })?;
    }
    Ok("boundaries 10/11/100/101/1000/1001 correct; counts sum to totals on 100 random sidecars".into())
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn matrix(rows: Vec<Vec<f64>>) -> FeatureMatrix {
    let d = rows[0].len();
    let n = rows.len();
    FeatureMatrix::new((0..d).map(|j| format!("x{j}")).collect(), (0..n).map(|i| format!("r{i}")).collect(), rows)
        .unwrap()
}

fn softmax_head() -> Check {
    const GRAD_TOL: f64 = 1e-5;
    // Fourth-order central stencil; its roundoff floor is far below that of
    // the two-point form for near-zero components. Denominators are floored
    // at 1e-6.
    const H: f64 = 1e-3;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let d = rng.random_range(1..6);
        let n = rng.random_range(1..12);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| gaussian(&mut rng) * 2.0).collect()).collect();
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..4)).collect();
        let batch: Vec<usize> = (0..n).collect();
        let l2 = rng.random_range(0.0..0.5);
        let mut m = SoftmaxClassifier::zeros(d);
        for w in m.weights.iter_mut().flatten().chain(m.bias.iter_mut()) {
            *w = gaussian(&mut rng);
        }
        let (_, grad) = m.loss_and_gradient(&rows, &labels, &batch, l2);
        let analytic: Vec<f64> = grad.weights.iter().flatten().chain(&grad.bias).copied().collect();
        for (p, &a) in analytic.iter().enumerate() {
            let perturbed = |delta: f64| {
                let mut q = m.clone();
                let k = q.weights.iter().flatten().count();
                if p < k {
                    q.weights[p / d][p % d] += delta;
                } else {
                    q.bias[p - k] += delta;
                }
                q.loss_and_gradient(&rows, &labels, &batch, l2).0
            };
            let numeric =
                (8.0 * (perturbed(H) - perturbed(-H)) - (perturbed(2.0 * H) - perturbed(-2.0 * H))) / (12.0 * H);
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max(rel);
        }
    }
    ensure(worst < GRAD_TOL, || format!("max relative gradient error {worst:e}"))?;

    let centers = [(3.0, 3.0), (-3.0, 3.0), (-3.0, -3.0), (3.0, -3.0)];
    let mut rows = Vec::new();
    let mut roles = Vec::new();
    for i in 0..200 {
        let (cx, cy) = centers[i % 4];
        rows.push(vec![cx + 0.7 * gaussian(&mut rng), cy + 0.7 * gaussian(&mut rng)]);
        roles.push(RoleLabel::ALL[i % 4]);
    }
    let train = matrix(rows).with_roles(roles.clone()).unwrap();
    let params = SoftmaxParams { lr: 0.1, epochs: 500, ..Default::default() };
    let (model, losses) = TrainedModel::fit(&train, Task::Rr, &params, 0.0).map_err(|e| e.to_string())?;
    let preds = match model.predict(&train).map_err(|e| e.to_string())? {
        llmdetect_core::models::Predictions::Roles(p) => p,
        _ => return Err("wrong head".into()),
    };
    let correct = preds.iter().zip(&roles).filter(|((p, _), g)| p == *g).count();
    let accuracy = correct as f64 / 200.0;
    ensure(accuracy >= 0.99, || format!("training accuracy {accuracy}"))?;
    let rises = losses.windows(2).filter(|w| w[1] > w[0]).count();
    ensure(rises == 0, || format!("loss increased in {rises} epochs"))?;
    Ok(format!(
        "max relative gradient error {worst:.1e} (tol {GRAD_TOL:e}); accuracy {accuracy:.3} after 500 epochs; loss {:.4} -> {:.4}, never increasing",
        losses[0],
        losses[losses.len() - 1]
    ))
}

fn ridge_head() -> Check {
    const RESIDUAL_TOL: f64 = 1e-8;
    const RECOVERY_TOL: f64 = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (n, d) = (rng.random_range(10..60), rng.random_range(1..6));
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| gaussian(&mut rng)).collect()).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let lambda = rng.random_range(0.0..2.0);
        let r = train_ridge(&matrix(rows.clone()).with_lir(y.clone()).unwrap(), lambda).map_err(|e| e.to_string())?;
        let mean_x: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
        let mean_y = y.iter().sum::<f64>() / n as f64;
        for j in 0..d {
            let mut lhs = lambda * r.weights[j];
            let mut rhs = 0.0;
            for (row, yi) in rows.iter().zip(&y) {
                let xj = row[j] - mean_x[j];
                let fitted: f64 = (0..d).map(|k| (row[k] - mean_x[k]) * r.weights[k]).sum();
                lhs += xj * fitted;
                rhs += xj * (yi - mean_y);
            }
            worst = worst.max((lhs - rhs).abs());
        }
    }
    ensure(worst < RESIDUAL_TOL, || format!("normal-equation residual {worst:e}"))?;

    let rows: Vec<Vec<f64>> = (0..30).map(|_| (0..4).map(|_| rng.random::<f64>()).collect()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let r = train_ridge(&matrix(rows).with_lir(y).unwrap(), 0.0).map_err(|e| e.to_string())?;
    let mut err = (r.weights[0] - 1.0).abs().max(r.bias.abs());
    for w in &r.weights[1..] {
        err = err.max(w.abs());
    }
    ensure(err < RECOVERY_TOL, || format!("recovery error {err:e}"))?;
    Ok(format!("residual inf-norm {worst:.1e} (tol {RESIDUAL_TOL:e}); y = x1 recovered within {err:.1e}"))
}

fn metrics() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for v in 0..1000 {
        let n = rng.random_range(1..200);
        let gold: Vec<usize> = (0..n).map(|_| rng.random_range(0..4)).collect();
        let pred: Vec<usize> = (0..n).map(|_| rng.random_range(0..4)).collect();
        let (_, weighted) = f1_scores(&gold, &pred).map_err(|e| e.to_string())?;
        let mut brute = 0.0;
        for c in 0..4 {
            let (mut tp, mut fp, mut fn_, mut support) = (0u64, 0u64, 0u64, 0u64);
            for (&g, &p) in gold.iter().zip(&pred) {
                match (g == c, p == c) {
                    (true, true) => tp += 1,
                    (false, true) => fp += 1,
                    (true, false) => fn_ += 1,
                    _ => {}
                }
                support += u64::from(g == c);
            }
            brute += support as f64 * f1_from_counts(tp, fp, fn_);
        }
        brute /= n as f64;
        ensure(weighted == brute, || format!("vector {v}: weighted F1 {weighted} vs brute force {brute}"))?;
    }
    for v in 0..1000 {
        let n = rng.random_range(1..100);
        let gold: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let pred: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let (mse, mae) = regression_metrics(&gold, &pred).map_err(|e| e.to_string())?;
        ensure(mae * mae <= mse, || format!("vector {v}: mae^2 {} > mse {mse}", mae * mae))?;
    }
    let (mse, mae) = regression_metrics(&[0.0, 1.0, 0.3, 0.5], &[0.0; 4]).map_err(|e| e.to_string())?;
    close("baseline mse", mse, 0.335, 1e-12)?;
    close("baseline mae", mae, 0.45, 1e-12)?;
    Ok(format!(
        "weighted F1 bit-identical to brute force on 1000 vectors; Jensen holds on 1000; baseline MSE {mse} MAE {mae}"
    ))
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_llmdetect")
}

fn run(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(bin()).args(args).current_dir(dir).output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "llmdetect {} exited with {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ))
    }
}

/// The documented pipeline, in `dir`, with relative paths throughout.
fn pipeline(dir: &Path, jobs: &str) -> Result<(), String> {
    let steps: &[&[&str]] = &[
        &["synth", "--out", "syn", "--seed", "42"],
        &["label", "--corpus", "syn/corpus.jsonl", "--companions", "syn/companions.jsonl", "--out", "labeled.jsonl", "--jobs", jobs],
        &["split", "--corpus", "labeled.jsonl", "--seed", "42", "--out", "split.jsonl"],
        &["ngram", "--corpus", "syn/reference.jsonl", "--ngram-order", "3", "--out", "ngram.json"],
        &["score", "--corpus", "split.jsonl", "--ngram-model", "ngram.json", "--out", "sidecar.jsonl", "--jobs", jobs],
        &["featurize", "--corpus", "split.jsonl", "--families", "linguistic,rank", "--sidecar", "sidecar.jsonl", "--out", "matrix.csv", "--jobs", jobs],
        &["train", "--matrix", "matrix.csv", "--task", "rr", "--out", "rr.model"],
        &["train", "--matrix", "matrix.csv", "--task", "im", "--out", "im.model"],
        &["eval", "--matrix", "matrix.csv", "--model", "rr.model", "--corpus", "split.jsonl", "--group-by", "source", "--out", "rr.json"],
        &["eval", "--matrix", "matrix.csv", "--model", "im.model", "--out", "im.json"],
    ];
    for step in steps {
        run(dir, step)?;
    }
    Ok(())
}

fn report(path: &Path) -> Result<EvalReport, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    serde_json::from_str(&text).map_err(|e| e.to_string())
}

fn end_to_end() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let start = Instant::now();
    pipeline(dir.path(), "1")?;
    let elapsed = start.elapsed();
    let rr = report(&dir.path().join("rr.json"))?;
    let im = report(&dir.path().join("im.json"))?;
    let f1 = rr.weighted_f1.ok_or("no F1 in report")?;
    let mse = im.mse.ok_or("no MSE in report")?;
    let corpus = load_corpus(dir.path().join("syn/corpus.jsonl")).map_err(|e| e.to_string())?;
    let roles = RoleLabel::ALL.iter().filter(|&&r| corpus.iter().any(|d| d.role == r)).count();
    ensure(roles == 4, || format!("{roles} roles generated"))?;
    ensure(f1 >= 90.0, || format!("test weighted F1 {f1:.2} < 90"))?;
    ensure(mse <= 0.02, || format!("test MSE {mse:.4} > 0.02"))?;
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("test weighted F1 {f1:.2} (>= 90), IM MSE {mse:.4} (<= 0.02), {elapsed:.1?} with --jobs 1"))
}

fn golden_means(out: &llmdetect_core::synth::SynthOutput) -> Result<BTreeMap<IntensityTag, f64>, String> {
    let mut sums: BTreeMap<IntensityTag, (f64, usize)> = BTreeMap::new();
    for d in out.corpus.iter() {
        let lir = label_role_lir(d, out.companions.get(&d.id).map(String::as_str)).map_err(|e| e.to_string())?;
        let tag = IntensityTag::parse(&d.meta[INTENSITY_KEY]).map_err(|e| e.to_string())?;
        let e = sums.entry(tag).or_default();
        e.0 += lir.value;
        e.1 += 1;
    }
    Ok(sums.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect())
}

fn intensity() -> Check {
    let cfg = SynthConfig { seed: 42, ..Default::default() };
    let ext: Vec<f64> = golden_means(&generate_extension_intensity(&cfg).map_err(|e| e.to_string())?)?.into_values().collect();
    let pol: Vec<f64> = golden_means(&generate_polish_intensity(&cfg).map_err(|e| e.to_string())?)?.into_values().collect();
    ensure(ext.len() == 3 && ext.windows(2).all(|w| w[1] < w[0]), || format!("extension means {ext:?}"))?;
    ensure(pol.len() == 6 && pol.windows(2).all(|w| w[1] >= w[0]), || format!("polish means {pol:?}"))?;
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" > ");
    Ok(format!("extension Low>Medium>High: {}; polish stages 1..6: {}", fmt(&ext), fmt(&pol).replace('>', "<=")))
}

fn files(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Check {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    for (dir, jobs) in [(a.path(), "1"), (b.path(), "4")] {
        pipeline(dir, jobs)?;
        run(dir, &["synth", "--kind", "extension", "--out", "ext", "--seed", "7", "--intensity-articles", "5"])?;
        run(dir, &["synth", "--kind", "polish", "--out", "pol", "--seed", "7", "--intensity-articles", "5"])?;
        run(dir, &["label", "--corpus", "ext/corpus.jsonl", "--companions", "ext/companions.jsonl", "--out", "ext.jsonl"])?;
        run(dir, &["featurize", "--corpus", "ext.jsonl", "--families", "linguistic,rank", "--ngram-model", "ngram.json", "--out", "ext.csv", "--jobs", jobs])?;
        run(dir, &["eval", "--matrix", "ext.csv", "--model", "im.model", "--split", "all", "--intensity", "--corpus", "ext.jsonl", "--out", "ext.json"])?;
        run(dir, &["train", "--matrix", "matrix.csv", "--task", "rr", "--batch-size", "16", "--epochs", "20", "--seed", "3", "--out", "mb.model"])?;
        run(dir, &["featurize", "--corpus", "split.jsonl", "--families", "linguistic,lm,rank", "--ngram-model", "ngram.json", "--out", "all.csv", "--jobs", jobs])?;
        run(dir, &["gltr", "--sidecar", "sidecar.jsonl", "--doc-id", "e0000", "--out", "gltr/e0000.html"])?;
    }
    let (fa, fb) = (files(a.path()), files(b.path()));
    ensure(fa == fb, || format!("different file sets: {fa:?} vs {fb:?}"))?;
    for f in &fa {
        let (x, y) = (std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
        let is_stamp = f.to_string_lossy().ends_with("run.toml");
        let same = if is_stamp { strip_jobs(&x) == strip_jobs(&y) } else { x == y };
        ensure(same, || format!("{} differs between runs", f.display()))?;
    }
    Ok(format!("{} output files byte-identical across two runs (--jobs 1 vs 4; run stamps compared without the jobs line)", fa.len()))
}

fn strip_jobs(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).lines().filter(|l| !l.starts_with("jobs =")).collect::<Vec<_>>().join("\n")
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("LIR oracle suite", lir_oracles),
        ("linguistic feature oracle suite", linguistic_oracles),
        ("n-gram LM properties", ngram_properties),
        ("rank buckets", rank_buckets),
        ("softmax head", softmax_head),
        ("ridge head", ridge_head),
        ("metrics", metrics),
        ("end-to-end synthetic pipeline", end_to_end),
        ("intensity monotonicity", intensity),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
