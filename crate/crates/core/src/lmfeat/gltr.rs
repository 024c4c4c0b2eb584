use std::fmt::Write as _;
use std::path::Path;

use super::{rank_bucket, rank_features, LogprobSidecar, BUCKET_NAMES};
use crate::error::{Error, Result};

/// Background colour per rank bucket: top 10 green, top 100 yellow, top 1000
/// red, the rest purple.
pub const BUCKET_COLORS: [&str; 4] = ["#a6f0a6", "#fff29e", "#ff9f9f", "#d7b3ff"];

const BUCKET_LABELS: [&str; 4] = ["rank &le; 10", "rank &le; 100", "rank &le; 1000", "rank &gt; 1000"];

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

/// Self-contained HTML page colouring each token by its rank bucket.
///
/// Tokens keep their order. A space is inserted between tokens unless the
/// token already begins with whitespace (subword scorers emit those).
pub fn render_gltr_html(sidecar: &LogprobSidecar) -> String {
    let features = rank_features(sidecar);
    let mut html = String::new();
    html.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    let _ = writeln!(html, "<title>Token ranks: {}</title>", escape(&sidecar.doc_id));
    html.push_str("<style>\n");
    html.push_str("body { font-family: sans-serif; max-width: 60em; margin: 2em auto; }\n");
    html.push_str(".text { line-height: 1.8; white-space: pre-wrap; }\n");
    for (i, color) in BUCKET_COLORS.iter().enumerate() {
        let _ = writeln!(html, ".b{i} {{ background: {color}; }}");
    }
    html.push_str("table { border-collapse: collapse; } td, th { padding: 0.2em 0.8em; }\n");
    html.push_str("</style>\n</head>\n<body>\n");
    let _ = writeln!(
        html,
        "<h1>{}</h1>\n<p>Scored by <code>{}</code>, {} tokens.</p>",
        escape(&sidecar.doc_id),
        escape(&sidecar.model_name),
        features.token_total
    );

    html.push_str("<table class=\"legend\">\n<tr><th>bucket</th><th>range</th><th>count</th><th>fraction</th></tr>\n");
    for b in 0..4 {
        let _ = writeln!(
            html,
            "<tr><td><span class=\"b{b}\">{}</span></td><td>{}</td><td>{}</td><td>{:.4}</td></tr>",
            BUCKET_NAMES[b], BUCKET_LABELS[b], features.counts[b], features.fractions[b]
        );
    }
    html.push_str("</table>\n<div class=\"text\">");
    for (i, t) in sidecar.tokens.iter().enumerate() {
        if i > 0 && !t.text.starts_with(char::is_whitespace) {
            html.push(' ');
        }
        let _ = write!(
            html,
            "<span class=\"b{}\" title=\"rank {}, logprob {:.4}\">{}</span>",
            rank_bucket(t.rank),
            t.rank,
            t.logprob,
            escape(&t.text)
        );
    }
    html.push_str("</div>\n</body>\n</html>\n");
    html
}

/// Writes the page to `out`, creating parent directories as needed.
pub fn render_gltr(sidecar: &LogprobSidecar, out: impl AsRef<Path>) -> Result<()> {
    let out = out.as_ref();
    sidecar.validate()?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(out, render_gltr_html(sidecar)).map_err(|e| Error::io(out, e))
}
