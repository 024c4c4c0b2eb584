//! `llmdetect`: corpus labeling, feature extraction, training and evaluation
//! for human/LLM role recognition and involvement measurement.

mod commands;
mod config;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use error::CliError;

#[derive(Parser)]
#[command(name = "llmdetect", version, about = "Detect and measure LLM involvement in text")]
struct Cli {
    /// TOML file with parameters; flags given on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic corpus with companions and reference texts.
    Synth(SynthArgs),
    /// Fill in involvement-ratio labels from companion texts.
    Label(LabelArgs),
    /// Assign stratified train/val/test splits.
    Split(SplitArgs),
    /// Train an interpolated n-gram model on a corpus.
    Ngram(NgramArgs),
    /// Score a corpus with an n-gram model, writing a log-probability sidecar.
    Score(ScoreArgs),
    /// Compute feature families into a matrix.
    Featurize(FeaturizeArgs),
    /// Train a role classifier (rr) or ratio regressor (im).
    Train(TrainArgs),
    /// Evaluate a model on a matrix split.
    Eval(EvalArgs),
    /// Render the token-rank page for one document.
    Gltr(GltrArgs),
}

#[derive(Args, Serialize, Deserialize, Default, Debug)]
#[serde(deny_unknown_fields)]
pub struct SynthArgs {
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// main, extension or polish.
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub docs_per_role: Option<usize>,
    #[arg(long)]
    pub reference_docs: Option<usize>,
    #[arg(long)]
    pub intensity_articles: Option<usize>,
}

#[derive(Args, Serialize, Deserialize, Default, Debug)]
#[serde(deny_unknown_fields)]
pub struct LabelArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// JSONL of {"id", "text"}: the original for polished documents, the
    /// retained prefix for extended ones.
    #[arg(long)]
    pub companions: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Args, Serialize, Deserialize, Default, Debug)]
#[serde(deny_unknown_fields)]
pub struct SplitArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// train,val,test fractions.
    #[arg(long)]
    pub ratio: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Default, Debug)]
#[serde(deny_unknown_fields)]
pub struct NgramArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub ngram_order: Option<usize>,
    /// Comma-separated interpolation weights, unigram first; uniform if unset.
    #[arg(long)]
    pub weights: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Default, Debug)]
#[serde(deny_unknown_fields)]
pub struct ScoreArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub ngram_model: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Args, Serialize, Deserialize, Default, Debug)]
#[serde(deny_unknown_fields)]
pub struct FeaturizeArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Comma-separated subset of linguistic, lm, rank.
    #[arg(long)]
    pub families: Option<String>,
    /// Log-probability sidecar for the lm and rank families.
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
    /// N-gram model to score documents with when no sidecar is given.
    #[arg(long)]
    pub ngram_model: Option<PathBuf>,
    /// doc_id<TAB>count file from an external grammar checker.
    #[arg(long)]
    pub grammar_counts: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Args, Serialize, Deserialize, Default, Debug)]
#[serde(deny_unknown_fields)]
pub struct TrainArgs {
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// rr or im.
    #[arg(long)]
    pub task: Option<String>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub l2: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Default, Debug)]
#[serde(deny_unknown_fields)]
pub struct EvalArgs {
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Corpus supplying document metadata for grouping and intensity.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Metadata key to report per group.
    #[arg(long)]
    pub group_by: Option<String>,
    /// Report mean ratios per intensity bucket.
    #[arg(long)]
    #[serde(default)]
    pub intensity: bool,
    /// test, val, train or all.
    #[arg(long)]
    pub split: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Default, Debug)]
#[serde(deny_unknown_fields)]
pub struct GltrArgs {
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
    #[arg(long)]
    pub doc_id: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = cli.config.as_deref();
    match cli.command {
        Command::Synth(a) => commands::synth(a, cfg),
        Command::Label(a) => commands::label(a, cfg),
        Command::Split(a) => commands::split(a, cfg),
        Command::Ngram(a) => commands::ngram(a, cfg),
        Command::Score(a) => commands::score(a, cfg),
        Command::Featurize(a) => commands::featurize(a, cfg),
        Command::Train(a) => commands::train(a, cfg),
        Command::Eval(a) => commands::eval(a, cfg),
        Command::Gltr(a) => commands::gltr(a, cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("{e}");
            e.exit_code()
        }
        Err(_) => CliError::Internal("panicked".into()).exit_code(),
    }
}
