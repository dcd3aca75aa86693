//! Command-line surface. Every run-shaping knob is a flag here; config
//! files only describe generation configurations.

use clap::{Args, Parser, Subcommand, ValueEnum};
use mcd_core::gen::BackendKind;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "mcd",
    version,
    about = "Machine-configuration discrimination: generate text under controlled decoding \
             configurations and train classifiers to tell the configurations apart."
)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand)]
pub enum Cmd {
    /// Generate one JSONL of machine text per configuration in a config file.
    Generate(GenerateArgs),
    /// Build a labeled train/dev/test dataset for a named task.
    BuildTask(BuildTaskArgs),
    /// Train classifiers on a previously built dataset.
    Train(TrainArgs),
    /// Build a task and train classifiers on it in one step.
    RunTask(RunTaskArgs),
    /// Pairwise separability study along one decoding axis.
    Pairwise(PairwiseArgs),
    /// Merge completed runs into one accuracy table.
    Report(ReportArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Ngram,
    TinyNeural,
}

impl BackendArg {
    pub fn kind(self) -> BackendKind {
        match self {
            BackendArg::Ngram => BackendKind::Ngram,
            BackendArg::TinyNeural => BackendKind::TinyNeural,
        }
    }
}

/// Flags shared by every command that reads a corpus and builds documents.
#[derive(Args)]
pub struct CorpusArgs {
    /// Corpus JSONL ({"title": ..., "text": ...} per line). Without it a
    /// deterministic synthetic corpus is written into --out and used.
    #[arg(long)]
    pub corpus: Option<PathBuf>,

    /// Vocabulary size cap when ingesting the corpus.
    #[arg(long, default_value_t = 4000)]
    pub max_vocab: usize,

    /// Language-model backend that produces the machine text.
    #[arg(long, value_enum, default_value_t = BackendArg::Ngram)]
    pub backend: BackendArg,
}

#[derive(Args)]
pub struct GenerateArgs {
    /// Corpus JSONL providing titles and conditioning text.
    #[arg(long)]
    pub corpus: PathBuf,

    /// TOML file with one [[config]] block per generation configuration.
    #[arg(long)]
    pub config: PathBuf,

    #[arg(long, default_value = "mcd-out")]
    pub out: PathBuf,

    /// Documents to generate per configuration.
    #[arg(long, default_value_t = 100)]
    pub n: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = 4000)]
    pub max_vocab: usize,

    #[arg(long, value_enum, default_value_t = BackendArg::Ngram)]
    pub backend: BackendArg,
}

#[derive(Args)]
pub struct BuildTaskArgs {
    /// Task name: P1..P3, K1..K3, C1..C3, S1, optionally with a "+h" suffix.
    pub task: String,

    #[command(flatten)]
    pub corpus: CorpusArgs,

    #[arg(long, default_value = "mcd-out")]
    pub out: PathBuf,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = 200)]
    pub n_per_class: usize,

    /// Classify the generated continuation only (the default).
    #[arg(long, conflicts_with = "keep_prompt")]
    pub strip_prompt: bool,

    /// Keep the title + conditioning prompt in the classifier input.
    #[arg(long)]
    pub keep_prompt: bool,
}

impl BuildTaskArgs {
    pub fn strip(&self) -> bool {
        !self.keep_prompt
    }
}

#[derive(Args)]
pub struct TrainArgs {
    /// Dataset directory from build-task, or a path to its manifest file.
    #[arg(long)]
    pub data: PathBuf,

    #[arg(long, default_value = "mcd-out")]
    pub out: PathBuf,

    /// Models to train (comma-separated); all five when omitted.
    #[arg(long, value_delimiter = ',')]
    pub models: Vec<String>,

    /// Worker threads for independent (task, model) jobs.
    #[arg(long)]
    pub workers: Option<usize>,

    /// Training seed; defaults to the dataset's run seed.
    #[arg(long)]
    pub train_seed: Option<u64>,

    #[arg(long, default_value_t = 50)]
    pub epochs: usize,

    #[arg(long, default_value_t = 3)]
    pub patience: usize,
}

#[derive(Args)]
pub struct RunTaskArgs {
    #[command(flatten)]
    pub build: BuildTaskArgs,

    #[arg(long, value_delimiter = ',')]
    pub models: Vec<String>,

    #[arg(long)]
    pub workers: Option<usize>,

    /// Training seed; defaults to --seed.
    #[arg(long)]
    pub train_seed: Option<u64>,

    #[arg(long, default_value_t = 50)]
    pub epochs: usize,

    #[arg(long, default_value_t = 3)]
    pub patience: usize,
}

#[derive(Args)]
pub struct PairwiseArgs {
    /// Decoding axis to sweep: k (truncation size) or p (nucleus mass).
    #[arg(long)]
    pub axis: AxisArg,

    /// Axis values, comma-separated, at least three.
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<f64>,

    #[command(flatten)]
    pub corpus: CorpusArgs,

    #[arg(long, default_value = "mcd-out")]
    pub out: PathBuf,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = 200)]
    pub n_per_class: usize,

    #[arg(long, conflicts_with = "keep_prompt")]
    pub strip_prompt: bool,

    #[arg(long)]
    pub keep_prompt: bool,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    K,
    P,
}

#[derive(Args)]
pub struct ReportArgs {
    /// Run directories containing a report.json each.
    #[arg(required = true)]
    pub runs: Vec<PathBuf>,

    /// Also write the merged table and structured report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
