use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "abseg",
    version,
    about = "Unsupervised premise/conclusion segmentation of scientific abstracts"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Every subcommand with its resolved arguments; this is what manifests
/// store and `rerun` replays.
#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Segment a corpus with GreedyCAS
    Segment(SegmentArgs),
    /// Segment a corpus with an unsupervised baseline
    Baseline(BaselineArgs),
    /// Score an assignment file against gold conclusions
    Eval(EvalArgs),
    /// Paired Wilcoxon signed-rank test between two assignment files
    Compare(CompareArgs),
    /// NMI as one abstract's boundary moves word by word
    Sweep(SweepArgs),
    /// Word pairs contributing most to the mutual information
    Pairs(PairsArgs),
    /// Correlate NMI with the metrics across GreedyCAS-NN batch sizes
    Correlate(CorrelateArgs),
    /// Corpus statistics
    Stats(StatsArgs),
    /// Write a synthetic corpus with planted premise/conclusion coupling
    Synth(SynthArgs),
    /// Re-execute the command recorded in a manifest
    #[serde(skip)]
    Rerun(RerunArgs),
}

pub fn existing_file(s: &str) -> Result<PathBuf, String> {
    let p = PathBuf::from(s);
    if p.is_file() {
        Ok(p)
    } else {
        Err(format!("no such file: {s}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    Base,
    Nn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    Tfidf,
    Embeddings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineKind {
    RandomBase,
    RandomPlus,
    Texttiling,
    EmbedSim,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Split {
    Linear,
    Cycled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricArg {
    Pk,
    Wd,
    Jaccard,
    Rouge,
}

/// Search settings shared by `segment` and `correlate`.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SearchArgs {
    /// Epochs per abstract
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    /// Chunk size for GreedyCAS-NN [default: min(48, corpus size)]
    #[arg(long)]
    pub chunk_size: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Similarity used to form nearest-neighbor batches
    #[arg(long, value_enum, default_value_t = Backend::Tfidf)]
    pub backend: Backend,
    /// Abstract-level vectors, required by `--backend embeddings`
    #[arg(long, value_parser = existing_file, required_if_eq("backend", "embeddings"))]
    pub embeddings_file: Option<PathBuf>,
    /// Divide the joint distribution by its total mass; `false` uses the
    /// unnormalized joint, whose MI is never positive
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub renormalize_joint: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SegmentArgs {
    /// Corpus JSONL
    #[arg(long, value_parser = existing_file)]
    pub input: PathBuf,
    /// Assignment JSONL to write
    #[arg(long)]
    pub output: PathBuf,
    /// Manifest path [default: <output>.manifest.json]
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Algo::Nn)]
    pub algo: Algo,
    /// Batch size [default: 12 for nn, whole corpus for base]
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BaselineArgs {
    #[arg(long, value_parser = existing_file)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub baseline: BaselineKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sentence-level vectors, required by `embed-sim`
    #[arg(long, value_parser = existing_file, required_if_eq("baseline", "embed-sim"))]
    pub embeddings_file: Option<PathBuf>,
    /// Split family for `embed-sim`
    #[arg(long, value_enum, default_value_t = Split::Linear)]
    pub split_mode: Split,
    /// TextTiling block size in sentences
    #[arg(long, default_value_t = 2)]
    pub block_size: usize,
    /// TextTiling smoothing half width
    #[arg(long, default_value_t = 1)]
    pub smoothing_width: usize,
    /// TextTiling depth cutoff multiplier
    #[arg(long, default_value_t = 0.5)]
    pub depth_cutoff: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EvalArgs {
    /// Corpus JSONL with gold conclusions
    #[arg(long, value_parser = existing_file)]
    pub input: PathBuf,
    /// Assignment JSONL to score
    #[arg(long, value_parser = existing_file)]
    pub assignment: PathBuf,
    /// Report JSON [default: stdout]
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Fixed Pk/WindowDiff window [default: per abstract, half the mean gold segment length]
    #[arg(long)]
    pub window_k: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CompareArgs {
    #[arg(long, value_parser = existing_file)]
    pub input: PathBuf,
    /// First assignment file
    #[arg(long, value_parser = existing_file)]
    pub a: PathBuf,
    /// Second assignment file
    #[arg(long, value_parser = existing_file)]
    pub b: PathBuf,
    #[arg(long, value_enum, default_value_t = MetricArg::Pk)]
    pub metric: MetricArg,
    #[arg(long)]
    pub window_k: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    /// Corpus JSONL; every abstract but the target needs gold conclusions
    #[arg(long, value_parser = existing_file)]
    pub input: PathBuf,
    /// Id of the abstract whose boundary is swept
    #[arg(long)]
    pub target: String,
    /// Gaussian smoothing width
    #[arg(long, default_value_t = 3.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub renormalize_joint: bool,
    /// CSV [default: stdout]
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PairsArgs {
    #[arg(long, value_parser = existing_file)]
    pub input: PathBuf,
    /// Assignment JSONL [default: the gold conclusions]
    #[arg(long, value_parser = existing_file)]
    pub assignment: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub top: usize,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub renormalize_joint: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CorrelateArgs {
    #[arg(long, value_parser = existing_file)]
    pub input: PathBuf,
    /// Per-batch-size CSV (batch_size, nmi, pk, wd, jaccard, rouge)
    #[arg(long)]
    pub output: PathBuf,
    /// Correlation summary JSON [default: stdout]
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub min_batch: usize,
    #[arg(long, default_value_t = 12)]
    pub max_batch: usize,
    #[arg(long)]
    pub window_k: Option<usize>,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct StatsArgs {
    #[arg(long, value_parser = existing_file)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SynthArgs {
    /// Corpus JSONL to write
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub num_abstracts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 6)]
    pub min_sentences: usize,
    #[arg(long, default_value_t = 12)]
    pub max_sentences: usize,
    /// Share of tokens drawn from the background pool
    #[arg(long, default_value_t = 0.3)]
    pub noise: f64,
    #[arg(long, default_value_t = 8)]
    pub topics: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RerunArgs {
    #[arg(long, value_parser = existing_file)]
    pub manifest: PathBuf,
}
