use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::corpus::DEFAULT_SENTIMENT_CUTOFF;
use crate::models::TrainConfig;

#[derive(Debug, Parser)]
#[command(name = "citescope", version, about = "Citation function and provenance classifiers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Materialize a provenance dataset (annotations plus sampled negatives)
    /// and optionally mine annotation candidates from raw sentences.
    BuildDataset(BuildDatasetArgs),
    /// Fit one model on a whole corpus and save it.
    Train(RunArgs),
    /// Cross-validate one model.
    Evaluate(EvalArgs),
    /// Cross-validate two models on identical folds and test the difference.
    Compare(CompareArgs),
    /// Label new instances with a saved network.
    Predict(PredictArgs),
    /// Finite-difference check of a randomly initialized network.
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskArg {
    Function,
    Provenance,
    Mtl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelArg {
    Cnn,
    Dcnn,
    Mtl,
    NbBaseline,
    TreeBaseline,
}

impl ModelArg {
    /// The task a model solves on its own.
    pub fn native_task(self) -> TaskArg {
        match self {
            Self::Cnn | Self::NbBaseline => TaskArg::Function,
            Self::Dcnn | Self::TreeBaseline => TaskArg::Provenance,
            Self::Mtl => TaskArg::Mtl,
        }
    }

    pub fn is_neural(self) -> bool {
        matches!(self, Self::Cnn | Self::Dcnn | Self::Mtl)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DataArgs {
    /// Function corpus JSONL, or for --task provenance a provenance dataset
    /// JSONL.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Provenance dataset JSONL for joint training.
    #[arg(long)]
    pub provenance_corpus: Option<PathBuf>,
    /// Provenance annotations JSONL (used with --papers).
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    /// Directory of cited-paper texts, one sentence per line.
    #[arg(long)]
    pub papers: Option<PathBuf>,
    /// Word vectors, one `word v1 .. vd` line per word.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub embedding_dim: usize,
    #[arg(long, default_value_t = 3)]
    pub negatives_per_paper: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long, default_value_t = 30)]
    pub epochs: usize,
    #[arg(long, default_value_t = 256)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    #[arg(long, default_value_t = 256)]
    pub filters: usize,
    #[arg(long, default_value_t = 0.001)]
    pub lr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl TrainArgs {
    pub fn config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            window: self.window,
            filters: self.filters,
            lr: self.lr,
            seed,
            ..TrainConfig::default()
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub task: TaskArg,
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub train: TrainArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 5)]
    pub runs: usize,
    /// Keep each citing paper's function instances inside one fold.
    #[arg(long)]
    pub group_function_folds: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompareArgs {
    #[command(flatten)]
    pub eval: EvalArgs,
    /// The second model, scored on the task it solves.
    #[arg(long, value_enum)]
    pub against: ModelArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BuildDatasetArgs {
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    #[arg(long)]
    pub papers: Option<PathBuf>,
    /// Plain-text file of citing sentences, one per line, to screen for
    /// annotation candidates.
    #[arg(long)]
    pub sentences: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub negatives_per_paper: usize,
    #[arg(long, default_value_t = DEFAULT_SENTIMENT_CUTOFF)]
    pub sentiment_cutoff: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PredictArgs {
    /// Checkpoint directory (or its checkpoint.json).
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// JSONL with `id`, `citing_sentence` and, for provenance, `fragment`.
    #[arg(long)]
    pub input: PathBuf,
    /// Which head of a joint network to use.
    #[arg(long, value_enum)]
    pub task: Option<TaskArg>,
    /// Output JSONL; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GradcheckArgs {
    #[arg(long, value_enum, default_value = "cnn")]
    pub model: ModelArg,
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    #[arg(long, default_value_t = 8)]
    pub filters: usize,
    #[arg(long, default_value_t = 20)]
    pub width: usize,
    #[arg(long, default_value_t = 16)]
    pub dim: usize,
    #[arg(long, default_value_t = 3)]
    pub batch: usize,
    /// Probe up to this many random coordinates per tensor instead of all.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 1e-5)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
