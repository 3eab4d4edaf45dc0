use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "echogeo", version, about = "Bat-sonar echo simulation and glint-geometry analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Simulate a broadcast and its multi-glint echo.
    Simulate(SimulateArgs),
    /// Turn a simulated record into a dechirped cochleagram.
    Cochleagram(CochleagramArgs),
    /// Generate a classify, gs, or eval corpus.
    GenDataset(GenDatasetArgs),
    /// Train a glint-count (cnn, rnn) or glint-spacing (gs) network.
    Train(TrainArgs),
    /// Predict the glint count of one sample.
    Classify(ClassifyArgs),
    /// Estimate per-pair glint spacings and offsets of one sample.
    Reconstruct(ReconstructArgs),
    /// Score trained classifiers on a held-out corpus.
    Eval(EvalArgs),
    /// Re-run the invocation recorded in a config file.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Classify,
    Gs,
    Eval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arch {
    Cnn,
    Rnn,
    Gs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// Glint offsets along the target axis, first at 0, e.g. "0,11.1,48.1mm".
    #[arg(long)]
    pub glints: String,
    /// Broadcast duration, e.g. "3ms".
    #[arg(long, default_value = "3ms")]
    pub duration: String,
    /// Echo-to-noise ratio in dB.
    #[arg(long, default_value_t = 20.0)]
    pub snr: f64,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    pub noise: Switch,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output record (.f32); a JSON sidecar is written beside it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CochleagramArgs {
    /// Record written by `simulate`.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Keep only bins START:LEN, e.g. "50:100".
    #[arg(long)]
    pub crop: Option<String>,
    /// Also write per-channel crossing times as CSV.
    #[arg(long)]
    pub crossings_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GenDatasetArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 20.0)]
    pub snr: f64,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    pub noise: Switch,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct Hyper {
    #[arg(long, default_value_t = 60)]
    pub epochs: usize,
    #[arg(long, default_value_t = 32)]
    pub batch: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sequence length of the rnn input; each step carries 250/T columns.
    #[arg(long, default_value_t = 250)]
    pub timesteps: usize,
    /// Convolution filters per cnn block, e.g. "4,8,16,32".
    #[arg(long, default_value = "4,8,16,32")]
    pub filters: String,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub arch: Arch,
    /// Corpus directory (classify for cnn/rnn, gs for gs).
    #[arg(long)]
    pub data: PathBuf,
    /// Optional held-out corpus scored after training.
    #[arg(long)]
    pub eval: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub hyper: Hyper,
    /// Checkpoint path; history and metrics are written beside it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Cochleagram or simulated record.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// JSON result; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReconstructArgs {
    /// Cochleagram (250 or 100 bins) or simulated record.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Glint-spacing checkpoint.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-window estimate curve as CSV.
    #[arg(long)]
    pub trace_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EvalArgs {
    /// Held-out corpus.
    #[arg(long)]
    pub data: PathBuf,
    /// Score one trained checkpoint.
    #[arg(long, conflicts_with_all = ["arch", "train"])]
    pub model: Option<PathBuf>,
    /// Train `--repeat` fresh networks of this architecture instead.
    #[arg(long, value_enum, requires = "train")]
    pub arch: Option<Arch>,
    /// Training corpus for `--arch`.
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Number of seeds (seed, seed+1, ...).
    #[arg(long, default_value_t = 1)]
    pub repeat: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub hyper: Hyper,
    /// Output directory for metrics.json, confusion.csv, and loss curves.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub config: PathBuf,
}
