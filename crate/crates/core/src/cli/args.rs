use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use mesrnn::eval::ExportFormat;
use mesrnn::model::Variant;
use mesrnn::training::LossWindow;

#[derive(Parser, Debug)]
#[command(name = "mesrnn", version, about = "Meta-path enhanced structural RNN trajectory prediction")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train a model and write checkpoint, history and manifest.
    Train(TrainArgs),
    /// Score a checkpoint, or run the leave-one-out protocol with --loo.
    Eval(EvalArgs),
    /// Roll a checkpoint out over a scene file and export the trajectories.
    Predict(PredictArgs),
    /// Run the gradient and meta-path oracle self-checks.
    Verify(VerifyArgs),
    /// Write synthetic scenes as trajectory files, one per scene.
    Synth(SynthArgs),
    /// Write an all-zero checkpoint (predicts no motion), for debugging.
    InitZero(InitZeroArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// Read further flags from FILE, one `key=value` per line; flags on the
    /// command line win.
    #[arg(long, value_name = "FILE")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Worker threads for evaluation (0 picks one per core).
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ModelFlags {
    #[arg(long = "model", value_name = "VARIANT", default_value = "mesrnn", value_parser = parse_variant)]
    pub model: Variant,
    #[arg(long, default_value_t = 64)]
    pub edge_embed: usize,
    #[arg(long, default_value_t = 128)]
    pub edge_hidden: usize,
    #[arg(long, default_value_t = 128)]
    pub node_embed: usize,
    #[arg(long, default_value_t = 256)]
    pub node_hidden: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TrainFlags {
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.001)]
    pub lr: f64,
    /// Global gradient norm limit.
    #[arg(long, default_value_t = 10.0)]
    pub clip: f64,
    /// Observed steps.
    #[arg(long, default_value_t = 8)]
    pub obs: usize,
    /// Predicted steps.
    #[arg(long, default_value_t = 12)]
    pub pred: usize,
    #[arg(long, default_value_t = 0.2)]
    pub dropout: f64,
    /// Steps the loss covers: `pred` (prediction window) or `full`.
    #[arg(long, default_value = "pred", value_parser = parse_window)]
    pub loss_window: LossWindow,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Share of scenes held back for validation.
    #[arg(long, default_value_t = 0.2)]
    pub val_fraction: f64,
    /// Frames between consecutive windows of a trajectory file.
    #[arg(long, default_value_t = mesrnn::data::DEFAULT_STRIDE)]
    pub stride: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TrainArgs {
    /// Trajectory file or directory of `.txt` files.
    #[arg(long, value_name = "DIR", conflicts_with = "synth", required_unless_present = "synth")]
    pub data: Option<PathBuf>,
    /// Synthetic corpus, `name:key=val,...`; join several with `+`.
    #[arg(long, value_name = "SPEC")]
    pub synth: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelFlags,
    #[command(flatten)]
    #[serde(flatten)]
    pub train: TrainFlags,
    /// Checkpoint path; history and manifest are written next to it.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct EvalArgs {
    /// Checkpoint to score (not used with --loo).
    #[arg(long, value_name = "PATH", required_unless_present = "loo")]
    pub checkpoint: Option<PathBuf>,
    /// Dataset split: a file or directory, optionally `NAME=PATH`. Repeatable.
    #[arg(long = "data", value_name = "DIR")]
    pub data: Vec<String>,
    /// Synthetic split, `name:key=val,...`. Repeatable.
    #[arg(long = "synth", value_name = "SPEC")]
    pub synth: Vec<String>,
    /// Train on all splits but one and test on the one left out, in turn.
    #[arg(long)]
    pub loo: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelFlags,
    #[command(flatten)]
    #[serde(flatten)]
    pub train: TrainFlags,
    /// Output directory for metrics.csv and results.json.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PredictArgs {
    #[arg(long, value_name = "PATH")]
    pub checkpoint: PathBuf,
    /// Trajectory file holding at least the observed steps.
    #[arg(long, value_name = "FILE")]
    pub scene: PathBuf,
    /// Observed steps (default: the checkpoint's).
    #[arg(long)]
    pub obs: Option<usize>,
    /// Predicted steps (default: the checkpoint's).
    #[arg(long)]
    pub pred: Option<usize>,
    /// Frames between consecutive windows.
    #[arg(long, default_value_t = mesrnn::data::DEFAULT_STRIDE)]
    pub stride: usize,
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    #[serde(serialize_with = "ser_format")]
    pub format: ExportFormat,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct VerifyArgs {
    /// Relative error tolerance for the gradient checks.
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    /// Seed for parameters, inputs and oracle scenes.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SynthArgs {
    /// `name:key=val,...` with names crossing, overtaking, parallel_group,
    /// stationary_mix and keys n, scenes, speed_min, speed_max, noise,
    /// repulsion, seed, len; join several with `+`.
    #[arg(long, value_name = "SPEC")]
    pub spec: String,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct InitZeroArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelFlags,
    /// Normalization minimum, `x,y`.
    #[arg(long, default_value = "-10,-10", value_parser = parse_point)]
    pub norm_min: [f64; 2],
    /// Normalization maximum, `x,y`.
    #[arg(long, default_value = "10,10", value_parser = parse_point)]
    pub norm_max: [f64; 2],
    #[arg(long, default_value_t = 8)]
    pub obs: usize,
    #[arg(long, default_value_t = 12)]
    pub pred: usize,
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: mesrnn::model::ModelError| e.to_string())
}

fn parse_window(s: &str) -> Result<LossWindow, String> {
    s.parse().map_err(|e: mesrnn::training::TrainError| e.to_string())
}

fn parse_format(s: &str) -> Result<ExportFormat, String> {
    s.parse()
}

fn ser_format<S: serde::Serializer>(f: &ExportFormat, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(match f {
        ExportFormat::Csv => "csv",
        ExportFormat::Json => "json",
        ExportFormat::Svg => "svg",
    })
}

fn parse_point(s: &str) -> Result<[f64; 2], String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected x,y, got {s:?}"))?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("bad number {v:?}"));
    Ok([num(x)?, num(y)?])
}
