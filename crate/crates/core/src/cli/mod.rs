mod args;
mod config;
mod manifest;

use std::fs;
use std::path::{Path, PathBuf};

use clap::parser::ValueSource;
use clap::{CommandFactory, FromArgMatches};

use args::{Cli, Command, EvalArgs, InitZeroArgs, ModelFlags, PredictArgs, SynthArgs, TrainArgs, TrainFlags, VerifyArgs};
use manifest::RunManifest;
use mesrnn::data::{
    generate_all, load_scenes, load_table, observation_windows, parse_synth_list, save_table, trajectory_files,
    DataError, Record, TrajectoryTable, WindowMode,
};
use mesrnn::eval::{average_row, evaluate, leave_one_out, rollout, write_results, EvalError, ExportFormat, Split};
use mesrnn::model::{load_checkpoint, save_checkpoint, Checkpoint, CheckpointMeta, ModelDims, ModelError, ModelParams};
use mesrnn::stgraph::Scene;
use mesrnn::training::{train_with, NormStats, TrainConfig, TrainError};

/// Failure with its exit code: 1 verify, 2 usage, 3 data/model, 4 numeric.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn data(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        let code = match e {
            TrainError::NonFinite { .. } => 4,
            TrainError::Config(_) => 2,
            _ => 3,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Train(t) => t.into(),
            e => Self::data(e.to_string()),
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        match e {
            DataError::Config(m) => Self::usage(m),
            e => Self::data(e.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        Self::data(e.to_string())
    }
}

pub fn main() -> i32 {
    let argv = match config::expand(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => return report(e),
    };
    let parsed = Cli::command()
        .try_get_matches_from(argv)
        .and_then(|m| Cli::from_arg_matches(&m).map(|c| (c, m)));
    let (cli, matches) = match parsed {
        Ok(p) => p,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let model_given = matches
        .subcommand()
        .is_some_and(|(_, m)| {
            m.ids().any(|id| id == "model") && m.value_source("model") == Some(ValueSource::CommandLine)
        });
    match run(cli.command, model_given) {
        Ok(code) => code,
        Err(e) => report(e),
    }
}

fn report(e: CliError) -> i32 {
    eprintln!("error: {}", e.message);
    e.code
}

fn run(command: Command, model_given: bool) -> Result<i32, CliError> {
    match command {
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a, model_given),
        Command::Predict(a) => cmd_predict(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Synth(a) => cmd_synth(a),
        Command::InitZero(a) => cmd_init_zero(a),
    }
}

fn set_workers(workers: usize) -> Result<(), CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| CliError::usage(format!("worker pool: {e}")))
}

fn train_config(model: &ModelFlags, t: &TrainFlags) -> Result<TrainConfig, CliError> {
    let config = TrainConfig {
        epochs: t.epochs,
        lr: t.lr,
        clip: t.clip,
        obs: t.obs,
        pred: t.pred,
        window: t.loss_window,
        dropout: t.dropout,
        seed: t.seed,
        val_fraction: t.val_fraction,
        dims: dims(model),
    };
    config.validate()?;
    if t.stride == 0 {
        return Err(CliError::usage("stride must be at least 1"));
    }
    Ok(config)
}

fn dims(m: &ModelFlags) -> ModelDims {
    ModelDims {
        edge_embed: m.edge_embed,
        edge_hidden: m.edge_hidden,
        node_embed: m.node_embed,
        node_hidden: m.node_hidden,
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::data(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn cmd_train(a: TrainArgs) -> Result<i32, CliError> {
    set_workers(a.common.workers)?;
    let config = train_config(&a.model, &a.train)?;
    let mut inputs = Vec::new();
    let scenes = match (&a.data, &a.synth) {
        (Some(dir), _) => {
            inputs.extend(trajectory_files(dir)?);
            load_scenes(dir, config.obs, config.pred, a.train.stride, WindowMode::Training)?
        }
        (None, Some(spec)) => generate_all(&parse_synth_list(spec)?)?,
        (None, None) => return Err(CliError::usage("one of --data or --synth is required")),
    };
    let outcome = train_with(&config, &scenes, a.model.model, |r| match r.val_loss {
        Some(v) => eprintln!("epoch {:>3}  train {:.6e}  val {:.6e}", r.epoch, r.train_loss, v),
        None => eprintln!("epoch {:>3}  train {:.6e}", r.epoch, r.train_loss),
    })?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::data(format!("{}: {e}", dir.display())))?;
    }
    save_checkpoint(&outcome.checkpoint, &a.out)?;
    write_file(&sibling(&a.out, ".history.csv"), &outcome.history.to_csv())?;
    let manifest = RunManifest::new("train", &a, &inputs, Some(config.seed))?;
    write_file(&sibling(&a.out, ".manifest.json"), &manifest.to_json())?;
    eprintln!(
        "trained {} on {} scenes ({} validation), best epoch {}",
        a.model.model,
        outcome.train_indices.len(),
        outcome.val_indices.len(),
        outcome.best_epoch
    );
    Ok(0)
}

/// A named source of scenes for `eval`.
struct Source {
    name: String,
    path: Option<PathBuf>,
    synth: Option<String>,
}

fn sources(a: &EvalArgs) -> Result<Vec<Source>, CliError> {
    let mut out = Vec::new();
    for d in &a.data {
        let (name, path) = match d.split_once('=') {
            Some((n, p)) => (n.to_string(), PathBuf::from(p)),
            None => {
                let p = PathBuf::from(d);
                let name = p
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| d.clone());
                (name, p)
            }
        };
        out.push(Source {
            name,
            path: Some(path),
            synth: None,
        });
    }
    for s in &a.synth {
        let (name, spec) = match s.split_once('=').filter(|(n, _)| !n.contains(':')) {
            Some((n, spec)) => (n.to_string(), spec.to_string()),
            None => (s.split(':').next().unwrap_or(s).to_string(), s.clone()),
        };
        out.push(Source {
            name,
            path: None,
            synth: Some(spec),
        });
    }
    if out.is_empty() {
        return Err(CliError::usage("eval needs at least one --data or --synth"));
    }
    let mut names: Vec<&str> = out.iter().map(|s| s.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(CliError::usage(format!("split name {:?} given twice; use NAME=PATH", w[0])));
    }
    Ok(out)
}

fn load_source(
    src: &Source,
    obs: usize,
    pred: usize,
    stride: usize,
    mode: WindowMode,
    inputs: &mut Vec<PathBuf>,
) -> Result<Vec<Scene>, CliError> {
    if let Some(path) = &src.path {
        inputs.extend(trajectory_files(path)?);
        return Ok(load_scenes(path, obs, pred, stride, mode)?);
    }
    let spec = src.synth.as_deref().expect("source has a path or a spec");
    Ok(generate_all(&parse_synth_list(spec)?)?)
}

/// `model_given`: `--model` was passed explicitly, so a checkpoint of another
/// variant is an error.
fn cmd_eval(a: EvalArgs, model_given: bool) -> Result<i32, CliError> {
    set_workers(a.common.workers)?;
    let srcs = sources(&a)?;
    let mut inputs = Vec::new();
    let (rows, seed) = if a.loo {
        let config = train_config(&a.model, &a.train)?;
        let mut splits = Vec::with_capacity(srcs.len());
        for src in &srcs {
            let (obs, pred, stride) = (config.obs, config.pred, a.train.stride);
            let train = load_source(src, obs, pred, stride, WindowMode::Training, &mut inputs)?;
            let test = load_source(src, obs, pred, stride, WindowMode::Inference, &mut Vec::new())?;
            splits.push(Split {
                name: src.name.clone(),
                train,
                test,
            });
        }
        let report = leave_one_out(&splits, &config, a.model.model, |f| {
            eprintln!(
                "held out {}: ADE {:.4} FDE {:.4} (best epoch {})",
                f.held_out, f.row.ade_world, f.row.fde_world, f.best_epoch
            )
        })?;
        (report.rows(), Some(config.seed))
    } else {
        let path = a.checkpoint.as_ref().ok_or_else(|| CliError::usage("--checkpoint is required without --loo"))?;
        inputs.push(path.clone());
        let mut ckpt = load_checkpoint(path)?;
        if model_given {
            ckpt = ckpt.expect_variant(a.model.model)?;
        }
        let (obs, pred) = (ckpt.meta.obs, ckpt.meta.pred);
        let mut rows = Vec::new();
        for src in &srcs {
            let scenes = load_source(src, obs, pred, a.train.stride, WindowMode::Inference, &mut inputs)?;
            let evaluation = evaluate(&ckpt, &scenes, &src.name)?;
            rows.push(evaluation.row);
        }
        if rows.len() > 1 {
            rows.push(average_row(&rows).expect("rows present"));
        }
        (rows, Some(ckpt.meta.seed))
    };
    for r in &rows {
        println!(
            "{:<12} {:<7} ADE {:.4} FDE {:.4} ({} peds)",
            r.split, r.variant, r.ade_world, r.fde_world, r.n_peds
        );
    }
    write_results(&a.out, ExportFormat::Csv, &rows, &[])?;
    write_results(&a.out, ExportFormat::Json, &rows, &[])?;
    // trajectories.csv is written by the CSV export but holds nothing here
    let _ = fs::remove_file(a.out.join("trajectories.csv"));
    let manifest = RunManifest::new("eval", &a, &inputs, seed)?;
    write_file(&a.out.join("manifest.json"), &manifest.to_json())?;
    Ok(0)
}

fn cmd_predict(a: PredictArgs) -> Result<i32, CliError> {
    set_workers(a.common.workers)?;
    let ckpt = load_checkpoint(&a.checkpoint)?;
    let obs = a.obs.unwrap_or(ckpt.meta.obs);
    let pred = a.pred.unwrap_or(ckpt.meta.pred);
    if obs < 2 || pred == 0 || a.stride == 0 {
        return Err(CliError::usage(format!("need obs >= 2, pred >= 1, stride >= 1 (got {obs}, {pred}, {})", a.stride)));
    }
    let table = load_table(&a.scene)?;
    let windows = observation_windows(&table, obs, pred, a.stride).map_err(|e| match e {
        DataError::Config(m) => CliError::data(format!("{}: {m}", a.scene.display())),
        e => e.into(),
    })?;
    if windows.is_empty() {
        return Err(CliError::data(format!("{}: no pedestrian observed over {obs} steps", a.scene.display())));
    }
    let ckpt = Checkpoint {
        meta: CheckpointMeta { obs, pred, ..ckpt.meta },
        ..ckpt
    };
    let name = a.scene.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let (rows, scenes) = match evaluate(&ckpt, &windows, &name) {
        Ok(e) => (vec![e.row], e.scenes),
        Err(EvalError::Empty(_)) => {
            let scenes = windows
                .iter()
                .enumerate()
                .map(|(k, s)| rollout(&ckpt.params, &ckpt.norm, s, k, obs, pred))
                .collect::<Result<Vec<_>, _>>()?;
            (Vec::new(), scenes)
        }
        Err(e) => return Err(e.into()),
    };
    let written = write_results(&a.out, a.format, &rows, &scenes)?;
    let manifest = RunManifest::new("predict", &a, &[a.checkpoint.clone(), a.scene.clone()], Some(ckpt.meta.seed))?;
    write_file(&a.out.join("manifest.json"), &manifest.to_json())?;
    for p in written {
        println!("{}", p.display());
    }
    Ok(0)
}

fn cmd_verify(a: VerifyArgs) -> Result<i32, CliError> {
    set_workers(a.common.workers)?;
    if !(a.tol > 0.0) {
        return Err(CliError::usage(format!("tolerance {} must be positive", a.tol)));
    }
    let report = mesrnn::verify::verify(a.tol, a.seed);
    print!("{}", report.table());
    let failed = report.rows.iter().filter(|r| !r.passed).count();
    if failed == 0 {
        println!("all {} checks passed", report.rows.len());
        Ok(0)
    } else {
        println!("{failed} of {} checks failed", report.rows.len());
        Ok(1)
    }
}

fn cmd_synth(a: SynthArgs) -> Result<i32, CliError> {
    let scenes = generate_all(&parse_synth_list(&a.spec)?)?;
    fs::create_dir_all(&a.out).map_err(|e| CliError::data(format!("{}: {e}", a.out.display())))?;
    for (k, scene) in scenes.iter().enumerate() {
        save_table(&scene_table(scene)?, &a.out.join(format!("scene_{k:04}.txt")))?;
    }
    let manifest = RunManifest::new("synth", &a, &[], None)?;
    write_file(&a.out.join("manifest.json"), &manifest.to_json())?;
    println!("wrote {} scenes to {}", scenes.len(), a.out.display());
    Ok(0)
}

/// Frame ticks advance by 10 per step, as in the public pedestrian datasets.
fn scene_table(scene: &Scene) -> Result<TrajectoryTable, DataError> {
    let mut records = Vec::new();
    for t in 0..scene.len() {
        for (p, &ped) in scene.ped_ids().iter().enumerate() {
            if let Some(pos) = scene.position(p, t) {
                records.push(Record {
                    frame: 10 * t as i64,
                    ped,
                    pos,
                });
            }
        }
    }
    TrajectoryTable::new(records, scene.frame_interval())
}

fn cmd_init_zero(a: InitZeroArgs) -> Result<i32, CliError> {
    let norm = NormStats::new(a.norm_min, a.norm_max).map_err(|e| CliError::usage(e.to_string()))?;
    let ckpt = Checkpoint {
        params: ModelParams::zeros(a.model.model, dims(&a.model)),
        norm,
        meta: CheckpointMeta {
            dropout: 0.0,
            seed: 0,
            frame_interval: mesrnn::stgraph::DEFAULT_FRAME_INTERVAL,
            obs: a.obs,
            pred: a.pred,
        },
    };
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::data(format!("{}: {e}", dir.display())))?;
    }
    save_checkpoint(&ckpt, &a.out)?;
    let manifest = RunManifest::new("init-zero", &a, &[], None)?;
    write_file(&sibling(&a.out, ".manifest.json"), &manifest.to_json())?;
    Ok(0)
}
