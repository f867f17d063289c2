use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{clip_global_norm, mse_loss, scene_loss, Adam, AdamConfig, LossWindow, NormStats, TrainError};
use crate::autodiff::Tape;
use crate::model::{fmt_f64, teacher_forced, Checkpoint, CheckpointMeta, Dropout, ModelDims, ModelParams, Variant};
use crate::stgraph::Scene;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub clip: f64,
    pub obs: usize,
    pub pred: usize,
    pub window: LossWindow,
    pub dropout: f64,
    pub seed: u64,
    pub val_fraction: f64,
    pub dims: ModelDims,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            lr: 1e-3,
            clip: 10.0,
            obs: 8,
            pred: 12,
            window: LossWindow::Pred,
            dropout: 0.2,
            seed: 0,
            val_fraction: 0.2,
            dims: ModelDims::default(),
        }
    }
}

impl TrainConfig {
    pub fn scene_len(&self) -> usize {
        self.obs + self.pred
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: String| Err(TrainError::Config(m));
        if self.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        if self.obs < 2 || self.pred == 0 {
            return bad(format!("need obs >= 2 and pred >= 1, got obs={} pred={}", self.obs, self.pred));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("learning rate {} must be positive", self.lr));
        }
        if !(self.clip > 0.0) {
            return bad(format!("clip norm {} must be positive", self.clip));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout {} outside [0, 1)", self.dropout));
        }
        if !(0.0..1.0).contains(&self.val_fraction) {
            return bad(format!("validation fraction {} outside [0, 1)", self.val_fraction));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct History {
    pub epochs: Vec<EpochRecord>,
}

impl History {
    /// `epoch,train_loss,val_loss`; the validation column is empty when no
    /// validation scenes exist.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,val_loss\n");
        for r in &self.epochs {
            let val = r.val_loss.map(fmt_f64).unwrap_or_default();
            out.push_str(&format!("{},{},{}\n", r.epoch, fmt_f64(r.train_loss), val));
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub checkpoint: Checkpoint,
    pub history: History,
    /// Indices into the caller's scene list.
    pub train_indices: Vec<usize>,
    pub val_indices: Vec<usize>,
    pub best_epoch: usize,
    pub updates: usize,
}

/// Seeded train/validation split: `round(n * fraction)` validation scenes,
/// never all of them. Both lists come back sorted.
pub fn split_indices(n: usize, fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x5e1f)));
    let n_val = ((n as f64 * fraction).round() as usize).min(n.saturating_sub(1));
    let mut val = order[..n_val].to_vec();
    let mut train = order[n_val..].to_vec();
    val.sort_unstable();
    train.sort_unstable();
    (train, val)
}

pub fn train(config: &TrainConfig, scenes: &[Scene], variant: Variant) -> Result<TrainOutcome, TrainError> {
    train_with(config, scenes, variant, |_| {})
}

/// Train from a fresh initialization. Scenes must be `obs + pred` steps long;
/// pedestrians not present throughout are dropped, as are scenes left empty.
pub fn train_with(
    config: &TrainConfig,
    scenes: &[Scene],
    variant: Variant,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainOutcome, TrainError> {
    config.validate()?;
    let len = config.scene_len();
    let mut usable = Vec::with_capacity(scenes.len());
    for (k, s) in scenes.iter().enumerate() {
        if s.len() != len {
            return Err(TrainError::Config(format!(
                "scene {k} has {} steps, training needs obs + pred = {len}",
                s.len()
            )));
        }
        let keep: Vec<usize> = (0..s.num_peds()).filter(|&p| s.fully_present(p)).collect();
        if !keep.is_empty() {
            usable.push((k, s.select(&keep)?));
        }
    }
    if usable.is_empty() {
        return Err(TrainError::EmptyTrainingSet);
    }

    let (train_pos, val_pos) = split_indices(usable.len(), config.val_fraction, config.seed);
    let norm = NormStats::fit(train_pos.iter().map(|&i| &usable[i].1))?;
    let train_set: Vec<Scene> = train_pos.iter().map(|&i| norm.normalize_scene(&usable[i].1)).collect();
    let val_set: Vec<Scene> = val_pos.iter().map(|&i| norm.normalize_scene(&usable[i].1)).collect();

    let mut params = ModelParams::init(variant, config.dims, config.seed);
    let mut adam = Adam::new(
        params.store(),
        AdamConfig {
            lr: config.lr,
            ..AdamConfig::default()
        },
    );
    let mut dropout = Dropout::new(config.dropout, config.seed.wrapping_add(0xd20f));
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x5fu64));
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = History::default();
    let mut best: Option<(f64, usize, ModelParams)> = None;
    let mut updates = 0;

    for epoch in 1..=config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut total = 0.0;
        for &i in &order {
            let scene = &train_set[i];
            let mut tape = Tape::new(params.store());
            let preds = teacher_forced(&mut tape, &params, scene, &mut dropout)?;
            let loss = mse_loss(&mut tape, &preds, scene, config.window.steps(config.obs, len))?;
            let value = tape.value(loss).item();
            if !value.is_finite() {
                return Err(TrainError::NonFinite { epoch });
            }
            let mut grads = tape.backward(loss)?;
            drop(tape);
            clip_global_norm(&mut grads, config.clip);
            if !grads.is_finite() {
                return Err(TrainError::NonFinite { epoch });
            }
            adam.step(params.store_mut(), &grads)?;
            total += value;
            updates += 1;
        }
        let train_loss = total / train_set.len() as f64;
        let val_loss = if val_set.is_empty() {
            None
        } else {
            Some(validation_loss(&params, &val_set, config)?)
        };
        if !train_loss.is_finite() || val_loss.is_some_and(|v| !v.is_finite()) {
            return Err(TrainError::NonFinite { epoch });
        }
        let record = EpochRecord {
            epoch,
            train_loss,
            val_loss,
        };
        on_epoch(&record);
        history.epochs.push(record);
        let score = val_loss.unwrap_or(train_loss);
        if best.as_ref().is_none_or(|(s, _, _)| score < *s) {
            best = Some((score, epoch, params.clone()));
        }
    }

    let (_, best_epoch, best_params) = best.expect("at least one epoch ran");
    let checkpoint = Checkpoint {
        params: best_params,
        norm,
        meta: CheckpointMeta {
            dropout: config.dropout,
            seed: config.seed,
            frame_interval: usable[0].1.frame_interval(),
            obs: config.obs,
            pred: config.pred,
        },
    };
    let original = |pos: Vec<usize>| pos.into_iter().map(|i| usable[i].0).collect();
    Ok(TrainOutcome {
        checkpoint,
        history,
        train_indices: original(train_pos),
        val_indices: original(val_pos),
        best_epoch,
        updates,
    })
}

fn validation_loss(params: &ModelParams, scenes: &[Scene], config: &TrainConfig) -> Result<f64, TrainError> {
    let one = |s: &Scene| scene_loss(params, s, config.obs, config.window, &mut Dropout::disabled());
    #[cfg(feature = "parallel")]
    let losses: Vec<Result<f64, TrainError>> = {
        use rayon::prelude::*;
        scenes.par_iter().map(one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let losses: Vec<Result<f64, TrainError>> = scenes.iter().map(one).collect();
    let mut total = 0.0;
    for l in losses {
        total += l?;
    }
    Ok(total / scenes.len() as f64)
}
