use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::TrainError;
use crate::autodiff::{Tape, Tensor, Var};
use crate::model::{teacher_forced, Dropout, ModelParams};
use crate::stgraph::{Scene, StGraphError};

/// Which predicted steps the training loss counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossWindow {
    /// The prediction period only.
    #[default]
    Pred,
    /// Every step the model predicts, from the second onward.
    Full,
}

impl LossWindow {
    /// Target step indices (0-based) for a scene of `len` steps.
    pub fn steps(self, obs: usize, len: usize) -> Range<usize> {
        match self {
            Self::Pred => obs.max(1)..len,
            Self::Full => 1..len,
        }
    }
}

impl fmt::Display for LossWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Pred => "pred",
            Self::Full => "full",
        })
    }
}

impl FromStr for LossWindow {
    type Err = TrainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pred" => Ok(Self::Pred),
            "full" => Ok(Self::Full),
            _ => Err(TrainError::Config(format!("unknown loss window {s:?} (pred|full)"))),
        }
    }
}

/// Mean squared error over pedestrians, the steps in `steps` and both axes.
/// `preds[t]` is the `[N, 2]` prediction for step `t + 1`.
pub fn mse_loss(tape: &mut Tape<'_>, preds: &[Var], truth: &Scene, steps: Range<usize>) -> Result<Var, TrainError> {
    if steps.is_empty() || steps.start == 0 || steps.end > preds.len() + 1 || steps.end > truth.len() {
        return Err(TrainError::EmptyWindow);
    }
    let n = truth.num_peds();
    let width = 2 * steps.len();
    let mut target = vec![0.0; n * width];
    for ped in 0..n {
        for (k, step) in steps.clone().enumerate() {
            let p = truth.position(ped, step).ok_or(StGraphError::Absent { ped, step })?;
            target[ped * width + 2 * k..ped * width + 2 * k + 2].copy_from_slice(&p);
        }
    }
    let parts: Vec<Var> = steps.map(|s| preds[s - 1]).collect();
    let pred = tape.concat(&parts)?;
    let target = tape.constant(Tensor::new(vec![n, width], target)?);
    Ok(tape.mse(pred, target)?)
}

/// Teacher-forced windowed loss of one (normalized, fully present) scene.
pub fn scene_loss(
    params: &ModelParams,
    scene: &Scene,
    obs: usize,
    window: LossWindow,
    dropout: &mut Dropout,
) -> Result<f64, TrainError> {
    let mut tape = Tape::new(params.store());
    let preds = teacher_forced(&mut tape, params, scene, dropout)?;
    let loss = mse_loss(&mut tape, &preds, scene, window.steps(obs, scene.len()))?;
    Ok(tape.value(loss).item())
}
