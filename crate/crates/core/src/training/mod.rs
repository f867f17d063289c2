//! Normalization, windowed loss, ADAM with global-norm clipping and the
//! per-scene training loop.

mod loss;
mod norm;
mod optim;
mod train;

pub use loss::{mse_loss, scene_loss, LossWindow};
pub use norm::NormStats;
pub use optim::{clip_global_norm, Adam, AdamConfig};
pub use train::{split_indices, train, train_with, EpochRecord, History, TrainConfig, TrainOutcome};

use crate::autodiff::AutodiffError;
use crate::model::ModelError;
use crate::stgraph::StGraphError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrainError {
    #[error("degenerate normalization: axis {axis} has zero extent")]
    DegenerateNormalization { axis: usize },
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("empty loss window")]
    EmptyWindow,
    #[error("non-finite loss at epoch {epoch}")]
    NonFinite { epoch: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("optimizer state does not match parameter {name}")]
    OptimizerShape { name: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl From<AutodiffError> for TrainError {
    fn from(e: AutodiffError) -> Self {
        Self::Model(e.into())
    }
}

impl From<StGraphError> for TrainError {
    fn from(e: StGraphError) -> Self {
        Self::Model(e.into())
    }
}
