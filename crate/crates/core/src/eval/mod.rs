//! Autoregressive rollout, ADE/FDE, the leave-one-out harness and result
//! export.

mod export;
mod loo;
mod metrics;
mod rollout;

pub use export::{metrics_csv, results_json, svg_scene, trajectories_csv, write_results, ExportFormat};
pub use loo::{fingerprint, leave_one_out, LooFold, LooReport, Split};
pub use metrics::{ade, average_row, evaluate, fde, Evaluation, MetricsRow};
pub use rollout::{rollout, rollout_normalized, Trajectories};

use crate::data::DataError;
use crate::model::ModelError;
use crate::training::TrainError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("misaligned trajectories: {0}")]
    Misaligned(String),
    #[error("nothing to evaluate in {0}")]
    Empty(String),
    #[error("scene needs {needed} observed steps, has {found}")]
    ShortScene { needed: usize, found: usize },
    #[error("pedestrian {ped} is missing observed step {step}")]
    MissingObserved { ped: usize, step: usize },
    #[error("held-out split {split} leaked into training")]
    Leak { split: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Data(#[from] DataError),
}

impl From<crate::autodiff::AutodiffError> for EvalError {
    fn from(e: crate::autodiff::AutodiffError) -> Self {
        Self::Model(e.into())
    }
}

impl From<crate::stgraph::StGraphError> for EvalError {
    fn from(e: crate::stgraph::StGraphError) -> Self {
        Self::Model(e.into())
    }
}
