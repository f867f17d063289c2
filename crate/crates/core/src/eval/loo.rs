use std::collections::HashSet;
use std::hash::{DefaultHasher, Hash, Hasher};

use super::{average_row, evaluate, EvalError, MetricsRow};
use crate::model::Variant;
use crate::stgraph::Scene;
use crate::training::{train, NormStats, TrainConfig};

/// One named dataset subset: full-presence windows for training and
/// observed-presence windows for testing.
#[derive(Clone, Debug)]
pub struct Split {
    pub name: String,
    pub train: Vec<Scene>,
    pub test: Vec<Scene>,
}

/// Content hash of a scene's positions, presence pattern and ids.
pub fn fingerprint(scene: &Scene) -> u64 {
    let mut h = DefaultHasher::new();
    scene.ped_ids().hash(&mut h);
    for track in scene.tracks() {
        for p in track {
            p.map(|p| (p[0].to_bits(), p[1].to_bits())).hash(&mut h);
        }
    }
    h.finish()
}

#[derive(Clone, Debug)]
pub struct LooFold {
    pub held_out: String,
    pub row: MetricsRow,
    /// Fingerprints of every scene handed to training, sorted.
    pub training_fingerprints: Vec<u64>,
    /// Normalization fitted for this fold.
    pub norm: NormStats,
    pub best_epoch: usize,
}

#[derive(Clone, Debug)]
pub struct LooReport {
    pub folds: Vec<LooFold>,
    pub average: MetricsRow,
}

impl LooReport {
    /// Fold rows followed by the average row.
    pub fn rows(&self) -> Vec<MetricsRow> {
        let mut rows: Vec<MetricsRow> = self.folds.iter().map(|f| f.row.clone()).collect();
        rows.push(self.average.clone());
        rows
    }
}

/// Train on all splits but one with a fresh initialization and
/// normalization, test on the one left out, for each split in turn.
pub fn leave_one_out(
    splits: &[Split],
    config: &TrainConfig,
    variant: Variant,
    mut on_fold: impl FnMut(&LooFold),
) -> Result<LooReport, EvalError> {
    if splits.len() < 2 {
        return Err(EvalError::Empty(format!("leave-one-out needs at least 2 splits, got {}", splits.len())));
    }
    if let Some(s) = splits.iter().find(|s| s.train.is_empty() || s.test.is_empty()) {
        return Err(EvalError::Empty(format!("split {}", s.name)));
    }
    let mut folds = Vec::with_capacity(splits.len());
    for (i, held) in splits.iter().enumerate() {
        let training: Vec<Scene> = splits
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .flat_map(|(_, s)| s.train.iter().cloned())
            .collect();
        let mut training_fingerprints: Vec<u64> = training.iter().map(fingerprint).collect();
        training_fingerprints.sort_unstable();
        let held_prints: HashSet<u64> = held.train.iter().chain(&held.test).map(fingerprint).collect();
        if training_fingerprints.iter().any(|f| held_prints.contains(f)) {
            return Err(EvalError::Leak {
                split: held.name.clone(),
            });
        }
        let outcome = train(config, &training, variant)?;
        let evaluation = evaluate(&outcome.checkpoint, &held.test, &held.name)?;
        let fold = LooFold {
            held_out: held.name.clone(),
            row: evaluation.row,
            training_fingerprints,
            norm: outcome.checkpoint.norm,
            best_epoch: outcome.best_epoch,
        };
        on_fold(&fold);
        folds.push(fold);
    }
    let rows: Vec<MetricsRow> = folds.iter().map(|f| f.row.clone()).collect();
    let average = average_row(&rows).expect("at least two folds");
    Ok(LooReport { folds, average })
}
