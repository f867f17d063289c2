use serde::{Deserialize, Serialize};

use super::{rollout, EvalError, Trajectories};
use crate::model::Checkpoint;
use crate::stgraph::{Point, Scene};

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn check(pred: &[Vec<Point>], truth: &[Vec<Point>]) -> Result<(), EvalError> {
    if pred.is_empty() {
        return Err(EvalError::Empty("metric input".into()));
    }
    if pred.len() != truth.len() {
        return Err(EvalError::Misaligned(format!("{} predicted vs {} true tracks", pred.len(), truth.len())));
    }
    for (k, (p, t)) in pred.iter().zip(truth).enumerate() {
        if p.is_empty() || p.len() != t.len() {
            return Err(EvalError::Misaligned(format!("track {k}: {} predicted vs {} true steps", p.len(), t.len())));
        }
    }
    Ok(())
}

/// Mean Euclidean error over pedestrians and prediction steps.
pub fn ade(pred: &[Vec<Point>], truth: &[Vec<Point>]) -> Result<f64, EvalError> {
    check(pred, truth)?;
    let steps = pred[0].len();
    if pred.iter().any(|p| p.len() != steps) {
        return Err(EvalError::Misaligned("tracks of different lengths".into()));
    }
    let total: f64 = pred
        .iter()
        .zip(truth)
        .flat_map(|(p, t)| p.iter().zip(t).map(|(a, b)| dist(*a, *b)))
        .sum();
    Ok(total / (pred.len() * steps) as f64)
}

/// Mean Euclidean error at the final prediction step.
pub fn fde(pred: &[Vec<Point>], truth: &[Vec<Point>]) -> Result<f64, EvalError> {
    check(pred, truth)?;
    let total: f64 = pred
        .iter()
        .zip(truth)
        .map(|(p, t)| dist(*p.last().expect("checked"), *t.last().expect("checked")))
        .sum();
    Ok(total / pred.len() as f64)
}

/// One line of the metrics table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub split: String,
    pub variant: String,
    pub ade_norm: f64,
    pub fde_norm: f64,
    pub ade_world: f64,
    pub fde_world: f64,
    pub n_scenes: usize,
    pub n_peds: usize,
    pub seed: u64,
}

/// Cross-split mean of the metric columns; counts are summed.
pub fn average_row(rows: &[MetricsRow]) -> Option<MetricsRow> {
    let first = rows.first()?;
    let mean = |f: fn(&MetricsRow) -> f64| rows.iter().map(f).sum::<f64>() / rows.len() as f64;
    Some(MetricsRow {
        split: "average".into(),
        variant: first.variant.clone(),
        ade_norm: mean(|r| r.ade_norm),
        fde_norm: mean(|r| r.fde_norm),
        ade_world: mean(|r| r.ade_world),
        fde_world: mean(|r| r.fde_world),
        n_scenes: rows.iter().map(|r| r.n_scenes).sum(),
        n_peds: rows.iter().map(|r| r.n_peds).sum(),
        seed: first.seed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub row: MetricsRow,
    pub scenes: Vec<Trajectories>,
}

/// Roll out every scene and score the pedestrians whose ground truth covers
/// the whole prediction window, pooled over scenes.
pub fn evaluate(checkpoint: &Checkpoint, scenes: &[Scene], split: &str) -> Result<Evaluation, EvalError> {
    let (obs, pred) = (checkpoint.meta.obs, checkpoint.meta.pred);
    let one = |(k, s): (usize, &Scene)| rollout(&checkpoint.params, &checkpoint.norm, s, k, obs, pred);
    #[cfg(feature = "parallel")]
    let results: Vec<Result<Trajectories, EvalError>> = {
        use rayon::prelude::*;
        scenes.par_iter().enumerate().map(one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<Trajectories, EvalError>> = scenes.iter().enumerate().map(one).collect();
    let trajectories = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let norm = &checkpoint.norm;
    let (mut pw, mut tw, mut pn, mut tn) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut n_scenes = 0;
    for tr in &trajectories {
        let mut counted = false;
        for (p, t) in tr.predicted.iter().zip(&tr.truth) {
            let Some(t) = t.iter().copied().collect::<Option<Vec<Point>>>() else { continue };
            pn.push(p.iter().map(|&x| norm.apply(x)).collect());
            tn.push(t.iter().map(|&x| norm.apply(x)).collect());
            pw.push(p.clone());
            tw.push(t);
            counted = true;
        }
        n_scenes += usize::from(counted);
    }
    if pw.is_empty() {
        return Err(EvalError::Empty(format!("split {split} (no pedestrian with a full prediction window)")));
    }
    let row = MetricsRow {
        split: split.to_string(),
        variant: checkpoint.params.variant().to_string(),
        ade_norm: ade(&pn, &tn)?,
        fde_norm: fde(&pn, &tn)?,
        ade_world: ade(&pw, &tw)?,
        fde_world: fde(&pw, &tw)?,
        n_scenes,
        n_peds: pw.len(),
        seed: checkpoint.meta.seed,
    };
    Ok(Evaluation {
        row,
        scenes: trajectories,
    })
}
