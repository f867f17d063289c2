use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::autodiff::Tape;
use crate::model::{Dropout, ModelParams, SceneState};
use crate::stgraph::{GraphConfig, Point, Scene, StGraph};
use crate::training::NormStats;

/// World-unit rollout of one scene. Row `i` of every field is pedestrian
/// `ped_ids[i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectories {
    pub scene: usize,
    pub ped_ids: Vec<i64>,
    /// Steps `0..obs`.
    pub observed: Vec<Vec<Point>>,
    /// Ground truth over the prediction window, where recorded.
    pub truth: Vec<Vec<Option<Point>>>,
    /// Steps `obs..obs + pred`.
    pub predicted: Vec<Vec<Point>>,
}

/// Predict steps `obs..obs + pred` of a normalized scene. Ground truth feeds
/// steps `0..obs`; afterwards every pedestrian's believed position is the
/// model's own previous output, and features are rebuilt from those beliefs.
/// Returns `[ped][k]` for step `obs + k`.
pub fn rollout_normalized(
    params: &ModelParams,
    scene: &Scene,
    obs: usize,
    pred: usize,
) -> Result<Vec<Vec<Point>>, EvalError> {
    if obs < 1 || scene.len() < obs {
        return Err(EvalError::ShortScene {
            needed: obs.max(1),
            found: scene.len(),
        });
    }
    let n = scene.num_peds();
    for ped in 0..n {
        if let Some(step) = (0..obs).find(|&t| !scene.is_present(ped, t)) {
            return Err(EvalError::MissingObserved { ped, step });
        }
    }
    let config = GraphConfig::default();
    let mut believed: Vec<Vec<Option<Point>>> = (0..obs).map(|t| (0..n).map(|p| scene.position(p, t)).collect()).collect();
    let mut out = vec![Vec::with_capacity(pred); n];
    let mut tape = Tape::new(params.store());
    let mut state = SceneState::new(&mut tape, params, n);
    for step in 0..obs + pred - 1 {
        // Only the last three steps feed the features.
        let lo = step.saturating_sub(2);
        let graph = StGraph::from_step_positions(n, believed[lo..=step].to_vec(), &config);
        let next = params.step(&mut tape, &graph, step - lo, &mut state, &mut Dropout::disabled())?;
        if step + 1 >= obs {
            let v = tape.value(next).data();
            let row: Vec<Option<Point>> = v.chunks_exact(2).map(|c| Some([c[0], c[1]])).collect();
            for (ped, p) in row.iter().enumerate() {
                out[ped].push(p.expect("just predicted"));
            }
            believed.push(row);
        }
    }
    Ok(out)
}

/// [`rollout_normalized`] on a world-unit scene, mapped back through `norm`.
/// Pedestrians not observed at every step `0..obs` are left out.
pub fn rollout(
    params: &ModelParams,
    norm: &NormStats,
    scene: &Scene,
    index: usize,
    obs: usize,
    pred: usize,
) -> Result<Trajectories, EvalError> {
    if scene.len() < obs {
        return Err(EvalError::ShortScene {
            needed: obs,
            found: scene.len(),
        });
    }
    let keep: Vec<usize> = (0..scene.num_peds()).filter(|&p| scene.present_over(p, 0..obs)).collect();
    if keep.is_empty() {
        return Err(EvalError::Empty(format!("scene {index} (no pedestrian observed throughout)")));
    }
    let scene = scene.select(&keep)?;
    let predicted = rollout_normalized(params, &norm.normalize_scene(&scene), obs, pred)?
        .into_iter()
        .map(|track| track.into_iter().map(|p| norm.invert(p)).collect())
        .collect();
    let n = scene.num_peds();
    Ok(Trajectories {
        scene: index,
        ped_ids: scene.ped_ids().to_vec(),
        observed: (0..n)
            .map(|p| (0..obs).map(|t| scene.position(p, t).expect("observed")).collect())
            .collect(),
        truth: (0..n)
            .map(|p| (obs..obs + pred).map(|t| if t < scene.len() { scene.position(p, t) } else { None }).collect())
            .collect(),
        predicted,
    })
}
