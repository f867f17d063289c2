//! Spatio-temporal graphs over pedestrian scenes and the length-1/length-2
//! meta-path features read off them.
//!
//! Vertices are `(pedestrian, step)` positions. Spatial edges join different
//! pedestrians at the same step, temporal edges join one pedestrian across
//! consecutive steps. Every edge carries the difference of its endpoint
//! positions; a walk reads each edge oriented away from where it started.

mod graph;
mod metapath;
mod oracle;
mod scene;

pub use graph::{build_graph, spatial_edge, temporal_edge, GraphConfig, SpatialEdge, StGraph, TemporalEdge};
pub use metapath::{metapaths, EdgeType, MetaPathFeature, MetaPathKind};
pub use oracle::{enumerate_walks_oracle, WalkFeature};
pub use scene::{Scene, DEFAULT_FRAME_INTERVAL};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A 2-D position or displacement.
pub type Point = [f64; 2];

pub(crate) fn diff(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StGraphError {
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("pedestrian {ped} is absent at step {step}")]
    Absent { ped: usize, step: usize },
    #[error("spatial edge needs two distinct pedestrians, got {0} twice")]
    SelfEdge(usize),
    #[error("step {step} outside graph of {len} steps")]
    StepOutOfRange { step: usize, len: usize },
    #[error("pedestrian {ped} outside scene of {count}")]
    PedOutOfRange { ped: usize, count: usize },
    #[error("unknown meta-path kind {0:?}")]
    UnknownKind(String),
    #[error("walk signatures have length 1 or 2, got {0}")]
    Signature(usize),
}

/// Random scene for property checks: 1..=`max_peds` pedestrians over
/// 3..=`max_steps` steps, each position present with probability `presence`.
pub fn random_scene(seed: u64, max_peds: usize, max_steps: usize, presence: f64) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_peds.max(1));
    let len = rng.random_range(3..=max_steps.max(3));
    let tracks = (0..n)
        .map(|_| {
            (0..len)
                .map(|_| {
                    rng.random_bool(presence)
                        .then(|| [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)])
                })
                .collect()
        })
        .collect();
    Scene::new(DEFAULT_FRAME_INTERVAL, (0..n as i64).collect(), tracks).expect("valid random scene")
}

#[cfg(test)]
mod tests;
