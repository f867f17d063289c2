use super::{diff, Point, Scene, StGraphError};

/// Optional pruning of spatial edges.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GraphConfig {
    /// Only connect co-present pedestrians closer than this distance.
    /// `None` connects every co-present pair.
    pub radius: Option<f64>,
}

/// Undirected spatial edge between `i < j` at `step`; the stored feature is
/// `v_i - v_j` (oriented from the lower index).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpatialEdge {
    pub step: usize,
    pub i: usize,
    pub j: usize,
    pub feature: Point,
}

/// Temporal edge joining `(ped, step - 1)` and `(ped, step)`; feature is
/// `v^step - v^(step-1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TemporalEdge {
    pub step: usize,
    pub ped: usize,
    pub feature: Point,
}

/// Spatio-temporal graph over steps `0..steps`.
#[derive(Clone, Debug)]
pub struct StGraph {
    num_peds: usize,
    steps: usize,
    positions: Vec<Vec<Option<Point>>>,
    spatial_edges: Vec<SpatialEdge>,
    temporal_edges: Vec<TemporalEdge>,
    // [step][i * n + j], oriented from i
    spatial_lookup: Vec<Vec<Option<Point>>>,
    // [step][ped]
    temporal_lookup: Vec<Vec<Option<Point>>>,
}

/// Build the graph over steps `0..up_to` of `scene`.
pub fn build_graph(scene: &Scene, up_to: usize, config: &GraphConfig) -> Result<StGraph, StGraphError> {
    if up_to == 0 || up_to > scene.len() {
        return Err(StGraphError::StepOutOfRange {
            step: up_to,
            len: scene.len(),
        });
    }
    let n = scene.num_peds();
    let positions: Vec<Vec<Option<Point>>> = (0..up_to)
        .map(|t| (0..n).map(|i| scene.position(i, t)).collect())
        .collect();
    Ok(StGraph::from_step_positions(n, positions, config))
}

impl StGraph {
    /// Graph over raw per-step positions (`positions[step][ped]`), without
    /// the minimum-length requirement of a [`Scene`].
    pub fn from_step_positions(num_peds: usize, positions: Vec<Vec<Option<Point>>>, config: &GraphConfig) -> StGraph {
        let n = num_peds;
        let up_to = positions.len();
        debug_assert!(positions.iter().all(|p| p.len() == n));
        let mut spatial_edges = Vec::new();
        let mut temporal_edges = Vec::new();
        let mut spatial_lookup = vec![vec![None; n * n]; up_to];
        let mut temporal_lookup = vec![vec![None; n]; up_to];
        for t in 0..up_to {
            for i in 0..n {
                let Some(vi) = positions[t][i] else { continue };
                for j in i + 1..n {
                    let Some(vj) = positions[t][j] else { continue };
                    let feature = diff(vi, vj);
                    if let Some(r) = config.radius {
                        if feature[0].hypot(feature[1]) > r {
                            continue;
                        }
                    }
                    spatial_edges.push(SpatialEdge { step: t, i, j, feature });
                    spatial_lookup[t][i * n + j] = Some(feature);
                    spatial_lookup[t][j * n + i] = Some(diff(vj, vi));
                }
                if t > 0 {
                    if let Some(prev) = positions[t - 1][i] {
                        let feature = diff(vi, prev);
                        temporal_edges.push(TemporalEdge { step: t, ped: i, feature });
                        temporal_lookup[t][i] = Some(feature);
                    }
                }
            }
        }
        StGraph {
            num_peds: n,
            steps: up_to,
            positions,
            spatial_edges,
            temporal_edges,
            spatial_lookup,
            temporal_lookup,
        }
    }

    pub fn num_peds(&self) -> usize {
        self.num_peds
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn position(&self, ped: usize, step: usize) -> Option<Point> {
        *self.positions.get(step)?.get(ped)?
    }

    pub fn spatial_edges(&self) -> &[SpatialEdge] {
        &self.spatial_edges
    }

    pub fn temporal_edges(&self) -> &[TemporalEdge] {
        &self.temporal_edges
    }

    /// `e_ij^S(t)` oriented from `i`, if the edge exists.
    pub fn spatial(&self, i: usize, j: usize, step: usize) -> Option<Point> {
        if i >= self.num_peds || j >= self.num_peds || step >= self.steps {
            return None;
        }
        self.spatial_lookup[step][i * self.num_peds + j]
    }

    /// `e_i^T(t)`, if the edge exists.
    pub fn temporal(&self, ped: usize, step: usize) -> Option<Point> {
        *self.temporal_lookup.get(step)?.get(ped)?
    }

    pub(crate) fn check_vertex(&self, ped: usize, step: usize) -> Result<(), StGraphError> {
        if ped >= self.num_peds {
            return Err(StGraphError::PedOutOfRange {
                ped,
                count: self.num_peds,
            });
        }
        if step >= self.steps {
            return Err(StGraphError::StepOutOfRange {
                step,
                len: self.steps,
            });
        }
        Ok(())
    }
}

/// `e_ij^S(t) = v_i^t - v_j^t`.
pub fn spatial_edge(scene: &Scene, i: usize, j: usize, step: usize) -> Result<Point, StGraphError> {
    if i == j {
        return Err(StGraphError::SelfEdge(i));
    }
    let vi = scene.position(i, step).ok_or(StGraphError::Absent { ped: i, step })?;
    let vj = scene.position(j, step).ok_or(StGraphError::Absent { ped: j, step })?;
    Ok(diff(vi, vj))
}

/// `e_i^T(t) = v_i^t - v_i^(t-1)`; undefined at step 0.
pub fn temporal_edge(scene: &Scene, ped: usize, step: usize) -> Result<Point, StGraphError> {
    if step == 0 {
        return Err(StGraphError::Absent { ped, step });
    }
    let now = scene.position(ped, step).ok_or(StGraphError::Absent { ped, step })?;
    let prev = scene
        .position(ped, step - 1)
        .ok_or(StGraphError::Absent { ped, step: step - 1 })?;
    Ok(diff(now, prev))
}
