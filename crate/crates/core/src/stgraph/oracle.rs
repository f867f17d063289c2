//! Brute-force typed-walk enumeration, kept deliberately naive so it can
//! serve as an independent check of [`super::metapaths`].
//!
//! A walk starts at `(anchor, step)`, never revisits a vertex, follows
//! spatial edges within a step and temporal edges backwards in time only.

use super::{EdgeType, Point, StGraph, StGraphError};

#[derive(Clone, Debug, PartialEq)]
pub struct WalkFeature {
    pub vertices: Vec<(usize, usize)>,
    pub value: Vec<f64>,
}

fn vertices(graph: &StGraph) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for step in 0..graph.steps() {
        for ped in 0..graph.num_peds() {
            if graph.position(ped, step).is_some() {
                v.push((ped, step));
            }
        }
    }
    v
}

/// Feature of the edge `from -> to` of the given type, found by scanning the
/// edge lists.
fn edge_feature(graph: &StGraph, from: (usize, usize), to: (usize, usize), ty: EdgeType) -> Option<Point> {
    match ty {
        EdgeType::Spatial => {
            if from.1 != to.1 {
                return None;
            }
            graph.spatial_edges().iter().find_map(|e| {
                if e.step != from.1 {
                    None
                } else if (e.i, e.j) == (from.0, to.0) {
                    Some(e.feature)
                } else if (e.j, e.i) == (from.0, to.0) {
                    Some([-e.feature[0], -e.feature[1]])
                } else {
                    None
                }
            })
        }
        EdgeType::Temporal => {
            if from.0 != to.0 || to.1 + 1 != from.1 {
                return None;
            }
            graph
                .temporal_edges()
                .iter()
                .find(|e| e.ped == from.0 && e.step == from.1)
                .map(|e| e.feature)
        }
    }
}

/// All typed walks matching `signature` from `(anchor, step)`.
pub fn enumerate_walks_oracle(
    graph: &StGraph,
    anchor: usize,
    step: usize,
    signature: &[EdgeType],
) -> Result<Vec<WalkFeature>, StGraphError> {
    graph.check_vertex(anchor, step)?;
    if signature.is_empty() || signature.len() > 2 {
        return Err(StGraphError::Signature(signature.len()));
    }
    let all = vertices(graph);
    if !all.contains(&(anchor, step)) {
        return Ok(Vec::new());
    }
    let mut partial = vec![WalkFeature {
        vertices: vec![(anchor, step)],
        value: Vec::new(),
    }];
    for &ty in signature {
        let mut next = Vec::new();
        for walk in &partial {
            let last = *walk.vertices.last().unwrap();
            for &candidate in &all {
                if walk.vertices.contains(&candidate) {
                    continue;
                }
                if let Some(f) = edge_feature(graph, last, candidate, ty) {
                    let mut w = walk.clone();
                    w.vertices.push(candidate);
                    w.value.extend_from_slice(&f);
                    next.push(w);
                }
            }
        }
        partial = next;
    }
    Ok(partial)
}
