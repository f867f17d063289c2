use super::{FactorKind, ModelError};
use crate::autodiff::Tensor;
use crate::stgraph::{metapaths, MetaPathKind, StGraph};

/// Elementwise sum of feature instances, zero when there are none.
///
/// Instances are summed in sorted order so the result depends only on the
/// multiset of values, not on pedestrian numbering.
pub fn aggregate_instances(width: usize, instances: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
    if let Some(bad) = instances.iter().find(|v| v.len() != width) {
        return Err(ModelError::Dimension(format!(
            "feature instance of width {} where {width} expected",
            bad.len()
        )));
    }
    let mut sorted: Vec<&Vec<f64>> = instances.iter().collect();
    sorted.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut sum = vec![0.0; width];
    for v in sorted {
        for (s, x) in sum.iter_mut().zip(v) {
            *s += x;
        }
    }
    Ok(sum)
}

fn instances(graph: &StGraph, ped: usize, step: usize, kind: FactorKind) -> Result<Vec<Vec<f64>>, ModelError> {
    let n = graph.num_peds();
    let meta = |k| -> Result<Vec<Vec<f64>>, ModelError> {
        Ok(metapaths(graph, ped, step, k)?
            .into_iter()
            .map(|f| f.value.to_vec())
            .collect())
    };
    Ok(match kind {
        FactorKind::S => (0..n)
            .filter(|&j| j != ped)
            .filter_map(|j| graph.spatial(ped, j, step).map(|e| e.to_vec()))
            .collect(),
        FactorKind::T => graph.temporal(ped, step).map(|e| e.to_vec()).into_iter().collect(),
        FactorKind::SS => meta(MetaPathKind::SS)?,
        FactorKind::ST => meta(MetaPathKind::ST)?,
        FactorKind::TS => meta(MetaPathKind::TS)?,
        FactorKind::TT => meta(MetaPathKind::TT)?,
    })
}

/// Summed features of one kind for every pedestrian at `step`, as `[N, width]`.
pub fn factor_features(graph: &StGraph, step: usize, kind: FactorKind) -> Result<Tensor, ModelError> {
    let n = graph.num_peds();
    let width = kind.input_dim();
    let mut data = Vec::with_capacity(n * width);
    for ped in 0..n {
        data.extend(aggregate_instances(width, &instances(graph, ped, step, kind)?)?);
    }
    Ok(Tensor::new(vec![n, width], data)?)
}
