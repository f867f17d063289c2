use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{StGraph, StGraphError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeType {
    Spatial,
    Temporal,
}

/// The four length-2 meta-path types of a two-edge-type graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MetaPathKind {
    SS,
    ST,
    TS,
    TT,
}

impl MetaPathKind {
    pub const ALL: [MetaPathKind; 4] = [Self::SS, Self::ST, Self::TS, Self::TT];

    pub fn signature(self) -> [EdgeType; 2] {
        use EdgeType::*;
        match self {
            Self::SS => [Spatial, Spatial],
            Self::ST => [Spatial, Temporal],
            Self::TS => [Temporal, Spatial],
            Self::TT => [Temporal, Temporal],
        }
    }

    pub fn from_signature(sig: &[EdgeType]) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.signature() == sig)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::SS => "SS",
            Self::ST => "ST",
            Self::TS => "TS",
            Self::TT => "TT",
        }
    }
}

impl fmt::Display for MetaPathKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetaPathKind {
    type Err = StGraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "SS" => Ok(Self::SS),
            "ST" => Ok(Self::ST),
            "TS" => Ok(Self::TS),
            "TT" => Ok(Self::TT),
            _ => Err(StGraphError::UnknownKind(s.to_string())),
        }
    }
}

/// One length-2 meta-path instance anchored at a pedestrian.
///
/// `value` is the ordered concatenation of the two edge features along the
/// walk, each oriented away from the walk's start.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaPathFeature {
    pub kind: MetaPathKind,
    pub anchor: usize,
    /// Pedestrian at the walk's end (equals `anchor` for TT).
    pub partner: usize,
    /// Middle pedestrian of an SS walk.
    pub intermediate: Option<usize>,
    pub step: usize,
    pub value: [f64; 4],
}

impl MetaPathFeature {
    /// Vertices `(ped, step)` visited by the walk, start first.
    pub fn walk(&self) -> [(usize, usize); 3] {
        let (i, j, t) = (self.anchor, self.partner, self.step);
        match self.kind {
            MetaPathKind::SS => [(i, t), (self.intermediate.expect("SS has an intermediate"), t), (j, t)],
            MetaPathKind::ST => [(i, t), (j, t), (j, t - 1)],
            MetaPathKind::TS => [(i, t), (i, t - 1), (j, t - 1)],
            MetaPathKind::TT => [(i, t), (i, t - 1), (i, t - 2)],
        }
    }
}

fn cat(a: [f64; 2], b: [f64; 2]) -> [f64; 4] {
    [a[0], a[1], b[0], b[1]]
}

/// Every meta-path instance of `kind` anchored at `(anchor, step)`.
///
/// Instances whose constituent edges are missing are omitted.
pub fn metapaths(
    graph: &StGraph,
    anchor: usize,
    step: usize,
    kind: MetaPathKind,
) -> Result<Vec<MetaPathFeature>, StGraphError> {
    graph.check_vertex(anchor, step)?;
    let n = graph.num_peds();
    let i = anchor;
    let t = step;
    let mk = |partner, intermediate, value| MetaPathFeature {
        kind,
        anchor,
        partner,
        intermediate,
        step,
        value,
    };
    let mut out = Vec::new();
    match kind {
        MetaPathKind::SS => {
            for k in (0..n).filter(|&k| k != i) {
                let Some(e_ik) = graph.spatial(i, k, t) else { continue };
                for j in (0..n).filter(|&j| j != i && j != k) {
                    if let Some(e_kj) = graph.spatial(k, j, t) {
                        out.push(mk(j, Some(k), cat(e_ik, e_kj)));
                    }
                }
            }
        }
        MetaPathKind::ST => {
            for j in (0..n).filter(|&j| j != i) {
                if let (Some(e_ij), Some(e_j)) = (graph.spatial(i, j, t), graph.temporal(j, t)) {
                    out.push(mk(j, None, cat(e_ij, e_j)));
                }
            }
        }
        MetaPathKind::TS => {
            if let (Some(e_i), true) = (graph.temporal(i, t), t >= 1) {
                for j in (0..n).filter(|&j| j != i) {
                    if let Some(e_ij) = graph.spatial(i, j, t - 1) {
                        out.push(mk(j, None, cat(e_i, e_ij)));
                    }
                }
            }
        }
        MetaPathKind::TT => {
            if t >= 1 {
                if let (Some(now), Some(prev)) = (graph.temporal(i, t), graph.temporal(i, t - 1)) {
                    out.push(mk(i, None, cat(now, prev)));
                }
            }
        }
    }
    Ok(out)
}
