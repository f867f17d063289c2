use super::cells::decode_offset;
use super::{factor_features, Architecture, Dropout, LstmCell, LstmState, ModelError, ModelParams};
use crate::autodiff::{Tape, Tensor, Var};
use crate::stgraph::{build_graph, GraphConfig, Scene, StGraph, StGraphError};

/// Recurrent state of every pedestrian in a scene (row `i` is pedestrian `i`).
#[derive(Clone, Debug)]
pub struct SceneState {
    pub edges: Vec<LstmState>,
    pub node: LstmState,
}

impl SceneState {
    /// All hidden and cell states zero.
    pub fn new(tape: &mut Tape<'_>, params: &ModelParams, num_peds: usize) -> Self {
        let dims = params.dims();
        match params.architecture() {
            Architecture::Structural { edges, .. } => Self {
                edges: edges
                    .iter()
                    .map(|_| LstmState::zeros(tape, num_peds, dims.edge_hidden))
                    .collect(),
                node: LstmState::zeros(tape, num_peds, dims.node_hidden),
            },
            Architecture::Vanilla(_) => Self {
                edges: Vec::new(),
                node: LstmState::zeros(tape, num_peds, dims.edge_hidden),
            },
        }
    }
}

impl ModelParams {
    /// Predict positions at `step + 1` for every pedestrian from the believed
    /// positions recorded in `graph` up to `step`. All predictions of a step
    /// are produced together; nothing predicted here feeds this step's features.
    pub fn step(
        &self,
        tape: &mut Tape<'_>,
        graph: &StGraph,
        step: usize,
        state: &mut SceneState,
        dropout: &mut Dropout,
    ) -> Result<Var, ModelError> {
        let n = graph.num_peds();
        let mut pos = Vec::with_capacity(2 * n);
        for ped in 0..n {
            let p = graph
                .position(ped, step)
                .ok_or(StGraphError::Absent { ped, step })?;
            pos.extend_from_slice(&p);
        }
        let position = tape.constant(Tensor::new(vec![n, 2], pos)?);
        match self.architecture() {
            Architecture::Structural { edges, node } => {
                let mut hiddens = Vec::with_capacity(edges.len());
                for (rnn, slot) in edges.iter().zip(state.edges.iter_mut()) {
                    let feats = tape.constant(factor_features(graph, step, rnn.kind)?);
                    *slot = rnn.step(tape, feats, *slot, dropout)?;
                    hiddens.push((rnn.kind, slot.h));
                }
                let (next_state, next) = node.step(tape, position, &hiddens, state.node, dropout)?;
                state.node = next_state;
                Ok(next)
            }
            Architecture::Vanilla(v) => {
                let (next_state, next) = v.step(tape, position, state.node, dropout)?;
                state.node = next_state;
                Ok(next)
            }
        }
    }
}

/// Unroll over a fully-present scene feeding ground truth at every step.
/// Element `t` of the result is the `[N, 2]` prediction for step `t + 1`.
///
/// Because every input is known in advance, embeddings and input-to-gate
/// projections run once over all steps stacked row-wise; only the
/// hidden-to-hidden products are sequential. Row for row the values equal
/// those of [`teacher_forced_stepwise`] when dropout is off.
pub fn teacher_forced(
    tape: &mut Tape<'_>,
    params: &ModelParams,
    scene: &Scene,
    dropout: &mut Dropout,
) -> Result<Vec<Var>, ModelError> {
    let graph = build_graph(scene, scene.len(), &GraphConfig::default())?;
    let n = scene.num_peds();
    let steps = scene.len() - 1;
    let mut pos = Vec::with_capacity(steps * n * 2);
    for step in 0..steps {
        for ped in 0..n {
            let p = graph
                .position(ped, step)
                .ok_or(StGraphError::Absent { ped, step })?;
            pos.extend_from_slice(&p);
        }
    }
    let positions = tape.constant(Tensor::new(vec![steps * n, 2], pos)?);

    let recur = |tape: &mut Tape<'_>, cell: &LstmCell, projected: Var| -> Result<Var, ModelError> {
        let mut state = LstmState::zeros(tape, n, cell.hidden);
        let mut hs = Vec::with_capacity(steps);
        for t in 0..steps {
            let x = tape.rows(projected, t * n, n)?;
            state = cell.recur(tape, x, state)?;
            hs.push(state.h);
        }
        Ok(tape.stack_rows(&hs)?)
    };

    let (decoder, hidden) = match params.architecture() {
        Architecture::Structural { edges, node } => {
            let mut parts = Vec::with_capacity(edges.len() + 1);
            parts.push(node.encoder.embed(tape, positions, dropout)?);
            for rnn in edges {
                let width = rnn.kind.input_dim();
                let mut feats = Vec::with_capacity(steps * n * width);
                for t in 0..steps {
                    feats.extend_from_slice(factor_features(&graph, t, rnn.kind)?.data());
                }
                let x = tape.constant(Tensor::new(vec![steps * n, width], feats)?);
                let e = rnn.encoder.embed(tape, x, dropout)?;
                let projected = rnn.cell.project(tape, e)?;
                parts.push(recur(tape, &rnn.cell, projected)?);
            }
            let zeta = tape.concat(&parts)?;
            let projected = node.cell.project(tape, zeta)?;
            (&node.decoder, recur(tape, &node.cell, projected)?)
        }
        Architecture::Vanilla(v) => {
            let e = v.encoder.embed(tape, positions, dropout)?;
            let projected = v.cell.project(tape, e)?;
            (&v.decoder, recur(tape, &v.cell, projected)?)
        }
    };
    let next = decode_offset(tape, decoder, hidden, positions)?;
    (0..steps).map(|t| Ok(tape.rows(next, t * n, n)?)).collect()
}

/// Same unroll as [`teacher_forced`], one [`ModelParams::step`] at a time.
pub fn teacher_forced_stepwise(
    tape: &mut Tape<'_>,
    params: &ModelParams,
    scene: &Scene,
    dropout: &mut Dropout,
) -> Result<Vec<Var>, ModelError> {
    let graph = build_graph(scene, scene.len(), &GraphConfig::default())?;
    let mut state = SceneState::new(tape, params, scene.num_peds());
    (0..scene.len() - 1)
        .map(|t| params.step(tape, &graph, t, &mut state, dropout))
        .collect()
}
