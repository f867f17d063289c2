use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{FactorKind, ModelError};
use crate::autodiff::{ParamId, Tape, Tensor, Var};

/// Inverted dropout driven by a seeded generator. A rate of zero (or a
/// disabled instance) is the identity and draws nothing from the generator.
#[derive(Clone, Debug)]
pub struct Dropout {
    rate: f64,
    rng: ChaCha8Rng,
}

impl Dropout {
    pub fn new(rate: f64, seed: u64) -> Self {
        assert!((0.0..1.0).contains(&rate), "dropout rate {rate} outside [0, 1)");
        Self {
            rate,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn disabled() -> Self {
        Self::new(0.0, 0)
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub(crate) fn apply(&mut self, tape: &mut Tape<'_>, x: Var) -> Result<Var, ModelError> {
        if self.rate == 0.0 {
            return Ok(x);
        }
        let keep = 1.0 / (1.0 - self.rate);
        let len = tape.value(x).len();
        let mask = (0..len)
            .map(|_| if self.rng.random::<f64>() < self.rate { 0.0 } else { keep })
            .collect();
        Ok(tape.dropout(x, mask)?)
    }
}

/// `y = W x + b` over the last axis.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearLayer {
    pub weight: ParamId,
    pub bias: ParamId,
    pub input: usize,
    pub output: usize,
}

impl LinearLayer {
    pub fn forward(&self, tape: &mut Tape<'_>, x: Var) -> Result<Var, ModelError> {
        let (w, b) = (tape.param(self.weight), tape.param(self.bias));
        Ok(tape.linear(x, w, b)?)
    }

    /// `dropout(tanh(W x + b))`; the embedding used by every encoder.
    pub fn embed(&self, tape: &mut Tape<'_>, x: Var, dropout: &mut Dropout) -> Result<Var, ModelError> {
        let pre = self.forward(tape, x)?;
        let act = tape.tanh(pre)?;
        dropout.apply(tape, act)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LstmState {
    pub h: Var,
    pub c: Var,
}

impl LstmState {
    pub fn zeros(tape: &mut Tape<'_>, batch: usize, hidden: usize) -> Self {
        Self {
            h: tape.constant(Tensor::zeros(&[batch, hidden])),
            c: tape.constant(Tensor::zeros(&[batch, hidden])),
        }
    }
}

/// LSTM cell with gate blocks ordered input, forget, candidate, output.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmCell {
    pub w_ih: ParamId,
    pub w_hh: ParamId,
    pub bias: ParamId,
    pub input: usize,
    pub hidden: usize,
}

impl LstmCell {
    pub fn step(&self, tape: &mut Tape<'_>, x: Var, prev: LstmState) -> Result<LstmState, ModelError> {
        let projected = self.project(tape, x)?;
        self.recur(tape, projected, prev)
    }

    /// Input half of the gate pre-activations, `W_ih x + b`. Rows are
    /// independent, so this can run once over many steps stacked together.
    pub fn project(&self, tape: &mut Tape<'_>, x: Var) -> Result<Var, ModelError> {
        let (w_ih, b) = (tape.param(self.w_ih), tape.param(self.bias));
        Ok(tape.linear(x, w_ih, b)?)
    }

    /// Finish a step from projected inputs `[B, 4H]`.
    pub fn recur(&self, tape: &mut Tape<'_>, projected: Var, prev: LstmState) -> Result<LstmState, ModelError> {
        let h = self.hidden;
        let w_hh = tape.param(self.w_hh);
        let from_h = tape.matmul(prev.h, w_hh)?;
        let gates = tape.add(projected, from_h)?;
        let i = tape.slice(gates, 0, h)?;
        let i = tape.sigmoid(i)?;
        let f = tape.slice(gates, h, h)?;
        let f = tape.sigmoid(f)?;
        let g = tape.slice(gates, 2 * h, h)?;
        let g = tape.tanh(g)?;
        let o = tape.slice(gates, 3 * h, h)?;
        let o = tape.sigmoid(o)?;
        let keep = tape.hadamard(f, prev.c)?;
        let write = tape.hadamard(i, g)?;
        let c = tape.add(keep, write)?;
        let squashed = tape.tanh(c)?;
        let h = tape.hadamard(o, squashed)?;
        Ok(LstmState { h, c })
    }
}

/// Summed-feature encoder plus LSTM for one factor kind.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeRnn {
    pub kind: FactorKind,
    pub encoder: LinearLayer,
    pub cell: LstmCell,
}

impl EdgeRnn {
    /// One step on already-summed features `[B, input_dim]`.
    pub fn step(
        &self,
        tape: &mut Tape<'_>,
        summed: Var,
        prev: LstmState,
        dropout: &mut Dropout,
    ) -> Result<LstmState, ModelError> {
        let width = tape.value(summed).features();
        if width != self.kind.input_dim() {
            return Err(ModelError::Dimension(format!(
                "{} EdgeRNN takes {}-wide features, got {width}",
                self.kind,
                self.kind.input_dim()
            )));
        }
        let e = self.encoder.embed(tape, summed, dropout)?;
        self.cell.step(tape, e, prev)
    }

    /// One step for a single pedestrian from its raw instance list; an empty
    /// list contributes the zero vector.
    pub fn step_instances(
        &self,
        tape: &mut Tape<'_>,
        instances: &[Vec<f64>],
        prev: LstmState,
        dropout: &mut Dropout,
    ) -> Result<LstmState, ModelError> {
        let summed = super::aggregate_instances(self.kind.input_dim(), instances)?;
        let x = tape.constant(Tensor::new(vec![1, summed.len()], summed)?);
        self.step(tape, x, prev, dropout)
    }
}

/// Position encoder, LSTM over `[embedding; edge hiddens]`, offset decoder.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeRnn {
    pub kinds: Vec<FactorKind>,
    pub encoder: LinearLayer,
    pub cell: LstmCell,
    pub decoder: LinearLayer,
}

impl NodeRnn {
    /// Returns the new state and the predicted next positions `[B, 2]`.
    pub fn step(
        &self,
        tape: &mut Tape<'_>,
        position: Var,
        edge_hiddens: &[(FactorKind, Var)],
        prev: LstmState,
        dropout: &mut Dropout,
    ) -> Result<(LstmState, Var), ModelError> {
        let got: Vec<FactorKind> = edge_hiddens.iter().map(|(k, _)| *k).collect();
        if got != self.kinds {
            return Err(ModelError::KindOrder {
                expected: self.kinds.clone(),
                got,
            });
        }
        let e = self.encoder.embed(tape, position, dropout)?;
        let mut parts = Vec::with_capacity(edge_hiddens.len() + 1);
        parts.push(e);
        parts.extend(edge_hiddens.iter().map(|(_, h)| *h));
        let zeta = tape.concat(&parts)?;
        let state = self.cell.step(tape, zeta, prev)?;
        let next = decode_offset(tape, &self.decoder, state.h, position)?;
        Ok((state, next))
    }
}

/// Position-only LSTM baseline.
#[derive(Clone, Debug, PartialEq)]
pub struct VanillaLstm {
    pub encoder: LinearLayer,
    pub cell: LstmCell,
    pub decoder: LinearLayer,
}

impl VanillaLstm {
    pub fn step(
        &self,
        tape: &mut Tape<'_>,
        position: Var,
        prev: LstmState,
        dropout: &mut Dropout,
    ) -> Result<(LstmState, Var), ModelError> {
        let e = self.encoder.embed(tape, position, dropout)?;
        let state = self.cell.step(tape, e, prev)?;
        let next = decode_offset(tape, &self.decoder, state.h, position)?;
        Ok((state, next))
    }
}

/// `position + tanh(W h + b)`; the decoder has no dropout.
pub(crate) fn decode_offset(tape: &mut Tape<'_>, decoder: &LinearLayer, h: Var, position: Var) -> Result<Var, ModelError> {
    let pre = decoder.forward(tape, h)?;
    let delta = tape.tanh(pre)?;
    Ok(tape.add(position, delta)?)
}
