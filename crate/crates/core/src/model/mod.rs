//! The structural recurrent model and its baselines.
//!
//! One EdgeRNN per factor kind turns the summed features of that kind into a
//! hidden state; the NodeRNN concatenates a position embedding with every
//! EdgeRNN hidden state, runs its own LSTM and decodes a bounded position
//! offset. Parameters are shared by every pedestrian, so the parameter count
//! depends only on the variant and the layer widths.
//!
//! All per-step computations are batched: row `i` of every `[N, _]` tensor
//! belongs to pedestrian `i`.

mod cells;
mod checkpoint;
mod features;
mod unroll;

pub use cells::{Dropout, EdgeRnn, LinearLayer, LstmCell, LstmState, NodeRnn, VanillaLstm};
pub(crate) use checkpoint::fmt_f64;
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CheckpointMeta, CHECKPOINT_MAGIC};
pub use features::{aggregate_instances, factor_features};
pub use unroll::{teacher_forced, teacher_forced_stepwise, SceneState};

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{AutodiffError, ParamStore, Tensor};
use crate::stgraph::StGraphError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
    #[error(transparent)]
    Graph(#[from] StGraphError),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("edge hiddens must be ordered {expected:?}, got {got:?}")]
    KindOrder {
        expected: Vec<FactorKind>,
        got: Vec<FactorKind>,
    },
    #[error("unknown model variant {0:?}")]
    UnknownVariant(String),
    #[error("unknown factor kind {0:?}")]
    UnknownFactor(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("checkpoint tensor {name}: {reason}")]
    CheckpointTensor { name: String, reason: String },
    #[error("checkpoint holds a {found} model, expected {expected}")]
    VariantMismatch { expected: Variant, found: Variant },
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Mesrnn,
    Srnn,
    Vlstm,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Self::Mesrnn, Self::Srnn, Self::Vlstm];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Mesrnn => "mesrnn",
            Self::Srnn => "srnn",
            Self::Vlstm => "vlstm",
        }
    }

    /// EdgeRNN kinds in NodeRNN concatenation order.
    pub fn factor_kinds(self) -> &'static [FactorKind] {
        match self {
            Self::Mesrnn => &FactorKind::ALL,
            Self::Srnn => &FactorKind::ALL[..2],
            Self::Vlstm => &[],
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mesrnn" => Ok(Self::Mesrnn),
            "srnn" => Ok(Self::Srnn),
            "vlstm" => Ok(Self::Vlstm),
            _ => Err(ModelError::UnknownVariant(s.to_string())),
        }
    }
}

/// Edge factor kinds: length-1 paths (plain edges) and length-2 meta-paths.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FactorKind {
    S,
    T,
    SS,
    ST,
    TS,
    TT,
}

impl FactorKind {
    pub const ALL: [FactorKind; 6] = [Self::S, Self::T, Self::SS, Self::ST, Self::TS, Self::TT];

    /// Width of one feature instance.
    pub fn input_dim(self) -> usize {
        match self {
            Self::S | Self::T => 2,
            _ => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::S => "S",
            Self::T => "T",
            Self::SS => "SS",
            Self::ST => "ST",
            Self::TS => "TS",
            Self::TT => "TT",
        }
    }
}

impl fmt::Display for FactorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FactorKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| ModelError::UnknownFactor(s.to_string()))
    }
}

/// Layer widths. The defaults are the published configuration; the
/// vanilla baseline reuses the edge widths.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDims {
    pub edge_embed: usize,
    pub edge_hidden: usize,
    pub node_embed: usize,
    pub node_hidden: usize,
}

impl Default for ModelDims {
    fn default() -> Self {
        Self {
            edge_embed: 64,
            edge_hidden: 128,
            node_embed: 128,
            node_hidden: 256,
        }
    }
}

impl ModelDims {
    /// NodeRNN LSTM input width for a variant.
    pub fn node_input(&self, variant: Variant) -> usize {
        self.node_embed + variant.factor_kinds().len() * self.edge_hidden
    }
}

/// Names and shapes of every tensor of a variant, in canonical order.
pub fn layout(variant: Variant, dims: &ModelDims) -> Vec<(String, Vec<usize>)> {
    let mut out = Vec::new();
    let linear = |prefix: &str, input: usize, output: usize, out: &mut Vec<(String, Vec<usize>)>| {
        out.push((format!("{prefix}.weight"), vec![output, input]));
        out.push((format!("{prefix}.bias"), vec![output]));
    };
    let lstm = |prefix: &str, input: usize, hidden: usize, out: &mut Vec<(String, Vec<usize>)>| {
        out.push((format!("{prefix}.w_ih"), vec![4 * hidden, input]));
        out.push((format!("{prefix}.w_hh"), vec![4 * hidden, hidden]));
        out.push((format!("{prefix}.bias"), vec![4 * hidden]));
    };
    match variant {
        Variant::Vlstm => {
            linear("vlstm.encoder", 2, dims.edge_embed, &mut out);
            lstm("vlstm.cell", dims.edge_embed, dims.edge_hidden, &mut out);
            linear("vlstm.decoder", dims.edge_hidden, 2, &mut out);
        }
        _ => {
            for kind in variant.factor_kinds() {
                linear(&format!("edge.{kind}.encoder"), kind.input_dim(), dims.edge_embed, &mut out);
                lstm(&format!("edge.{kind}.cell"), dims.edge_embed, dims.edge_hidden, &mut out);
            }
            linear("node.encoder", 2, dims.node_embed, &mut out);
            lstm("node.cell", dims.node_input(variant), dims.node_hidden, &mut out);
            linear("node.decoder", dims.node_hidden, 2, &mut out);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub enum Architecture {
    Structural { edges: Vec<EdgeRnn>, node: NodeRnn },
    Vanilla(VanillaLstm),
}

/// Parameter tensors plus the typed handles the forward pass uses.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    variant: Variant,
    dims: ModelDims,
    store: ParamStore,
    arch: Architecture,
}

impl ModelParams {
    /// Assemble from tensors that must match [`layout`] name by name.
    pub fn from_tensors(
        variant: Variant,
        dims: ModelDims,
        tensors: Vec<(String, Tensor)>,
    ) -> Result<Self, ModelError> {
        let expected = layout(variant, &dims);
        if tensors.len() != expected.len() {
            return Err(ModelError::Checkpoint(format!(
                "{variant} expects {} tensors, found {}",
                expected.len(),
                tensors.len()
            )));
        }
        let mut store = ParamStore::new();
        for ((name, shape), (got_name, t)) in expected.iter().zip(tensors) {
            if *name != got_name {
                return Err(ModelError::CheckpointTensor {
                    name: got_name,
                    reason: format!("expected tensor {name} at this position"),
                });
            }
            if t.shape() != shape.as_slice() {
                return Err(ModelError::CheckpointTensor {
                    name: got_name,
                    reason: format!("shape {:?} does not match {variant} shape {shape:?}", t.shape()),
                });
            }
            store.add(got_name, t);
        }
        let arch = Self::wire(variant, &dims, &store);
        Ok(Self {
            variant,
            dims,
            store,
            arch,
        })
    }

    fn wire(variant: Variant, dims: &ModelDims, store: &ParamStore) -> Architecture {
        let id = |n: &str| store.id_of(n).expect("layout tensor present");
        let linear = |p: &str, input, output| LinearLayer {
            weight: id(&format!("{p}.weight")),
            bias: id(&format!("{p}.bias")),
            input,
            output,
        };
        let lstm = |p: &str, input, hidden| LstmCell {
            w_ih: id(&format!("{p}.w_ih")),
            w_hh: id(&format!("{p}.w_hh")),
            bias: id(&format!("{p}.bias")),
            input,
            hidden,
        };
        match variant {
            Variant::Vlstm => Architecture::Vanilla(VanillaLstm {
                encoder: linear("vlstm.encoder", 2, dims.edge_embed),
                cell: lstm("vlstm.cell", dims.edge_embed, dims.edge_hidden),
                decoder: linear("vlstm.decoder", dims.edge_hidden, 2),
            }),
            _ => Architecture::Structural {
                edges: variant
                    .factor_kinds()
                    .iter()
                    .map(|&kind| EdgeRnn {
                        kind,
                        encoder: linear(&format!("edge.{kind}.encoder"), kind.input_dim(), dims.edge_embed),
                        cell: lstm(&format!("edge.{kind}.cell"), dims.edge_embed, dims.edge_hidden),
                    })
                    .collect(),
                node: NodeRnn {
                    kinds: variant.factor_kinds().to_vec(),
                    encoder: linear("node.encoder", 2, dims.node_embed),
                    cell: lstm("node.cell", dims.node_input(variant), dims.node_hidden),
                    decoder: linear("node.decoder", dims.node_hidden, 2),
                },
            },
        }
    }

    /// Glorot-uniform weights, zero biases except LSTM forget gates at 1.
    pub fn init(variant: Variant, dims: ModelDims, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tensors = layout(variant, &dims)
            .into_iter()
            .map(|(name, shape)| {
                let len: usize = shape.iter().product();
                let data = if shape.len() == 2 {
                    let limit = (6.0 / (shape[0] + shape[1]) as f64).sqrt();
                    (0..len).map(|_| rng.random_range(-limit..limit)).collect()
                } else if name.ends_with("cell.bias") {
                    let hidden = len / 4;
                    (0..len)
                        .map(|i| if (hidden..2 * hidden).contains(&i) { 1.0 } else { 0.0 })
                        .collect()
                } else {
                    vec![0.0; len]
                };
                let t = Tensor::new(shape, data).expect("layout shapes are consistent");
                (name, t)
            })
            .collect();
        Self::from_tensors(variant, dims, tensors).expect("layout round trip")
    }

    /// Every tensor zero (a model that always predicts zero displacement).
    pub fn zeros(variant: Variant, dims: ModelDims) -> Self {
        let mut p = Self::init(variant, dims, 0);
        p.store.zero_all();
        p
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn dims(&self) -> &ModelDims {
        &self.dims
    }

    pub fn store(&self) -> &ParamStore {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    pub fn param_count(&self) -> usize {
        self.store.scalar_count()
    }
}

/// Scalar parameter count of a variant, from the layer table alone.
pub fn param_count(variant: Variant, dims: &ModelDims) -> usize {
    layout(variant, dims)
        .iter()
        .map(|(_, s)| s.iter().product::<usize>())
        .sum()
}

#[cfg(test)]
mod tests;
