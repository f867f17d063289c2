//! Plain-text checkpoint format.
//!
//! ```text
//! MESRNN-CKPT v1
//! variant=mesrnn edge_embed=64 ... frame_interval=4.0000000000000002e-1 obs=8 pred=12
//! tensor edge.S.encoder.weight 64 2
//! <one value per line, 17 significant digits>
//! ...
//! end
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{ModelDims, ModelError, ModelParams, Variant};
use crate::autodiff::Tensor;
use crate::training::NormStats;

pub const CHECKPOINT_MAGIC: &str = "MESRNN-CKPT v1";

/// Run settings stored next to the tensors.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckpointMeta {
    pub dropout: f64,
    pub seed: u64,
    pub frame_interval: f64,
    pub obs: usize,
    pub pred: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub params: ModelParams,
    pub norm: NormStats,
    pub meta: CheckpointMeta,
}

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl Checkpoint {
    pub fn to_text(&self) -> String {
        let dims = self.params.dims();
        let mut out = String::with_capacity(24 * self.params.param_count() + 4096);
        out.push_str(CHECKPOINT_MAGIC);
        out.push('\n');
        let _ = writeln!(
            out,
            "variant={} edge_embed={} edge_hidden={} node_embed={} node_hidden={} dropout={} seed={} \
             norm_min_x={} norm_max_x={} norm_min_y={} norm_max_y={} frame_interval={} obs={} pred={}",
            self.params.variant(),
            dims.edge_embed,
            dims.edge_hidden,
            dims.node_embed,
            dims.node_hidden,
            fmt_f64(self.meta.dropout),
            self.meta.seed,
            fmt_f64(self.norm.min[0]),
            fmt_f64(self.norm.max[0]),
            fmt_f64(self.norm.min[1]),
            fmt_f64(self.norm.max[1]),
            fmt_f64(self.meta.frame_interval),
            self.meta.obs,
            self.meta.pred,
        );
        for (_, name, t) in self.params.store().iter() {
            out.push_str("tensor ");
            out.push_str(name);
            for d in t.shape() {
                let _ = write!(out, " {d}");
            }
            out.push('\n');
            for v in t.data() {
                let _ = writeln!(out, "{v:.16e}");
            }
        }
        out.push_str("end\n");
        out
    }

    pub fn from_text(text: &str) -> Result<Self, ModelError> {
        let mut lines = text.lines();
        match lines.next() {
            Some(CHECKPOINT_MAGIC) => {}
            Some(other) => {
                return Err(ModelError::Checkpoint(format!(
                    "unsupported header {other:?}, expected {CHECKPOINT_MAGIC:?}"
                )))
            }
            None => return Err(ModelError::Checkpoint("empty file".into())),
        }
        let meta_line = lines
            .next()
            .ok_or_else(|| ModelError::Checkpoint("missing metadata line".into()))?;
        let mut meta: HashMap<&str, &str> = HashMap::new();
        for field in meta_line.split_whitespace() {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| ModelError::Checkpoint(format!("malformed metadata field {field:?}")))?;
            meta.insert(k, v);
        }
        let get = |k: &str| {
            meta.get(k)
                .copied()
                .ok_or_else(|| ModelError::Checkpoint(format!("metadata lacks {k}")))
        };
        fn num<T: std::str::FromStr>(k: &str, v: &str) -> Result<T, ModelError> {
            v.parse()
                .map_err(|_| ModelError::Checkpoint(format!("metadata {k}={v} is not a number")))
        }
        let variant: Variant = get("variant")?.parse()?;
        let dims = ModelDims {
            edge_embed: num("edge_embed", get("edge_embed")?)?,
            edge_hidden: num("edge_hidden", get("edge_hidden")?)?,
            node_embed: num("node_embed", get("node_embed")?)?,
            node_hidden: num("node_hidden", get("node_hidden")?)?,
        };
        let norm = NormStats::new(
            [
                num("norm_min_x", get("norm_min_x")?)?,
                num("norm_min_y", get("norm_min_y")?)?,
            ],
            [
                num("norm_max_x", get("norm_max_x")?)?,
                num("norm_max_y", get("norm_max_y")?)?,
            ],
        )
        .map_err(|e| ModelError::Checkpoint(e.to_string()))?;
        let meta = CheckpointMeta {
            dropout: num("dropout", get("dropout")?)?,
            seed: num("seed", get("seed")?)?,
            frame_interval: num("frame_interval", get("frame_interval")?)?,
            obs: num("obs", get("obs")?)?,
            pred: num("pred", get("pred")?)?,
        };

        let mut tensors = Vec::new();
        let mut ended = false;
        let mut pending = lines.next();
        while let Some(line) = pending {
            if line == "end" {
                ended = true;
                if let Some(extra) = lines.find(|l| !l.trim().is_empty()) {
                    return Err(ModelError::Checkpoint(format!("content after end: {extra:?}")));
                }
                break;
            }
            let mut parts = line.split_whitespace();
            if parts.next() != Some("tensor") {
                let name = tensors.last().map_or("<none>".to_string(), |(n, _): &(String, Tensor)| n.clone());
                return Err(ModelError::CheckpointTensor {
                    name,
                    reason: format!("unexpected line {line:?} (more values than declared?)"),
                });
            }
            let name = parts
                .next()
                .ok_or_else(|| ModelError::Checkpoint("tensor header without a name".into()))?
                .to_string();
            let shape: Vec<usize> = parts
                .map(|d| {
                    d.parse().map_err(|_| ModelError::CheckpointTensor {
                        name: name.clone(),
                        reason: format!("bad extent {d:?}"),
                    })
                })
                .collect::<Result<_, _>>()?;
            let len: usize = shape.iter().product();
            let mut data = Vec::with_capacity(len);
            pending = None;
            for l in lines.by_ref() {
                if data.len() == len {
                    pending = Some(l);
                    break;
                }
                match l.parse::<f64>() {
                    Ok(v) => data.push(v),
                    Err(_) => {
                        return Err(ModelError::CheckpointTensor {
                            name,
                            reason: format!("expected {len} values, found {} before {l:?}", data.len()),
                        })
                    }
                }
            }
            if data.len() != len {
                return Err(ModelError::CheckpointTensor {
                    name,
                    reason: format!("truncated: expected {len} values, found {}", data.len()),
                });
            }
            let t = Tensor::new(shape, data).map_err(|e| ModelError::CheckpointTensor {
                name: name.clone(),
                reason: e.to_string(),
            })?;
            tensors.push((name, t));
        }
        if !ended {
            return Err(ModelError::Checkpoint("truncated: missing end marker".into()));
        }
        let params = ModelParams::from_tensors(variant, dims, tensors)?;
        Ok(Self { params, norm, meta })
    }

    /// Reject a checkpoint of a different variant.
    pub fn expect_variant(self, expected: Variant) -> Result<Self, ModelError> {
        let found = self.params.variant();
        if found != expected {
            return Err(ModelError::VariantMismatch { expected, found });
        }
        Ok(self)
    }
}

pub fn save_checkpoint(checkpoint: &Checkpoint, path: &Path) -> Result<(), ModelError> {
    std::fs::write(path, checkpoint.to_text()).map_err(|e| ModelError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, ModelError> {
    let text = std::fs::read_to_string(path).map_err(|e| ModelError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    Checkpoint::from_text(&text)
}
