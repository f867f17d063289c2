use std::collections::HashMap;

use super::kernels;
use super::{AutodiffError, GradientStore, ParamId, ParamStore, Tensor};

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Primitive operations the engine knows how to differentiate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Primitive {
    Linear,
    Add,
    Sub,
    Hadamard,
    Concat,
    SumList,
    Slice,
    StackRows,
    Rows,
    Tanh,
    Sigmoid,
    Scale,
    Dropout,
    Mse,
}

#[derive(Clone, Debug)]
enum Op {
    Constant,
    Param(ParamId),
    Linear {
        input: Var,
        weight: Var,
        bias: Option<Var>,
    },
    Add(Var, Var),
    Sub(Var, Var),
    Hadamard(Var, Var),
    Concat(Vec<Var>),
    SumList(Vec<Var>),
    Slice {
        input: Var,
        start: usize,
        len: usize,
    },
    StackRows(Vec<Var>),
    Rows {
        input: Var,
        start: usize,
        count: usize,
    },
    Tanh(Var),
    Sigmoid(Var),
    Scale(Var, f64),
    Dropout {
        input: Var,
        mask: Vec<f64>,
    },
    Mse(Var, Var),
}

impl Op {
    fn primitive(&self) -> Option<Primitive> {
        Some(match self {
            Op::Constant | Op::Param(_) => return None,
            Op::Linear { .. } => Primitive::Linear,
            Op::Add(..) => Primitive::Add,
            Op::Sub(..) => Primitive::Sub,
            Op::Hadamard(..) => Primitive::Hadamard,
            Op::Concat(_) => Primitive::Concat,
            Op::SumList(_) => Primitive::SumList,
            Op::Slice { .. } => Primitive::Slice,
            Op::StackRows(_) => Primitive::StackRows,
            Op::Rows { .. } => Primitive::Rows,
            Op::Tanh(_) => Primitive::Tanh,
            Op::Sigmoid(_) => Primitive::Sigmoid,
            Op::Scale(..) => Primitive::Scale,
            Op::Dropout { .. } => Primitive::Dropout,
            Op::Mse(..) => Primitive::Mse,
        })
    }
}

struct Node {
    op: Op,
    // `None` for parameters, whose value lives in the store.
    value: Option<Tensor>,
}

trait Values {
    fn value(&self, v: Var) -> &Tensor;
}

/// Append-only record of a forward computation over a borrowed parameter store.
///
/// Parameters are recorded once per tape (repeated [`Tape::param`] calls return
/// the same handle) so every use accumulates into a single adjoint.
pub struct Tape<'p> {
    params: &'p ParamStore,
    nodes: Vec<Node>,
    param_vars: HashMap<ParamId, Var>,
    fault: Option<Primitive>,
}

impl Values for Tape<'_> {
    fn value(&self, v: Var) -> &Tensor {
        let node = &self.nodes[v.0];
        match (&node.value, &node.op) {
            (Some(t), _) => t,
            (None, Op::Param(id)) => self.params.get(*id),
            (None, _) => unreachable!("non-parameter node without a value"),
        }
    }
}

struct Replayed<'a> {
    params: &'a ParamStore,
    ops: &'a [Node],
    values: Vec<Tensor>,
}

impl Values for Replayed<'_> {
    fn value(&self, v: Var) -> &Tensor {
        match &self.ops[v.0].op {
            Op::Param(id) => self.params.get(*id),
            _ => &self.values[v.0],
        }
    }
}

impl<'p> Tape<'p> {
    pub fn new(params: &'p ParamStore) -> Self {
        Self {
            params,
            nodes: Vec::new(),
            param_vars: HashMap::new(),
            fault: None,
        }
    }

    pub fn params(&self) -> &'p ParamStore {
        self.params
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Scale the vector-Jacobian product of one primitive by 1.5.
    ///
    /// Exists so gradient checks can demonstrate that they catch a broken rule.
    #[doc(hidden)]
    pub fn inject_fault(&mut self, primitive: Primitive) {
        self.fault = Some(primitive);
    }

    pub fn value(&self, v: Var) -> &Tensor {
        Values::value(self, v)
    }

    /// Handle of the `index`-th recorded node.
    pub fn var_at(&self, index: usize) -> Option<Var> {
        (index < self.nodes.len()).then_some(Var(index))
    }

    pub fn constant(&mut self, t: Tensor) -> Var {
        self.push(Op::Constant, Some(t))
    }

    pub fn param(&mut self, id: ParamId) -> Var {
        if let Some(&v) = self.param_vars.get(&id) {
            return v;
        }
        let v = self.push(Op::Param(id), None);
        self.param_vars.insert(id, v);
        v
    }

    fn push(&mut self, op: Op, value: Option<Tensor>) -> Var {
        self.nodes.push(Node { op, value });
        Var(self.nodes.len() - 1)
    }

    fn record(&mut self, op: Op) -> Result<Var, AutodiffError> {
        let value = compute(self, &op)?;
        Ok(self.push(op, Some(value)))
    }

    /// Affine map over the last axis: `out[.., r] = bias[r] + sum_c weight[r][c] * input[.., c]`.
    pub fn linear(&mut self, input: Var, weight: Var, bias: Var) -> Result<Var, AutodiffError> {
        self.record(Op::Linear {
            input,
            weight,
            bias: Some(bias),
        })
    }

    /// [`Tape::linear`] without a bias term.
    pub fn matmul(&mut self, input: Var, weight: Var) -> Result<Var, AutodiffError> {
        self.record(Op::Linear {
            input,
            weight,
            bias: None,
        })
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        self.record(Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        self.record(Op::Sub(a, b))
    }

    pub fn hadamard(&mut self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        self.record(Op::Hadamard(a, b))
    }

    /// Concatenate along the last axis.
    pub fn concat(&mut self, parts: &[Var]) -> Result<Var, AutodiffError> {
        self.record(Op::Concat(parts.to_vec()))
    }

    /// Elementwise sum of equally-shaped tensors.
    pub fn sum_list(&mut self, parts: &[Var]) -> Result<Var, AutodiffError> {
        self.record(Op::SumList(parts.to_vec()))
    }

    /// Contiguous segment `[start, start + len)` of the last axis.
    pub fn slice(&mut self, input: Var, start: usize, len: usize) -> Result<Var, AutodiffError> {
        self.record(Op::Slice { input, start, len })
    }

    /// Stack `[n_k, d]` matrices into `[sum n_k, d]`.
    pub fn stack_rows(&mut self, parts: &[Var]) -> Result<Var, AutodiffError> {
        self.record(Op::StackRows(parts.to_vec()))
    }

    /// Rows `[start, start + count)` of a matrix.
    pub fn rows(&mut self, input: Var, start: usize, count: usize) -> Result<Var, AutodiffError> {
        self.record(Op::Rows { input, start, count })
    }

    pub fn tanh(&mut self, a: Var) -> Result<Var, AutodiffError> {
        self.record(Op::Tanh(a))
    }

    pub fn sigmoid(&mut self, a: Var) -> Result<Var, AutodiffError> {
        self.record(Op::Sigmoid(a))
    }

    pub fn scale(&mut self, a: Var, factor: f64) -> Result<Var, AutodiffError> {
        self.record(Op::Scale(a, factor))
    }

    /// Multiply by a fixed mask (inverted dropout: entries are 0 or 1/(1-p)).
    pub fn dropout(&mut self, input: Var, mask: Vec<f64>) -> Result<Var, AutodiffError> {
        self.record(Op::Dropout { input, mask })
    }

    /// Mean squared difference over all elements, as a scalar.
    pub fn mse(&mut self, pred: Var, target: Var) -> Result<Var, AutodiffError> {
        self.record(Op::Mse(pred, target))
    }

    /// Recompute every node from the recorded leaves and parameters.
    pub fn replay(&self) -> Result<Vec<Tensor>, AutodiffError> {
        let mut replayed = Replayed {
            params: self.params,
            ops: &self.nodes,
            values: Vec::with_capacity(self.nodes.len()),
        };
        for node in &self.nodes {
            let v = match &node.op {
                Op::Constant => node.value.clone().expect("constant without value"),
                Op::Param(id) => self.params.get(*id).clone(),
                op => compute(&replayed, op)?,
            };
            replayed.values.push(v);
        }
        Ok(replayed.values)
    }

    /// Reverse sweep from a scalar `loss`, returning d(loss)/d(parameter)
    /// for every tensor in the borrowed store.
    pub fn backward(&self, loss: Var) -> Result<GradientStore, AutodiffError> {
        let loss_value = self.value(loss);
        if !loss_value.is_scalar() {
            return Err(AutodiffError::NonScalarLoss(loss_value.shape().to_vec()));
        }
        let mut grads = GradientStore::zeros_like(self.params);
        let mut adj: Vec<Option<Tensor>> = vec![None; loss.0 + 1];
        adj[loss.0] = Some(Tensor::filled(loss_value.shape(), 1.0));
        // Weight adjoints are summed once per weight, when the sweep reaches it.
        let mut deferred: HashMap<usize, Vec<(Tensor, Var)>> = HashMap::new();

        for idx in (0..=loss.0).rev() {
            if let Some(pairs) = deferred.remove(&idx) {
                let w = self.value(Var(idx));
                let (out_dim, in_dim) = (w.shape()[0], w.shape()[1]);
                let slot = adj[idx].get_or_insert_with(|| Tensor::zeros(w.shape()));
                let views: Vec<(&[f64], &[f64])> = pairs
                    .iter()
                    .map(|(g, x)| (g.data(), self.value(*x).data()))
                    .collect();
                kernels::accumulate_weight_grad(&views, out_dim, in_dim, slot.data_mut());
            }
            let Some(mut g) = adj[idx].take() else {
                continue;
            };
            let node = &self.nodes[idx];
            if self.fault.is_some() && node.op.primitive() == self.fault {
                for v in g.data_mut() {
                    *v *= 1.5;
                }
            }
            match &node.op {
                Op::Constant => {}
                Op::Param(id) => grads.accumulate(*id, &g)?,
                Op::Linear {
                    input,
                    weight,
                    bias,
                } => {
                    let x = self.value(*input);
                    let w = self.value(*weight);
                    let (out_dim, in_dim) = (w.shape()[0], w.shape()[1]);
                    let batch = x.batch();
                    let mut dx = vec![0.0; x.len()];
                    kernels::affine_backward_input(g.data(), batch, out_dim, w.data(), in_dim, &mut dx);
                    accumulate(&mut adj, *input, x.shape(), &dx);
                    if let Some(b) = bias {
                        let mut db = vec![0.0; out_dim];
                        for row in g.data().chunks_exact(out_dim) {
                            kernels::axpy(&mut db, 1.0, row);
                        }
                        accumulate(&mut adj, *b, &[out_dim], &db);
                    }
                    deferred.entry(weight.0).or_default().push((g, *input));
                }
                Op::Add(a, b) => {
                    accumulate(&mut adj, *a, g.shape(), g.data());
                    accumulate(&mut adj, *b, g.shape(), g.data());
                }
                Op::Sub(a, b) => {
                    accumulate(&mut adj, *a, g.shape(), g.data());
                    let neg: Vec<f64> = g.data().iter().map(|v| -v).collect();
                    accumulate(&mut adj, *b, g.shape(), &neg);
                }
                Op::Hadamard(a, b) => {
                    let (av, bv) = (self.value(*a).data(), self.value(*b).data());
                    let da: Vec<f64> = g.data().iter().zip(bv).map(|(g, b)| g * b).collect();
                    let db: Vec<f64> = g.data().iter().zip(av).map(|(g, a)| g * a).collect();
                    accumulate(&mut adj, *a, g.shape(), &da);
                    accumulate(&mut adj, *b, g.shape(), &db);
                }
                Op::Concat(parts) => {
                    let total = g.features();
                    let mut offset = 0;
                    for p in parts {
                        let pv = self.value(*p);
                        let width = pv.features();
                        let mut dp = Vec::with_capacity(pv.len());
                        for row in g.data().chunks_exact(total) {
                            dp.extend_from_slice(&row[offset..offset + width]);
                        }
                        accumulate(&mut adj, *p, pv.shape(), &dp);
                        offset += width;
                    }
                }
                Op::SumList(parts) => {
                    for p in parts {
                        accumulate(&mut adj, *p, g.shape(), g.data());
                    }
                }
                Op::Slice { input, start, len } => {
                    let xv = self.value(*input);
                    let width = xv.features();
                    let mut dx = vec![0.0; xv.len()];
                    for (dst, src) in dx.chunks_exact_mut(width).zip(g.data().chunks_exact(*len)) {
                        dst[*start..start + len].copy_from_slice(src);
                    }
                    accumulate(&mut adj, *input, xv.shape(), &dx);
                }
                Op::StackRows(parts) => {
                    let mut offset = 0;
                    for p in parts {
                        let pv = self.value(*p);
                        accumulate(&mut adj, *p, pv.shape(), &g.data()[offset..offset + pv.len()]);
                        offset += pv.len();
                    }
                }
                Op::Rows { input, start, .. } => {
                    let xv = self.value(*input);
                    let offset = start * xv.features();
                    let slot = adj[input.0].get_or_insert_with(|| Tensor::zeros(xv.shape()));
                    kernels::axpy(&mut slot.data_mut()[offset..offset + g.len()], 1.0, g.data());
                }
                Op::Tanh(a) => {
                    let y = node.value.as_ref().expect("recorded").data();
                    let da: Vec<f64> = g.data().iter().zip(y).map(|(g, y)| g * (1.0 - y * y)).collect();
                    accumulate(&mut adj, *a, g.shape(), &da);
                }
                Op::Sigmoid(a) => {
                    let y = node.value.as_ref().expect("recorded").data();
                    let da: Vec<f64> = g.data().iter().zip(y).map(|(g, y)| g * y * (1.0 - y)).collect();
                    accumulate(&mut adj, *a, g.shape(), &da);
                }
                Op::Scale(a, c) => {
                    let da: Vec<f64> = g.data().iter().map(|g| g * c).collect();
                    accumulate(&mut adj, *a, g.shape(), &da);
                }
                Op::Dropout { input, mask } => {
                    let da: Vec<f64> = g.data().iter().zip(mask).map(|(g, m)| g * m).collect();
                    accumulate(&mut adj, *input, g.shape(), &da);
                }
                Op::Mse(p, t) => {
                    let (pv, tv) = (self.value(*p), self.value(*t));
                    let seed = g.item() * 2.0 / pv.len() as f64;
                    let dp: Vec<f64> = pv.data().iter().zip(tv.data()).map(|(p, t)| seed * (p - t)).collect();
                    let dt: Vec<f64> = dp.iter().map(|v| -v).collect();
                    accumulate(&mut adj, *p, pv.shape(), &dp);
                    accumulate(&mut adj, *t, tv.shape(), &dt);
                }
            }
        }
        Ok(grads)
    }
}

fn accumulate(adj: &mut [Option<Tensor>], v: Var, shape: &[usize], data: &[f64]) {
    match &mut adj[v.0] {
        Some(t) => t.add_assign(data),
        slot @ None => *slot = Some(Tensor::from_parts(shape.to_vec(), data.to_vec())),
    }
}

fn same_shape(op: &'static str, a: &Tensor, b: &Tensor) -> Result<(), AutodiffError> {
    if a.shape() != b.shape() {
        return Err(AutodiffError::Shape {
            op,
            lhs: a.shape().to_vec(),
            rhs: b.shape().to_vec(),
        });
    }
    Ok(())
}

fn zip_map(a: &Tensor, b: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
    let data = a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).collect();
    Tensor::from_parts(a.shape().to_vec(), data)
}

fn leading(t: &Tensor) -> &[usize] {
    let s = t.shape();
    &s[..s.len().saturating_sub(1)]
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn compute<V: Values>(vals: &V, op: &Op) -> Result<Tensor, AutodiffError> {
    Ok(match op {
        Op::Constant | Op::Param(_) => unreachable!("leaves are not computed"),
        Op::Linear {
            input,
            weight,
            bias,
        } => {
            let x = vals.value(*input);
            let w = vals.value(*weight);
            if w.shape().len() != 2 || x.shape().is_empty() || w.shape()[1] != x.features() {
                return Err(AutodiffError::Shape {
                    op: "linear",
                    lhs: x.shape().to_vec(),
                    rhs: w.shape().to_vec(),
                });
            }
            let (out_dim, in_dim) = (w.shape()[0], w.shape()[1]);
            let b = match bias {
                Some(b) => {
                    let b = vals.value(*b);
                    if b.shape() != [out_dim] {
                        return Err(AutodiffError::Shape {
                            op: "linear bias",
                            lhs: w.shape().to_vec(),
                            rhs: b.shape().to_vec(),
                        });
                    }
                    Some(b.data())
                }
                None => None,
            };
            let batch = x.batch();
            let mut out = vec![0.0; batch * out_dim];
            kernels::affine_forward(x.data(), batch, in_dim, w.data(), out_dim, b, &mut out);
            let mut shape = leading(x).to_vec();
            shape.push(out_dim);
            Tensor::from_parts(shape, out)
        }
        Op::Add(a, b) => {
            let (a, b) = (vals.value(*a), vals.value(*b));
            same_shape("add", a, b)?;
            zip_map(a, b, |x, y| x + y)
        }
        Op::Sub(a, b) => {
            let (a, b) = (vals.value(*a), vals.value(*b));
            same_shape("sub", a, b)?;
            zip_map(a, b, |x, y| x - y)
        }
        Op::Hadamard(a, b) => {
            let (a, b) = (vals.value(*a), vals.value(*b));
            same_shape("hadamard", a, b)?;
            zip_map(a, b, |x, y| x * y)
        }
        Op::Concat(parts) => {
            let first = vals.value(*parts.first().ok_or(AutodiffError::Empty("concat"))?);
            if first.shape().is_empty() {
                return Err(AutodiffError::Shape {
                    op: "concat",
                    lhs: vec![],
                    rhs: vec![],
                });
            }
            let lead = leading(first).to_vec();
            let mut width = 0;
            for p in parts {
                let pv = vals.value(*p);
                if pv.shape().is_empty() || leading(pv) != lead.as_slice() {
                    return Err(AutodiffError::Shape {
                        op: "concat",
                        lhs: first.shape().to_vec(),
                        rhs: pv.shape().to_vec(),
                    });
                }
                width += pv.features();
            }
            let batch = first.batch();
            let mut out = Vec::with_capacity(batch * width);
            for row in 0..batch {
                for p in parts {
                    let pv = vals.value(*p);
                    let f = pv.features();
                    out.extend_from_slice(&pv.data()[row * f..(row + 1) * f]);
                }
            }
            let mut shape = lead;
            shape.push(width);
            Tensor::from_parts(shape, out)
        }
        Op::SumList(parts) => {
            let first = vals.value(*parts.first().ok_or(AutodiffError::Empty("sum_list"))?);
            let mut out = first.clone();
            for p in &parts[1..] {
                let pv = vals.value(*p);
                same_shape("sum_list", first, pv)?;
                out.add_assign(pv.data());
            }
            out
        }
        Op::Slice { input, start, len } => {
            let x = vals.value(*input);
            let width = x.features();
            if *len == 0 || start + len > width || x.shape().is_empty() {
                return Err(AutodiffError::Shape {
                    op: "slice",
                    lhs: x.shape().to_vec(),
                    rhs: vec![*start, *len],
                });
            }
            let mut out = Vec::with_capacity(x.batch() * len);
            for row in x.data().chunks_exact(width) {
                out.extend_from_slice(&row[*start..start + len]);
            }
            let mut shape = leading(x).to_vec();
            shape.push(*len);
            Tensor::from_parts(shape, out)
        }
        Op::StackRows(parts) => {
            let first = vals.value(*parts.first().ok_or(AutodiffError::Empty("stack_rows"))?);
            let mut rows = 0;
            let mut out = Vec::new();
            for p in parts {
                let pv = vals.value(*p);
                if pv.shape().len() != 2 || pv.features() != first.features() || first.shape().len() != 2 {
                    return Err(AutodiffError::Shape {
                        op: "stack_rows",
                        lhs: first.shape().to_vec(),
                        rhs: pv.shape().to_vec(),
                    });
                }
                rows += pv.shape()[0];
                out.extend_from_slice(pv.data());
            }
            Tensor::from_parts(vec![rows, first.features()], out)
        }
        Op::Rows { input, start, count } => {
            let x = vals.value(*input);
            if x.shape().len() != 2 || *count == 0 || start + count > x.shape()[0] {
                return Err(AutodiffError::Shape {
                    op: "rows",
                    lhs: x.shape().to_vec(),
                    rhs: vec![*start, *count],
                });
            }
            let w = x.features();
            Tensor::from_parts(vec![*count, w], x.data()[start * w..(start + count) * w].to_vec())
        }
        Op::Tanh(a) => vals.value(*a).map(f64::tanh),
        Op::Sigmoid(a) => vals.value(*a).map(sigmoid),
        Op::Scale(a, c) => {
            let c = *c;
            vals.value(*a).map(|v| v * c)
        }
        Op::Dropout { input, mask } => {
            let x = vals.value(*input);
            if mask.len() != x.len() {
                return Err(AutodiffError::Shape {
                    op: "dropout",
                    lhs: x.shape().to_vec(),
                    rhs: vec![mask.len()],
                });
            }
            let data = x.data().iter().zip(mask).map(|(x, m)| x * m).collect();
            Tensor::from_parts(x.shape().to_vec(), data)
        }
        Op::Mse(p, t) => {
            let (p, t) = (vals.value(*p), vals.value(*t));
            same_shape("mse", p, t)?;
            let sum: f64 = p.data().iter().zip(t.data()).map(|(a, b)| (a - b) * (a - b)).sum();
            Tensor::scalar(sum / p.len() as f64)
        }
    })
}
