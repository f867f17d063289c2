//! Dense reverse-mode differentiation over `f64` tensors.
//!
//! Forward operations are recorded on a [`Tape`]; [`Tape::backward`] walks the
//! record in reverse and returns a [`GradientStore`] aligned with the
//! [`ParamStore`] the tape borrowed. Shapes never broadcast: every operand
//! must conform exactly (the bias row of [`Tape::linear`] is part of that
//! operation's definition, not a broadcast).

mod gradcheck;
mod kernels;
mod params;
mod tape;
mod tensor;

pub use gradcheck::{grad_check, grad_check_with, GradCheckConfig, GradCheckReport, TensorCheck};
pub use params::{GradientStore, ParamId, ParamStore};
pub use tape::{Primitive, Tape, Var};
pub use tensor::Tensor;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AutodiffError {
    #[error("dimension mismatch in {op}: {lhs:?} vs {rhs:?}")]
    Shape {
        op: &'static str,
        lhs: Vec<usize>,
        rhs: Vec<usize>,
    },
    #[error("data length {len} does not match shape {shape:?}")]
    Length { shape: Vec<usize>, len: usize },
    #[error("shape {0:?} has a zero extent")]
    ZeroExtent(Vec<usize>),
    #[error("{0} needs at least one operand")]
    Empty(&'static str),
    #[error("backward needs a scalar loss, got shape {0:?}")]
    NonScalarLoss(Vec<usize>),
}
