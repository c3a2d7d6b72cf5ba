//! Float64 numerical kernels: dense matrices, softmax, multi-head
//! cross-attention with analytic gradients, bilinear sampling, 2-D
//! convolution and the segmentation/regression losses.

pub mod attention;
pub mod conv;
pub mod loss;
pub mod matrix;
pub mod sampling;
pub mod softmax;

use thiserror::Error;

pub use attention::{
    cross_attention_backward, cross_attention_forward, cross_attention_forward_cached, AttentionCache,
    AttentionConfig, AttentionGrads, AttentionWeights,
};
pub use conv::{conv2d_forward, Kernels, Tensor3};
pub use loss::{
    bce_grad, bce_loss, combined_seg_loss, combined_seg_loss_grad, dice_grad, dice_loss, smooth_l1,
    smooth_l1_grad, LossWeights,
};
pub use matrix::Matrix;
pub use sampling::{bilinear_at, bilinear_sample};
pub use softmax::{softmax, softmax_backward};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("{0} must not be empty")]
    Empty(&'static str),
    #[error("shape mismatch for {name}: expected {expected}, got {got}")]
    Shape {
        name: String,
        expected: String,
        got: String,
    },
    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub(crate) fn shape_err(name: impl Into<String>, expected: impl ToString, got: impl ToString) -> KernelError {
    KernelError::Shape {
        name: name.into(),
        expected: expected.to_string(),
        got: got.to_string(),
    }
}
