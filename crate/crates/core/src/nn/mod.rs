//! Dense tensor kernels: patch pooling, a fully connected layer, same-padded
//! convolutions, the channel-attention refinement block, the blended
//! auxiliary loss and the mIoU metric.
//!
//! Everything here is plain loops over `f64` buffers. Feature maps in this
//! project are small enough that nothing smarter is needed.

mod conv;
mod dense;
mod loss;
mod miou;
mod tensor;

pub use conv::{attention_refine, conv2d, AttentionParams, ConvKernel};
pub use dense::{dense_forward, Activation, DenseLayer};
pub use loss::{binary_cross_entropy, combined_loss};
pub use miou::{confusion_matrix, miou};
pub use tensor::{flatten_features, gap, patchify, Image, PatchGrid};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NnError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("unsupported kernel size {0} (expected 1 or 3)")]
    KernelSize(usize),
    #[error("{name} = {value} outside [0, 1]")]
    Domain { name: &'static str, value: f64 },
}

pub(crate) fn shape_err<T>(msg: impl Into<String>) -> Result<T, NnError> {
    Err(NnError::Shape(msg.into()))
}
