//! Minimal deterministic neural-network engine: the layer kinds needed by
//! the autoencoder families, MSE loss, Adam, gradient verification and a
//! binary checkpoint format. No GPU, no general autodiff graph — each
//! layer kind carries its own forward/backward pair.

mod adam;
mod checkpoint;
mod gradcheck;
mod layer;
mod loss;
pub(crate) mod matmul;
mod network;
mod scalar;
mod tensor;

use thiserror::Error;

pub use adam::AdamState;
pub use checkpoint::{CheckpointError, NETWORK_FORMAT_VERSION, NETWORK_MAGIC};
pub use gradcheck::{grad_check, input_grad_check};
pub use layer::{
    conv_out_len, same_padding, tconv_out_len, BatchNorm1d, Conv1d, Dense, LRelu, Layer, Mode, TConv1d,
};
pub use loss::{mse_loss, per_sample_mse};
pub use network::{Gradients, Network, Tape};
pub use scalar::Scalar;
pub use tensor::Tensor;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape mismatch at layer {layer} ({kind}): {detail}")]
    Shape {
        layer: usize,
        kind: &'static str,
        detail: String,
    },
    #[error("gradient tape does not match this network: {0}")]
    TapeMismatch(String),
    #[error("backward requires a tape recorded in train mode")]
    EvalTape,
    #[error("parameter mismatch: {0}")]
    ParamMismatch(String),
}
