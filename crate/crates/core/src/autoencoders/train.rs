use rand::seq::SliceRandom;
use thiserror::Error;

use crate::dataset::DatasetError;
use crate::nn::{mse_loss, AdamState, Mode, Network, NnError, Scalar, Tensor};
use crate::seeds;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training batch is empty")]
    EmptyBatch,
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("{0}")]
    Invalid(String),
}

/// Shuffled window order for one epoch; both trainers derive it the same
/// way so single-decoder USAD training walks the exact batches plain
/// reconstruction training would.
pub(crate) fn batch_order(seed: u64, epoch: usize, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seeds::rng(seed, "shuffle", &[epoch as u64]));
    order
}

pub(crate) fn gather_rows<T: Scalar>(data: &Tensor<T>, idx: &[usize]) -> Tensor<T> {
    let per: usize = data.sample_shape().iter().product();
    let mut out = Vec::with_capacity(idx.len() * per);
    for &i in idx {
        out.extend_from_slice(&data.data()[i * per..(i + 1) * per]);
    }
    let mut shape = vec![idx.len()];
    shape.extend_from_slice(data.sample_shape());
    Tensor::from_vec(&shape, out)
}

fn apply_step<T: Scalar>(
    net: &mut Network<T>,
    adam: &mut AdamState<T>,
    grads: &[Tensor<T>],
) -> Result<(), NnError> {
    let mut params = net.params_mut();
    let grad_refs: Vec<&Tensor<T>> = grads.iter().collect();
    adam.apply(&mut params, &grad_refs)
}

/// Minimise MSE reconstruction loss with Adam over shuffled minibatches.
/// Returns the mean training loss of each epoch; `epochs == 0` leaves
/// the network untouched. Deterministic for a fixed seed.
pub fn train_reconstruction<T: Scalar>(
    net: &mut Network<T>,
    windows: &Tensor<T>,
    epochs: usize,
    lr: f64,
    batch_size: usize,
    seed: u64,
) -> Result<Vec<f64>, TrainError> {
    let n = windows.batch();
    if n == 0 {
        return Err(TrainError::EmptyBatch);
    }
    assert!(batch_size >= 1);
    let mut adam = AdamState::for_params(&net.params(), lr);
    let mut history = Vec::with_capacity(epochs);
    for epoch in 0..epochs {
        let order = batch_order(seed, epoch, n);
        let mut loss_sum = 0.0f64;
        for (batch_idx, chunk) in order.chunks(batch_size).enumerate() {
            let xb = gather_rows(windows, chunk);
            let (y, tape) = net.forward(&xb, Mode::Train)?;
            let (loss, grad) = mse_loss(&y, &xb)?;
            if !loss.is_finite() {
                return Err(TrainError::NonFiniteLoss { epoch, batch: batch_idx });
            }
            let grads = net.backward(&tape, &grad)?;
            net.commit_batchnorm(&tape);
            apply_step(net, &mut adam, &grads.params)?;
            loss_sum += loss * chunk.len() as f64;
        }
        history.push(loss_sum / n as f64);
    }
    Ok(history)
}

/// Mean per-window reconstruction MSE in eval mode, chunked to bound
/// memory; chunking cannot change the result because every window score
/// is independent.
pub fn eval_reconstruction_loss<T: Scalar>(net: &Network<T>, windows: &Tensor<T>) -> Result<f64, TrainError> {
    let scores = reconstruction_window_scores(net, windows)?;
    if scores.is_empty() {
        return Err(TrainError::EmptyBatch);
    }
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

pub(crate) const EVAL_CHUNK: usize = 1024;

/// Per-window reconstruction MSE in eval mode.
pub fn reconstruction_window_scores<T: Scalar>(
    net: &Network<T>,
    windows: &Tensor<T>,
) -> Result<Vec<f64>, TrainError> {
    let n = windows.batch();
    let mut scores = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let end = (start + EVAL_CHUNK).min(n);
        let idx: Vec<usize> = (start..end).collect();
        let xb = gather_rows(windows, &idx);
        let (y, _) = net.forward(&xb, Mode::Eval)?;
        scores.extend(crate::nn::per_sample_mse(&y, &xb)?);
        start = end;
    }
    Ok(scores)
}
