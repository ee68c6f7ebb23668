//! Adversarially trained dense autoencoder pair with a shared encoder.
//!
//! Epoch `n` (1-based) weights the two objectives as
//!
//! ```text
//! L_AE1 = (1/n)·mse(W, AE1(W)) + (1 - 1/n)·mse(W, AE2(AE1(W)))
//! L_AE2 = (1/n)·mse(W, AE2(W)) - (1 - 1/n)·mse(W, AE2(AE1(W)))
//! ```
//!
//! with `AE1 = D1∘E`, `AE2 = D2∘E`. Each epoch runs two phases: a full
//! sweep optimising (E, D1) under `L_AE1`, then a full sweep optimising
//! (E, D2) under `L_AE2`. At `n = 1` the adversarial weight is exactly
//! zero and phase one is plain reconstruction training.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autoencoders::train::{batch_order, gather_rows, TrainError};
use crate::autoencoders::LRELU_SLOPE;
use crate::nn::{mse_loss, AdamState, Dense, Gradients, LRelu, Layer, Mode, Network, NnError, Scalar, Tensor};

/// Hyperparameters of the USAD-style family. `latent_dim`/`hidden_dim`
/// default to `max(5, in/8)` and `in/2` for an input of `window ×
/// n_group_features` flattened values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UsadSpec {
    pub window: usize,
    pub latent_dim: Option<usize>,
    pub hidden_dim: Option<usize>,
    pub lr: f64,
    /// Score weight on `mse(W, AE1(W))`.
    pub score_alpha: f64,
    /// Score weight on `mse(W, AE2(AE1(W)))`.
    pub score_beta: f64,
}

impl Default for UsadSpec {
    fn default() -> Self {
        UsadSpec {
            window: 12,
            latent_dim: None,
            hidden_dim: None,
            lr: 0.001,
            score_alpha: 0.5,
            score_beta: 0.5,
        }
    }
}

impl UsadSpec {
    pub fn resolved_dims(&self, n_group_features: usize) -> (usize, usize, usize) {
        let input = self.window * n_group_features;
        let hidden = self.hidden_dim.unwrap_or((input / 2).max(1));
        let latent = self.latent_dim.unwrap_or((input / 8).max(5));
        (input, hidden, latent)
    }
}

/// Shared encoder and the two decoders. The decoders have identical
/// shapes and both compose with the encoder.
#[derive(Debug, Clone)]
pub struct UsadNets<T> {
    pub encoder: Network<T>,
    pub decoder1: Network<T>,
    pub decoder2: Network<T>,
}

impl<T: Scalar> UsadNets<T> {
    /// `D1∘E` as a single network (the plain-reconstruction view of AE1).
    pub fn ae1_network(&self) -> Result<Network<T>, NnError> {
        Network::composed(&self.encoder, &self.decoder1)
    }
}

fn dense_stack<T: Scalar>(dims: &[usize], final_activation: bool, rng: &mut impl Rng) -> Result<Network<T>, NnError> {
    let mut layers = Vec::new();
    for (i, pair) in dims.windows(2).enumerate() {
        layers.push(Layer::Dense(Dense::new(pair[0], pair[1], rng)));
        if i + 2 < dims.len() || final_activation {
            layers.push(Layer::LRelu(LRelu::new(LRELU_SLOPE)));
        }
    }
    Network::new(layers, vec![dims[0]])
}

/// Build encoder `in → hidden → latent` and two mirrored decoders
/// `latent → hidden → in`, drawing all parameters from one stream in
/// encoder, decoder1, decoder2 order.
pub fn build_usad<T: Scalar>(
    spec: &UsadSpec,
    n_group_features: usize,
    rng: &mut impl Rng,
) -> Result<UsadNets<T>, NnError> {
    let (input, hidden, latent) = spec.resolved_dims(n_group_features);
    let encoder = dense_stack(&[input, hidden, latent], true, rng)?;
    let decoder1 = dense_stack(&[latent, hidden, input], false, rng)?;
    let decoder2 = dense_stack(&[latent, hidden, input], false, rng)?;
    Ok(UsadNets {
        encoder,
        decoder1,
        decoder2,
    })
}

/// Per-epoch mean training losses of the two objectives.
#[derive(Debug, Clone, PartialEq)]
pub struct UsadHistory {
    pub ae1: Vec<f64>,
    pub ae2: Vec<f64>,
}

/// `(1/n, 1 - 1/n)` for a 1-based epoch number.
pub fn usad_phase_weights(epoch_number: usize) -> (f64, f64) {
    let n = epoch_number as f64;
    (1.0 / n, 1.0 - 1.0 / n)
}

fn scaled<T: Scalar>(t: &Tensor<T>, f: f64) -> Tensor<T> {
    let factor = T::from_f64(f);
    t.map(|v| v * factor)
}

fn apply_two<T: Scalar>(
    a: &mut Network<T>,
    b: &mut Network<T>,
    adam: &mut AdamState<T>,
    ga: &Gradients<T>,
    gb: &Gradients<T>,
) -> Result<(), NnError> {
    let mut params: Vec<&mut Tensor<T>> = a.params_mut();
    params.extend(b.params_mut());
    let grads: Vec<&Tensor<T>> = ga.params.iter().chain(gb.params.iter()).collect();
    adam.apply(&mut params, &grads)
}

/// Two-phase adversarial training; deterministic for a fixed seed.
pub fn train_usad<T: Scalar>(
    nets: &mut UsadNets<T>,
    flat_windows: &Tensor<T>,
    epochs: usize,
    lr: f64,
    batch_size: usize,
    seed: u64,
) -> Result<UsadHistory, TrainError> {
    let n = flat_windows.batch();
    if n == 0 {
        return Err(TrainError::EmptyBatch);
    }
    if epochs == 0 {
        return Err(TrainError::Invalid("usad training needs at least one epoch".into()));
    }

    let enc_shapes: Vec<&Tensor<T>> = nets.encoder.params();
    let mut adam1 = {
        let mut p = enc_shapes.clone();
        p.extend(nets.decoder1.params());
        AdamState::for_params(&p, lr)
    };
    let mut adam2 = {
        let mut p = nets.encoder.params();
        p.extend(nets.decoder2.params());
        AdamState::for_params(&p, lr)
    };

    let mut history = UsadHistory {
        ae1: Vec::with_capacity(epochs),
        ae2: Vec::with_capacity(epochs),
    };

    for epoch in 0..epochs {
        let (w_rec, w_adv) = usad_phase_weights(epoch + 1);
        let order = batch_order(seed, epoch, n);

        // Phase one: optimise (E, D1) under L_AE1.
        let mut loss1_sum = 0.0f64;
        for (batch_idx, chunk) in order.chunks(batch_size).enumerate() {
            let xb = gather_rows(flat_windows, chunk);
            let (z, tape_e) = nets.encoder.forward(&xb, Mode::Train)?;
            let (w1, tape_d1) = nets.decoder1.forward(&z, Mode::Train)?;
            let loss1;
            let (mut ge, gd1);
            if w_adv == 0.0 {
                let (l, g) = mse_loss(&w1, &xb)?;
                loss1 = l;
                gd1 = nets.decoder1.backward(&tape_d1, &g)?;
                ge = nets.encoder.backward(&tape_e, &gd1.input)?;
            } else {
                let (z2, tape_e2) = nets.encoder.forward(&w1, Mode::Train)?;
                let (w3, tape_d2) = nets.decoder2.forward(&z2, Mode::Train)?;
                let (l_rec, g_rec) = mse_loss(&w1, &xb)?;
                let (l_adv, g_adv) = mse_loss(&w3, &xb)?;
                loss1 = w_rec * l_rec + w_adv * l_adv;
                // Adversarial path: gradients flow through D2 and the
                // second encoder application back to w1; D2's own
                // parameter gradients are discarded here.
                let gd2 = nets.decoder2.backward(&tape_d2, &scaled(&g_adv, w_adv))?;
                let ge2 = nets.encoder.backward(&tape_e2, &gd2.input)?;
                let mut g_w1 = scaled(&g_rec, w_rec);
                g_w1.add_assign(&ge2.input);
                gd1 = nets.decoder1.backward(&tape_d1, &g_w1)?;
                ge = nets.encoder.backward(&tape_e, &gd1.input)?;
                ge.add(&ge2);
            }
            if !loss1.is_finite() {
                return Err(TrainError::NonFiniteLoss { epoch, batch: batch_idx });
            }
            nets.encoder.commit_batchnorm(&tape_e);
            nets.decoder1.commit_batchnorm(&tape_d1);
            apply_two(&mut nets.encoder, &mut nets.decoder1, &mut adam1, &ge, &gd1)?;
            loss1_sum += loss1 * chunk.len() as f64;
        }
        history.ae1.push(loss1_sum / n as f64);

        // Phase two: optimise (E, D2) under L_AE2.
        let mut loss2_sum = 0.0f64;
        for (batch_idx, chunk) in order.chunks(batch_size).enumerate() {
            let xb = gather_rows(flat_windows, chunk);
            let (z, tape_e) = nets.encoder.forward(&xb, Mode::Train)?;
            let (w2, tape_d2a) = nets.decoder2.forward(&z, Mode::Train)?;
            let loss2;
            let (ge, gd2);
            if w_adv == 0.0 {
                let (l, g) = mse_loss(&w2, &xb)?;
                loss2 = l;
                gd2 = nets.decoder2.backward(&tape_d2a, &g)?;
                ge = nets.encoder.backward(&tape_e, &gd2.input)?;
            } else {
                let (w1, tape_d1) = nets.decoder1.forward(&z, Mode::Train)?;
                let (z2, tape_e2) = nets.encoder.forward(&w1, Mode::Train)?;
                let (w3, tape_d2b) = nets.decoder2.forward(&z2, Mode::Train)?;
                let (l_rec, g_rec) = mse_loss(&w2, &xb)?;
                let (l_adv, g_adv) = mse_loss(&w3, &xb)?;
                loss2 = w_rec * l_rec - w_adv * l_adv;
                // Direct path through w2.
                let mut gd2_total = nets.decoder2.backward(&tape_d2a, &scaled(&g_rec, w_rec))?;
                // Adversarial path through w3; D1 passes gradients but its
                // own parameters are not updated in this phase.
                let gd2_adv = nets.decoder2.backward(&tape_d2b, &scaled(&g_adv, -w_adv))?;
                let ge2 = nets.encoder.backward(&tape_e2, &gd2_adv.input)?;
                let gd1 = nets.decoder1.backward(&tape_d1, &ge2.input)?;
                let mut g_z = gd2_total.input.clone();
                g_z.add_assign(&gd1.input);
                let mut ge_total = nets.encoder.backward(&tape_e, &g_z)?;
                ge_total.add(&ge2);
                gd2_total.add(&gd2_adv);
                ge = ge_total;
                gd2 = gd2_total;
            }
            if !loss2.is_finite() {
                return Err(TrainError::NonFiniteLoss { epoch, batch: batch_idx });
            }
            nets.encoder.commit_batchnorm(&tape_e);
            nets.decoder2.commit_batchnorm(&tape_d2a);
            apply_two(&mut nets.encoder, &mut nets.decoder2, &mut adam2, &ge, &gd2)?;
            loss2_sum += loss2 * chunk.len() as f64;
        }
        history.ae2.push(loss2_sum / n as f64);
    }
    Ok(history)
}

/// Per-window anomaly score `alpha·mse(W, AE1(W)) + beta·mse(W, AE2(AE1(W)))`
/// in eval mode.
pub fn usad_window_scores<T: Scalar>(
    nets: &UsadNets<T>,
    flat_windows: &Tensor<T>,
    alpha: f64,
    beta: f64,
) -> Result<Vec<f64>, TrainError> {
    let n = flat_windows.batch();
    let mut scores = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let end = (start + super::train::EVAL_CHUNK).min(n);
        let idx: Vec<usize> = (start..end).collect();
        let xb = gather_rows(flat_windows, &idx);
        let (z, _) = nets.encoder.forward(&xb, Mode::Eval)?;
        let (w1, _) = nets.decoder1.forward(&z, Mode::Eval)?;
        let (z2, _) = nets.encoder.forward(&w1, Mode::Eval)?;
        let (w3, _) = nets.decoder2.forward(&z2, Mode::Eval)?;
        let rec = crate::nn::per_sample_mse(&w1, &xb)?;
        let adv = crate::nn::per_sample_mse(&w3, &xb)?;
        scores.extend(rec.iter().zip(adv.iter()).map(|(&r, &a)| alpha * r + beta * a));
        start = end;
    }
    Ok(scores)
}
