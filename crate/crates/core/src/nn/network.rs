use super::layer::{Layer, LayerCache, Mode};
use super::scalar::Scalar;
use super::tensor::Tensor;
use super::NnError;

/// An ordered stack of layers with a fixed per-sample input shape.
///
/// Networks are immutable during inference; training mutates parameters
/// through [`Network::params_mut`] and batchnorm running statistics only
/// through an explicit [`Network::commit_batchnorm`].
#[derive(Debug, Clone)]
pub struct Network<T> {
    layers: Vec<Layer<T>>,
    input_shape: Vec<usize>,
    output_shape: Vec<usize>,
}

/// Activation record produced by [`Network::forward`], consumed by
/// [`Network::backward`] and [`Network::commit_batchnorm`].
#[derive(Debug)]
pub struct Tape<T> {
    mode: Mode,
    caches: Vec<LayerCache<T>>,
    output_shape: Vec<usize>,
}

impl<T> Tape<T> {
    pub fn mode(&self) -> Mode {
        self.mode
    }
}

/// Parameter gradients in [`Network::params`] order plus the gradient
/// with respect to the network input.
#[derive(Debug)]
pub struct Gradients<T> {
    pub params: Vec<Tensor<T>>,
    pub input: Tensor<T>,
}

impl<T: Scalar> Gradients<T> {
    /// Elementwise sum with another gradient set of the same structure.
    pub fn add(&mut self, other: &Gradients<T>) {
        assert_eq!(self.params.len(), other.params.len());
        for (a, b) in self.params.iter_mut().zip(other.params.iter()) {
            a.add_assign(b);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        let f = T::from_f64(factor);
        for p in self.params.iter_mut() {
            for v in p.data_mut() {
                *v = *v * f;
            }
        }
        for v in self.input.data_mut() {
            *v = *v * f;
        }
    }
}

impl<T: Scalar> Network<T> {
    /// Build a network, verifying that adjacent layer shapes compose.
    pub fn new(layers: Vec<Layer<T>>, input_shape: Vec<usize>) -> Result<Self, NnError> {
        let mut shape = input_shape.clone();
        for (i, layer) in layers.iter().enumerate() {
            shape = layer.out_shape(&shape).map_err(|detail| NnError::Shape {
                layer: i,
                kind: layer.kind_name(),
                detail,
            })?;
        }
        Ok(Network {
            layers,
            input_shape,
            output_shape: shape,
        })
    }

    /// Concatenate two networks into one (used to compose encoder and
    /// decoder stacks).
    pub fn composed(a: &Network<T>, b: &Network<T>) -> Result<Self, NnError> {
        let mut layers = a.layers.clone();
        layers.extend(b.layers.iter().cloned());
        Network::new(layers, a.input_shape.clone())
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    pub fn output_shape(&self) -> &[usize] {
        &self.output_shape
    }

    pub fn params(&self) -> Vec<&Tensor<T>> {
        self.layers.iter().flat_map(|l| l.params()).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor<T>> {
        self.layers.iter_mut().flat_map(|l| l.params_mut()).collect()
    }

    /// Number of trainable parameter elements.
    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    /// Run the stack on a batch whose trailing shape matches
    /// `input_shape`. Never mutates the network.
    pub fn forward(&self, x: &Tensor<T>, mode: Mode) -> Result<(Tensor<T>, Tape<T>), NnError> {
        if x.sample_shape() != self.input_shape.as_slice() || x.shape().len() != self.input_shape.len() + 1 {
            return Err(NnError::Shape {
                layer: 0,
                kind: "input",
                detail: format!(
                    "batch of trailing shape {:?} expected, got tensor {:?}",
                    self.input_shape,
                    x.shape()
                ),
            });
        }
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut cur = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            let (y, cache) = layer.forward(&cur, mode).map_err(|detail| NnError::Shape {
                layer: i,
                kind: layer.kind_name(),
                detail,
            })?;
            caches.push(cache);
            cur = y;
        }
        let output_shape = cur.shape().to_vec();
        Ok((cur, Tape { mode, caches, output_shape }))
    }

    /// Backpropagate `grad_out` through a train-mode tape, producing
    /// parameter gradients and the gradient with respect to the input.
    pub fn backward(&self, tape: &Tape<T>, grad_out: &Tensor<T>) -> Result<Gradients<T>, NnError> {
        if tape.mode != Mode::Train {
            return Err(NnError::EvalTape);
        }
        if tape.caches.len() != self.layers.len() {
            return Err(NnError::TapeMismatch(format!(
                "tape has {} layer records, network has {} layers",
                tape.caches.len(),
                self.layers.len()
            )));
        }
        if grad_out.shape() != tape.output_shape.as_slice() {
            return Err(NnError::TapeMismatch(format!(
                "output gradient shape {:?} does not match forward output {:?}",
                grad_out.shape(),
                tape.output_shape
            )));
        }
        let mut per_layer: Vec<Vec<Tensor<T>>> = Vec::with_capacity(self.layers.len());
        let mut grad = grad_out.clone();
        for (i, (layer, cache)) in self.layers.iter().zip(tape.caches.iter()).enumerate().rev() {
            let (dx, dparams) = layer.backward(cache, &grad).map_err(|detail| NnError::Shape {
                layer: i,
                kind: layer.kind_name(),
                detail,
            })?;
            per_layer.push(dparams);
            grad = dx;
        }
        per_layer.reverse();
        Ok(Gradients {
            params: per_layer.into_iter().flatten().collect(),
            input: grad,
        })
    }

    /// Fold the batch statistics recorded on a train-mode tape into the
    /// batchnorm running statistics. No-op for eval tapes.
    pub fn commit_batchnorm(&mut self, tape: &Tape<T>) {
        if tape.mode != Mode::Train || tape.caches.len() != self.layers.len() {
            return;
        }
        for (layer, cache) in self.layers.iter_mut().zip(tape.caches.iter()) {
            layer.commit(cache);
        }
    }
}
