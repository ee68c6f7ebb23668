//! Self-describing binary model container.
//!
//! Layout: magic `EVNW`, little-endian `u32` format version, `u64` JSON
//! header length, the header itself (layer kinds, hyperparameters and
//! shapes), then all parameter tensors as raw little-endian `f32`, in
//! layer order. Loading then saving reproduces the bytes exactly.

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::layer::{BatchNorm1d, Conv1d, Dense, LRelu, Layer, TConv1d};
use super::network::Network;
use super::scalar::Scalar;
use super::tensor::Tensor;
use super::NnError;

pub const NETWORK_MAGIC: &[u8; 4] = b"EVNW";
pub const NETWORK_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("not a network checkpoint (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint format version {0}")]
    BadVersion(u32),
    #[error("malformed checkpoint header: {0}")]
    Header(#[from] serde_json::Error),
    #[error("checkpoint is inconsistent: {0}")]
    Invalid(String),
}

impl From<NnError> for CheckpointError {
    fn from(e: NnError) -> Self {
        CheckpointError::Invalid(e.to_string())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct NetworkHeader {
    input_shape: Vec<usize>,
    layers: Vec<LayerHeader>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum LayerHeader {
    Dense {
        inputs: usize,
        outputs: usize,
    },
    Conv1d {
        kernel: usize,
        in_ch: usize,
        out_ch: usize,
        stride: usize,
        pad_left: usize,
        pad_right: usize,
    },
    TransposedConv1d {
        kernel: usize,
        in_ch: usize,
        out_ch: usize,
        stride: usize,
        pad_left: usize,
        pad_right: usize,
    },
    Batchnorm1d {
        channels: usize,
        epsilon: f64,
        momentum: f64,
    },
    Lrelu {
        slope: f64,
    },
}

/// Parameter and state tensors of a layer, in serialisation order.
fn state_tensors<T: Scalar>(layer: &Layer<T>) -> Vec<&Tensor<T>> {
    match layer {
        Layer::Dense(l) => vec![&l.w, &l.b],
        Layer::Conv1d(l) => vec![&l.w, &l.b],
        Layer::TConv1d(l) => vec![&l.w, &l.b],
        Layer::BatchNorm1d(l) => vec![&l.gamma, &l.beta, &l.running_mean, &l.running_var],
        Layer::LRelu(_) => Vec::new(),
    }
}

fn state_tensors_mut<T: Scalar>(layer: &mut Layer<T>) -> Vec<&mut Tensor<T>> {
    match layer {
        Layer::Dense(l) => vec![&mut l.w, &mut l.b],
        Layer::Conv1d(l) => vec![&mut l.w, &mut l.b],
        Layer::TConv1d(l) => vec![&mut l.w, &mut l.b],
        Layer::BatchNorm1d(l) => vec![&mut l.gamma, &mut l.beta, &mut l.running_mean, &mut l.running_var],
        Layer::LRelu(_) => Vec::new(),
    }
}

fn header_of<T: Scalar>(net: &Network<T>) -> NetworkHeader {
    let layers = net
        .layers()
        .iter()
        .map(|layer| match layer {
            Layer::Dense(l) => LayerHeader::Dense {
                inputs: l.inputs(),
                outputs: l.outputs(),
            },
            Layer::Conv1d(l) => LayerHeader::Conv1d {
                kernel: l.kernel(),
                in_ch: l.in_ch(),
                out_ch: l.out_ch(),
                stride: l.stride,
                pad_left: l.pad.0,
                pad_right: l.pad.1,
            },
            Layer::TConv1d(l) => LayerHeader::TransposedConv1d {
                kernel: l.kernel(),
                in_ch: l.in_ch(),
                out_ch: l.out_ch(),
                stride: l.stride,
                pad_left: l.pad.0,
                pad_right: l.pad.1,
            },
            Layer::BatchNorm1d(l) => LayerHeader::Batchnorm1d {
                channels: l.channels(),
                epsilon: l.epsilon,
                momentum: l.momentum,
            },
            Layer::LRelu(l) => LayerHeader::Lrelu { slope: l.slope },
        })
        .collect();
    NetworkHeader {
        input_shape: net.input_shape().to_vec(),
        layers,
    }
}

fn build_layer<T: Scalar>(header: &LayerHeader) -> Layer<T> {
    match *header {
        LayerHeader::Dense { inputs, outputs } => Layer::Dense(Dense {
            w: Tensor::zeros(&[inputs, outputs]),
            b: Tensor::zeros(&[outputs]),
        }),
        LayerHeader::Conv1d {
            kernel,
            in_ch,
            out_ch,
            stride,
            pad_left,
            pad_right,
        } => Layer::Conv1d(Conv1d {
            w: Tensor::zeros(&[kernel, in_ch, out_ch]),
            b: Tensor::zeros(&[out_ch]),
            stride,
            pad: (pad_left, pad_right),
        }),
        LayerHeader::TransposedConv1d {
            kernel,
            in_ch,
            out_ch,
            stride,
            pad_left,
            pad_right,
        } => Layer::TConv1d(TConv1d {
            w: Tensor::zeros(&[in_ch, kernel, out_ch]),
            b: Tensor::zeros(&[out_ch]),
            stride,
            pad: (pad_left, pad_right),
        }),
        LayerHeader::Batchnorm1d {
            channels,
            epsilon,
            momentum,
        } => Layer::BatchNorm1d(BatchNorm1d {
            gamma: Tensor::zeros(&[channels]),
            beta: Tensor::zeros(&[channels]),
            running_mean: Tensor::zeros(&[channels]),
            running_var: Tensor::zeros(&[channels]),
            epsilon,
            momentum,
        }),
        LayerHeader::Lrelu { slope } => Layer::LRelu(LRelu { slope }),
    }
}

impl<T: Scalar> Network<T> {
    /// Serialise the network; parameters are stored as little-endian `f32`.
    pub fn write_to(&self, w: &mut dyn Write) -> io::Result<()> {
        let header = serde_json::to_vec(&header_of(self)).expect("network header serialises");
        w.write_all(NETWORK_MAGIC)?;
        w.write_all(&NETWORK_FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(header.len() as u64).to_le_bytes())?;
        w.write_all(&header)?;
        for layer in self.layers() {
            for tensor in state_tensors(layer) {
                for v in tensor.data() {
                    w.write_all(&(v.to_f64() as f32).to_le_bytes())?;
                }
            }
        }
        Ok(())
    }

    pub fn read_from(r: &mut dyn Read) -> Result<Network<T>, CheckpointError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != NETWORK_MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let mut word = [0u8; 4];
        r.read_exact(&mut word)?;
        let version = u32::from_le_bytes(word);
        if version != NETWORK_FORMAT_VERSION {
            return Err(CheckpointError::BadVersion(version));
        }
        let mut len = [0u8; 8];
        r.read_exact(&mut len)?;
        let header_len = u64::from_le_bytes(len) as usize;
        let mut header_bytes = vec![0u8; header_len];
        r.read_exact(&mut header_bytes)?;
        let header: NetworkHeader = serde_json::from_slice(&header_bytes)?;

        let mut layers: Vec<Layer<T>> = header.layers.iter().map(build_layer).collect();
        for layer in layers.iter_mut() {
            for tensor in state_tensors_mut(layer) {
                let mut buf = vec![0u8; tensor.len() * 4];
                r.read_exact(&mut buf)?;
                for (v, bytes) in tensor.data_mut().iter_mut().zip(buf.chunks_exact(4)) {
                    *v = T::from_f64(f32::from_le_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]) as f64);
                }
            }
        }
        Ok(Network::new(layers, header.input_shape)?)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to Vec cannot fail");
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Network<T>, CheckpointError> {
        let mut cursor = bytes;
        Network::read_from(&mut cursor)
    }
}
