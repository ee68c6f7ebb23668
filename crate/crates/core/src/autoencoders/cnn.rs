use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autoencoders::{BN_EPSILON, BN_MOMENTUM, LRELU_SLOPE};
use crate::nn::{same_padding, BatchNorm1d, Conv1d, LRelu, Layer, Network, NnError, Scalar, TConv1d};

/// Hyperparameters of the 1D-convolutional autoencoder family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CnnAeSpec {
    pub window: usize,
    pub kernel_sizes: [usize; 3],
    pub filters: [usize; 3],
    pub lr: f64,
}

impl Default for CnnAeSpec {
    fn default() -> Self {
        CnnAeSpec {
            window: 4,
            kernel_sizes: [8, 6, 4],
            filters: [64, 128, 256],
            lr: 0.01,
        }
    }
}

/// Three strided-by-one conv stages (conv → lrelu → batchnorm) and a
/// mirrored transposed-conv decoder. Same-padding keeps every stage at
/// the window length, so the output shape always equals the input shape
/// `[window, n_features]`.
pub fn build_cnn_ae<T: Scalar>(
    spec: &CnnAeSpec,
    n_features: usize,
    rng: &mut impl Rng,
) -> Result<Network<T>, NnError> {
    assert!(n_features >= 1);
    let [k1, k2, k3] = spec.kernel_sizes;
    let [f1, f2, f3] = spec.filters;
    let layers = vec![
        Layer::Conv1d(Conv1d::new(k1, n_features, f1, 1, same_padding(k1), rng)),
        Layer::LRelu(LRelu::new(LRELU_SLOPE)),
        Layer::BatchNorm1d(BatchNorm1d::new(f1, BN_EPSILON, BN_MOMENTUM)),
        Layer::Conv1d(Conv1d::new(k2, f1, f2, 1, same_padding(k2), rng)),
        Layer::LRelu(LRelu::new(LRELU_SLOPE)),
        Layer::BatchNorm1d(BatchNorm1d::new(f2, BN_EPSILON, BN_MOMENTUM)),
        Layer::Conv1d(Conv1d::new(k3, f2, f3, 1, same_padding(k3), rng)),
        Layer::LRelu(LRelu::new(LRELU_SLOPE)),
        Layer::BatchNorm1d(BatchNorm1d::new(f3, BN_EPSILON, BN_MOMENTUM)),
        Layer::TConv1d(TConv1d::new(k3, f3, f2, 1, same_padding(k3), rng)),
        Layer::LRelu(LRelu::new(LRELU_SLOPE)),
        Layer::BatchNorm1d(BatchNorm1d::new(f2, BN_EPSILON, BN_MOMENTUM)),
        Layer::TConv1d(TConv1d::new(k2, f2, f1, 1, same_padding(k2), rng)),
        Layer::LRelu(LRelu::new(LRELU_SLOPE)),
        Layer::BatchNorm1d(BatchNorm1d::new(f1, BN_EPSILON, BN_MOMENTUM)),
        Layer::TConv1d(TConv1d::new(k1, f1, n_features, 1, same_padding(k1), rng)),
    ];
    Network::new(layers, vec![spec.window, n_features])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Mode, Tensor};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn default_spec_maps_window_to_itself() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = build_cnn_ae::<f64>(&CnnAeSpec::default(), 5, &mut rng).unwrap();
        assert_eq!(net.input_shape(), &[4, 5]);
        assert_eq!(net.output_shape(), &[4, 5]);
    }

    #[test]
    fn untrained_output_shape_matches_input_for_random_batches() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let spec = CnnAeSpec {
            window: 6,
            ..CnnAeSpec::default()
        };
        let net = build_cnn_ae::<f64>(&spec, 3, &mut rng).unwrap();
        for batch in [1usize, 2, 7] {
            let x = Tensor::from_vec(
                &[batch, 6, 3],
                (0..batch * 18).map(|i| (i as f64 * 0.17).sin()).collect(),
            );
            let (y, _) = net.forward(&x, Mode::Eval).unwrap();
            assert_eq!(y.shape(), x.shape());
        }
    }

    #[test]
    fn parameter_count_is_pinned_for_default_spec() {
        // conv: k*cin*cout + cout, batchnorm: 2*ch, mirrored decoder.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = build_cnn_ae::<f64>(&CnnAeSpec::default(), 5, &mut rng).unwrap();
        let expected = (8 * 5 * 64 + 64)
            + 2 * 64
            + (6 * 64 * 128 + 128)
            + 2 * 128
            + (4 * 128 * 256 + 256)
            + 2 * 256
            + (4 * 256 * 128 + 128)
            + 2 * 128
            + (6 * 128 * 64 + 64)
            + 2 * 64
            + (8 * 64 * 5 + 5);
        assert_eq!(expected, 367_493);
        assert_eq!(net.param_count(), expected);
    }
}
