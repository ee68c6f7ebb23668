//! Finite-difference verification of every layer kind, in 64-bit mode,
//! across randomised shapes and seeds.

use evoad::nn::{
    grad_check, input_grad_check, same_padding, BatchNorm1d, Conv1d, Dense, LRelu, Layer, Network,
    Tensor,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS: f64 = 1e-5;
const TOLERANCE: f64 = 1e-4;
const COMBOS: usize = 20;

fn random_tensor(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor<f64> {
    let n = shape.iter().product();
    Tensor::from_vec(shape, (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect())
}

fn check(net: &mut Network<f64>, rng: &mut ChaCha8Rng, label: &str) {
    let mut in_shape = vec![rng.gen_range(1..=4usize)];
    in_shape.extend_from_slice(net.input_shape());
    let mut out_shape = vec![in_shape[0]];
    out_shape.extend_from_slice(net.output_shape());
    let x = random_tensor(&in_shape, rng);
    let target = random_tensor(&out_shape, rng);
    let worst = grad_check(net, &x, &target, EPS).unwrap();
    assert!(worst < TOLERANCE, "{label}: max relative error {worst}");
    let worst_input = input_grad_check(net, &x, &target, EPS).unwrap();
    assert!(worst_input < TOLERANCE, "{label}: input gradient error {worst_input}");
}

#[test]
fn dense_gradients_match_finite_differences() {
    for seed in 0..COMBOS as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let inputs = rng.gen_range(1..=6usize);
        let outputs = rng.gen_range(1..=6usize);
        let mut net = Network::new(
            vec![Layer::Dense(Dense::new(inputs, outputs, &mut rng))],
            vec![inputs],
        )
        .unwrap();
        check(&mut net, &mut rng, &format!("dense {inputs}->{outputs} seed {seed}"));
    }
}

#[test]
fn conv1d_gradients_match_finite_differences() {
    for seed in 0..COMBOS as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
        let len = rng.gen_range(3..=8usize);
        let in_ch = rng.gen_range(1..=4usize);
        let out_ch = rng.gen_range(1..=4usize);
        let kernel = rng.gen_range(1..=6usize);
        // alternate between same padding at stride 1 and a strided case
        let (stride, pad) = if seed % 3 == 0 && len >= kernel {
            (2usize, (0usize, (len - kernel) % 2))
        } else {
            (1, same_padding(kernel))
        };
        let mut net = Network::new(
            vec![Layer::Conv1d(Conv1d::new(kernel, in_ch, out_ch, stride, pad, &mut rng))],
            vec![len, in_ch],
        )
        .unwrap();
        check(
            &mut net,
            &mut rng,
            &format!("conv1d len {len} k {kernel} s {stride} seed {seed}"),
        );
    }
}

#[test]
fn transposed_conv1d_gradients_match_finite_differences() {
    for seed in 0..COMBOS as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(3000 + seed);
        let len = rng.gen_range(2..=7usize);
        let in_ch = rng.gen_range(1..=4usize);
        let out_ch = rng.gen_range(1..=4usize);
        let kernel = rng.gen_range(1..=5usize);
        let stride = if seed % 4 == 0 { 2 } else { 1 };
        let pad = if stride == 1 { same_padding(kernel) } else { (0, 0) };
        let mut net = Network::new(
            vec![Layer::TConv1d(evoad::nn::TConv1d::new(
                kernel, in_ch, out_ch, stride, pad, &mut rng,
            ))],
            vec![len, in_ch],
        )
        .unwrap();
        check(
            &mut net,
            &mut rng,
            &format!("tconv1d len {len} k {kernel} s {stride} seed {seed}"),
        );
    }
}

#[test]
fn batchnorm_train_mode_gradients_match_finite_differences() {
    for seed in 0..COMBOS as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(4000 + seed);
        let len = rng.gen_range(2..=6usize);
        let ch = rng.gen_range(1..=5usize);
        let mut net = Network::new(
            vec![Layer::BatchNorm1d(BatchNorm1d::new(ch, 1e-5, 0.1))],
            vec![len, ch],
        )
        .unwrap();
        check(&mut net, &mut rng, &format!("batchnorm len {len} ch {ch} seed {seed}"));
    }
}

#[test]
fn lrelu_gradients_match_finite_differences() {
    // lrelu has no parameters of its own; drive it between dense layers
    // so both the parameter path and the input path cross it.
    for seed in 0..COMBOS as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + seed);
        let inputs = rng.gen_range(1..=5usize);
        let hidden = rng.gen_range(1..=6usize);
        let mut net = Network::new(
            vec![
                Layer::Dense(Dense::new(inputs, hidden, &mut rng)),
                Layer::LRelu(LRelu::new(0.01)),
                Layer::Dense(Dense::new(hidden, inputs, &mut rng)),
            ],
            vec![inputs],
        )
        .unwrap();
        check(&mut net, &mut rng, &format!("dense+lrelu {inputs}/{hidden} seed {seed}"));
    }
}

/// The full convolutional stack, kinds combined the way the autoencoder
/// composes them.
#[test]
fn conv_bn_tconv_stack_passes_grad_check() {
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(6000 + seed);
        let mut net = Network::new(
            vec![
                Layer::Conv1d(Conv1d::new(3, 2, 4, 1, same_padding(3), &mut rng)),
                Layer::LRelu(LRelu::new(0.01)),
                Layer::BatchNorm1d(BatchNorm1d::new(4, 1e-5, 0.1)),
                Layer::TConv1d(evoad::nn::TConv1d::new(3, 4, 2, 1, same_padding(3), &mut rng)),
            ],
            vec![5, 2],
        )
        .unwrap();
        check(&mut net, &mut rng, &format!("conv stack seed {seed}"));
    }
}
