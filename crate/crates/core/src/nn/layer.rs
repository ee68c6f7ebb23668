use rand::Rng;

use super::matmul::{matmul_acc, matmul_at_b_acc, transpose};
use super::scalar::Scalar;
use super::tensor::Tensor;

/// Forward-pass mode. Batch normalisation uses batch statistics in
/// `Train` and running statistics in `Eval`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Uniform fan-in initialisation bound.
fn init_limit(fan_in: usize) -> f64 {
    (6.0 / fan_in.max(1) as f64).sqrt()
}

fn sample_uniform<T: Scalar>(rng: &mut impl Rng, n: usize, limit: f64) -> Vec<T> {
    (0..n)
        .map(|_| T::from_f64((rng.gen::<f64>() * 2.0 - 1.0) * limit))
        .collect()
}

/// Symmetric-ish "same" padding: total `k - 1`, the extra cell on the right.
pub fn same_padding(kernel: usize) -> (usize, usize) {
    let left = (kernel - 1) / 2;
    (left, kernel - 1 - left)
}

/// Output length of a strided convolution over a padded input.
pub fn conv_out_len(input: usize, kernel: usize, stride: usize, pad: (usize, usize)) -> Option<usize> {
    let padded = input + pad.0 + pad.1;
    if padded < kernel || stride == 0 {
        return None;
    }
    Some((padded - kernel) / stride + 1)
}

/// Output length of a transposed convolution; inverts [`conv_out_len`]
/// whenever the forward arithmetic divided evenly.
pub fn tconv_out_len(input: usize, kernel: usize, stride: usize, pad: (usize, usize)) -> Option<usize> {
    if input == 0 || stride == 0 {
        return None;
    }
    let full = (input - 1) * stride + kernel;
    full.checked_sub(pad.0 + pad.1).filter(|&l| l > 0)
}

// ---------------------------------------------------------------------------
// Dense
// ---------------------------------------------------------------------------

/// Fully connected layer: `y = x·w + b` on `[batch, in]`.
#[derive(Debug, Clone)]
pub struct Dense<T> {
    pub w: Tensor<T>, // [in, out]
    pub b: Tensor<T>, // [out]
}

impl<T: Scalar> Dense<T> {
    pub fn new(inputs: usize, outputs: usize, rng: &mut impl Rng) -> Self {
        Dense {
            w: Tensor::from_vec(&[inputs, outputs], sample_uniform(rng, inputs * outputs, init_limit(inputs))),
            b: Tensor::zeros(&[outputs]),
        }
    }

    pub fn from_params(w: Tensor<T>, b: Tensor<T>) -> Self {
        assert_eq!(w.shape().len(), 2);
        assert_eq!(b.shape(), &[w.shape()[1]]);
        Dense { w, b }
    }

    pub fn inputs(&self) -> usize {
        self.w.shape()[0]
    }

    pub fn outputs(&self) -> usize {
        self.w.shape()[1]
    }

    fn forward(&self, x: &Tensor<T>) -> Result<(Tensor<T>, Tensor<T>), String> {
        if x.shape().len() != 2 || x.shape()[1] != self.inputs() {
            return Err(format!("expected [batch, {}], got {:?}", self.inputs(), x.shape()));
        }
        let (batch, n_in, n_out) = (x.shape()[0], self.inputs(), self.outputs());
        let mut y = Tensor::zeros(&[batch, n_out]);
        matmul_acc(x.data(), self.w.data(), batch, n_in, n_out, y.data_mut());
        for row in y.data_mut().chunks_exact_mut(n_out) {
            for (v, &bias) in row.iter_mut().zip(self.b.data()) {
                *v += bias;
            }
        }
        Ok((y, x.clone()))
    }

    fn backward(&self, x: &Tensor<T>, dy: &Tensor<T>) -> (Tensor<T>, Vec<Tensor<T>>) {
        let (batch, n_in, n_out) = (x.shape()[0], self.inputs(), self.outputs());
        let mut dw = Tensor::zeros(&[n_in, n_out]);
        matmul_at_b_acc(x.data(), dy.data(), batch, n_in, n_out, dw.data_mut());
        let mut db = Tensor::zeros(&[n_out]);
        for row in dy.data().chunks_exact(n_out) {
            for (g, &v) in db.data_mut().iter_mut().zip(row) {
                *g += v;
            }
        }
        let wt = transpose(self.w.data(), n_in, n_out);
        let mut dx = Tensor::zeros(&[batch, n_in]);
        matmul_acc(dy.data(), &wt, batch, n_out, n_in, dx.data_mut());
        (dx, vec![dw, db])
    }
}

// ---------------------------------------------------------------------------
// Conv1d
// ---------------------------------------------------------------------------

/// 1D convolution on `[batch, length, channels]`.
#[derive(Debug, Clone)]
pub struct Conv1d<T> {
    pub w: Tensor<T>, // [kernel, in_ch, out_ch]
    pub b: Tensor<T>, // [out_ch]
    pub stride: usize,
    pub pad: (usize, usize),
}

#[derive(Debug)]
pub struct ConvCache<T> {
    cols: Vec<T>, // [batch * out_len, kernel * in_ch]
    in_len: usize,
    batch: usize,
}

impl<T: Scalar> Conv1d<T> {
    pub fn new(
        kernel: usize,
        in_ch: usize,
        out_ch: usize,
        stride: usize,
        pad: (usize, usize),
        rng: &mut impl Rng,
    ) -> Self {
        let fan_in = kernel * in_ch;
        Conv1d {
            w: Tensor::from_vec(
                &[kernel, in_ch, out_ch],
                sample_uniform(rng, kernel * in_ch * out_ch, init_limit(fan_in)),
            ),
            b: Tensor::zeros(&[out_ch]),
            stride,
            pad,
        }
    }

    pub fn from_params(w: Tensor<T>, b: Tensor<T>, stride: usize, pad: (usize, usize)) -> Self {
        assert_eq!(w.shape().len(), 3);
        assert_eq!(b.shape(), &[w.shape()[2]]);
        Conv1d { w, b, stride, pad }
    }

    pub fn kernel(&self) -> usize {
        self.w.shape()[0]
    }
    pub fn in_ch(&self) -> usize {
        self.w.shape()[1]
    }
    pub fn out_ch(&self) -> usize {
        self.w.shape()[2]
    }

    fn im2col(&self, x: &Tensor<T>, out_len: usize) -> Vec<T> {
        let (batch, in_len, in_ch) = (x.shape()[0], x.shape()[1], x.shape()[2]);
        let (kernel, stride) = (self.kernel(), self.stride);
        let row_width = kernel * in_ch;
        let mut cols = vec![T::ZERO; batch * out_len * row_width];
        let xd = x.data();
        for b in 0..batch {
            let x_base = b * in_len * in_ch;
            for lo in 0..out_len {
                let row = &mut cols[(b * out_len + lo) * row_width..(b * out_len + lo + 1) * row_width];
                let start = (lo * stride) as isize - self.pad.0 as isize;
                for kk in 0..kernel {
                    let ip = start + kk as isize;
                    if ip >= 0 && (ip as usize) < in_len {
                        let src = x_base + ip as usize * in_ch;
                        row[kk * in_ch..(kk + 1) * in_ch].copy_from_slice(&xd[src..src + in_ch]);
                    }
                }
            }
        }
        cols
    }

    fn forward(&self, x: &Tensor<T>) -> Result<(Tensor<T>, ConvCache<T>), String> {
        if x.shape().len() != 3 || x.shape()[2] != self.in_ch() {
            return Err(format!(
                "expected [batch, length, {}], got {:?}",
                self.in_ch(),
                x.shape()
            ));
        }
        let (batch, in_len) = (x.shape()[0], x.shape()[1]);
        let out_len = conv_out_len(in_len, self.kernel(), self.stride, self.pad)
            .ok_or_else(|| format!("kernel {} does not fit input length {}", self.kernel(), in_len))?;
        let cols = self.im2col(x, out_len);
        let (rows, row_width, out_ch) = (batch * out_len, self.kernel() * self.in_ch(), self.out_ch());
        let mut y = Tensor::zeros(&[batch, out_len, out_ch]);
        matmul_acc(&cols, self.w.data(), rows, row_width, out_ch, y.data_mut());
        for row in y.data_mut().chunks_exact_mut(out_ch) {
            for (v, &bias) in row.iter_mut().zip(self.b.data()) {
                *v += bias;
            }
        }
        Ok((y, ConvCache { cols, in_len, batch }))
    }

    fn backward(&self, cache: &ConvCache<T>, dy: &Tensor<T>) -> (Tensor<T>, Vec<Tensor<T>>) {
        let (batch, in_len) = (cache.batch, cache.in_len);
        let (kernel, in_ch, out_ch, stride) = (self.kernel(), self.in_ch(), self.out_ch(), self.stride);
        let out_len = dy.shape()[1];
        let rows = batch * out_len;
        let row_width = kernel * in_ch;

        let mut dw = Tensor::zeros(&[kernel, in_ch, out_ch]);
        matmul_at_b_acc(&cache.cols, dy.data(), rows, row_width, out_ch, dw.data_mut());

        let mut db = Tensor::zeros(&[out_ch]);
        for row in dy.data().chunks_exact(out_ch) {
            for (g, &v) in db.data_mut().iter_mut().zip(row) {
                *g += v;
            }
        }

        let wt = transpose(self.w.data(), row_width, out_ch);
        let mut dcols = vec![T::ZERO; rows * row_width];
        matmul_acc(dy.data(), &wt, rows, out_ch, row_width, &mut dcols);

        // col2im: scatter-add the column gradients back onto the input.
        let mut dx = Tensor::zeros(&[batch, in_len, in_ch]);
        let dxd = dx.data_mut();
        for b in 0..batch {
            let x_base = b * in_len * in_ch;
            for lo in 0..out_len {
                let row = &dcols[(b * out_len + lo) * row_width..(b * out_len + lo + 1) * row_width];
                let start = (lo * stride) as isize - self.pad.0 as isize;
                for kk in 0..kernel {
                    let ip = start + kk as isize;
                    if ip >= 0 && (ip as usize) < in_len {
                        let dst = x_base + ip as usize * in_ch;
                        for (d, &g) in dxd[dst..dst + in_ch].iter_mut().zip(&row[kk * in_ch..(kk + 1) * in_ch]) {
                            *d += g;
                        }
                    }
                }
            }
        }
        (dx, vec![dw, db])
    }
}

// ---------------------------------------------------------------------------
// Transposed Conv1d
// ---------------------------------------------------------------------------

/// 1D transposed convolution on `[batch, length, channels]`; inverts the
/// length arithmetic of [`Conv1d`] for matching stride and padding.
#[derive(Debug, Clone)]
pub struct TConv1d<T> {
    pub w: Tensor<T>, // [in_ch, kernel, out_ch]
    pub b: Tensor<T>, // [out_ch]
    pub stride: usize,
    pub pad: (usize, usize),
}

#[derive(Debug)]
pub struct TConvCache<T> {
    x: Tensor<T>,
    out_len: usize,
}

impl<T: Scalar> TConv1d<T> {
    pub fn new(
        kernel: usize,
        in_ch: usize,
        out_ch: usize,
        stride: usize,
        pad: (usize, usize),
        rng: &mut impl Rng,
    ) -> Self {
        let fan_in = kernel * in_ch;
        TConv1d {
            w: Tensor::from_vec(
                &[in_ch, kernel, out_ch],
                sample_uniform(rng, kernel * in_ch * out_ch, init_limit(fan_in)),
            ),
            b: Tensor::zeros(&[out_ch]),
            stride,
            pad,
        }
    }

    pub fn kernel(&self) -> usize {
        self.w.shape()[1]
    }
    pub fn in_ch(&self) -> usize {
        self.w.shape()[0]
    }
    pub fn out_ch(&self) -> usize {
        self.w.shape()[2]
    }

    fn forward(&self, x: &Tensor<T>) -> Result<(Tensor<T>, TConvCache<T>), String> {
        if x.shape().len() != 3 || x.shape()[2] != self.in_ch() {
            return Err(format!(
                "expected [batch, length, {}], got {:?}",
                self.in_ch(),
                x.shape()
            ));
        }
        let (batch, in_len) = (x.shape()[0], x.shape()[1]);
        let out_len = tconv_out_len(in_len, self.kernel(), self.stride, self.pad)
            .ok_or_else(|| format!("padding swallows the whole output for input length {in_len}"))?;
        let (kernel, in_ch, out_ch) = (self.kernel(), self.in_ch(), self.out_ch());

        // P[(b,li),(k,co)] = sum_ci x[b,li,ci] * w[ci,k,co]
        let rows = batch * in_len;
        let width = kernel * out_ch;
        let mut p = vec![T::ZERO; rows * width];
        matmul_acc(x.data(), self.w.data(), rows, in_ch, width, &mut p);

        let mut y = Tensor::zeros(&[batch, out_len, out_ch]);
        let yd = y.data_mut();
        for b in 0..batch {
            let y_base = b * out_len * out_ch;
            for li in 0..in_len {
                let row = &p[(b * in_len + li) * width..(b * in_len + li + 1) * width];
                let start = (li * self.stride) as isize - self.pad.0 as isize;
                for kk in 0..kernel {
                    let op = start + kk as isize;
                    if op >= 0 && (op as usize) < out_len {
                        let dst = y_base + op as usize * out_ch;
                        for (v, &pv) in yd[dst..dst + out_ch].iter_mut().zip(&row[kk * out_ch..(kk + 1) * out_ch]) {
                            *v += pv;
                        }
                    }
                }
            }
        }
        for row in yd.chunks_exact_mut(out_ch) {
            for (v, &bias) in row.iter_mut().zip(self.b.data()) {
                *v += bias;
            }
        }
        Ok((y, TConvCache { x: x.clone(), out_len }))
    }

    fn backward(&self, cache: &TConvCache<T>, dy: &Tensor<T>) -> (Tensor<T>, Vec<Tensor<T>>) {
        let x = &cache.x;
        let (batch, in_len) = (x.shape()[0], x.shape()[1]);
        let (kernel, in_ch, out_ch) = (self.kernel(), self.in_ch(), self.out_ch());
        let out_len = cache.out_len;
        let rows = batch * in_len;
        let width = kernel * out_ch;

        // Gather dy back into the P layout used by forward.
        let mut g = vec![T::ZERO; rows * width];
        let dyd = dy.data();
        for b in 0..batch {
            let y_base = b * out_len * out_ch;
            for li in 0..in_len {
                let row = &mut g[(b * in_len + li) * width..(b * in_len + li + 1) * width];
                let start = (li * self.stride) as isize - self.pad.0 as isize;
                for kk in 0..kernel {
                    let op = start + kk as isize;
                    if op >= 0 && (op as usize) < out_len {
                        let src = y_base + op as usize * out_ch;
                        row[kk * out_ch..(kk + 1) * out_ch].copy_from_slice(&dyd[src..src + out_ch]);
                    }
                }
            }
        }

        let mut dw = Tensor::zeros(&[in_ch, kernel, out_ch]);
        matmul_at_b_acc(x.data(), &g, rows, in_ch, width, dw.data_mut());

        let wt = transpose(self.w.data(), in_ch, width);
        let mut dx = Tensor::zeros(&[batch, in_len, in_ch]);
        matmul_acc(&g, &wt, rows, width, in_ch, dx.data_mut());

        let mut db = Tensor::zeros(&[out_ch]);
        for row in dyd.chunks_exact(out_ch) {
            for (gb, &v) in db.data_mut().iter_mut().zip(row) {
                *gb += v;
            }
        }
        (dx, vec![dw, db])
    }
}

// ---------------------------------------------------------------------------
// BatchNorm1d
// ---------------------------------------------------------------------------

/// Batch normalisation over the trailing channel axis.
///
/// Biased variance is used both for normalisation and for the running
/// statistics. Running stats are only mutated by an explicit
/// `commit_batchnorm` on the owning network.
#[derive(Debug, Clone)]
pub struct BatchNorm1d<T> {
    pub gamma: Tensor<T>,
    pub beta: Tensor<T>,
    pub running_mean: Tensor<T>,
    pub running_var: Tensor<T>,
    pub epsilon: f64,
    pub momentum: f64,
}

#[derive(Debug)]
pub enum BnCache<T> {
    Train {
        xhat: Tensor<T>,
        inv_std: Vec<T>,
        mean: Vec<T>,
        var: Vec<T>,
    },
    Eval,
}

impl<T: Scalar> BatchNorm1d<T> {
    pub fn new(channels: usize, epsilon: f64, momentum: f64) -> Self {
        assert!(epsilon > 0.0, "batchnorm epsilon must be positive");
        BatchNorm1d {
            gamma: Tensor::filled(&[channels], T::ONE),
            beta: Tensor::zeros(&[channels]),
            running_mean: Tensor::zeros(&[channels]),
            running_var: Tensor::filled(&[channels], T::ONE),
            epsilon,
            momentum,
        }
    }

    pub fn channels(&self) -> usize {
        self.gamma.len()
    }

    fn forward(&self, x: &Tensor<T>, mode: Mode) -> Result<(Tensor<T>, BnCache<T>), String> {
        let ch = self.channels();
        if x.shape().last().copied() != Some(ch) {
            return Err(format!("expected trailing channel axis of {ch}, got {:?}", x.shape()));
        }
        let n = x.len() / ch;
        match mode {
            Mode::Eval => {
                let mut y = Tensor::zeros(x.shape());
                let mut scale = vec![T::ZERO; ch];
                let mut shift = vec![T::ZERO; ch];
                for c in 0..ch {
                    let inv = T::ONE / (self.running_var.data()[c] + T::from_f64(self.epsilon)).sqrt();
                    scale[c] = self.gamma.data()[c] * inv;
                    shift[c] = self.beta.data()[c] - self.running_mean.data()[c] * scale[c];
                }
                for (yrow, xrow) in y.data_mut().chunks_exact_mut(ch).zip(x.data().chunks_exact(ch)) {
                    for c in 0..ch {
                        yrow[c] = xrow[c] * scale[c] + shift[c];
                    }
                }
                Ok((y, BnCache::Eval))
            }
            Mode::Train => {
                let inv_n = T::from_f64(1.0 / n as f64);
                let mut mean = vec![T::ZERO; ch];
                for row in x.data().chunks_exact(ch) {
                    for (m, &v) in mean.iter_mut().zip(row) {
                        *m += v;
                    }
                }
                for m in mean.iter_mut() {
                    *m = *m * inv_n;
                }
                let mut var = vec![T::ZERO; ch];
                for row in x.data().chunks_exact(ch) {
                    for ((s, &v), &m) in var.iter_mut().zip(row).zip(mean.iter()) {
                        let d = v - m;
                        *s += d * d;
                    }
                }
                for s in var.iter_mut() {
                    *s = *s * inv_n;
                }
                let inv_std: Vec<T> = var
                    .iter()
                    .map(|&v| T::ONE / (v + T::from_f64(self.epsilon)).sqrt())
                    .collect();

                let mut xhat = Tensor::zeros(x.shape());
                for (hrow, xrow) in xhat.data_mut().chunks_exact_mut(ch).zip(x.data().chunks_exact(ch)) {
                    for c in 0..ch {
                        hrow[c] = (xrow[c] - mean[c]) * inv_std[c];
                    }
                }
                let mut y = Tensor::zeros(x.shape());
                for (yrow, hrow) in y.data_mut().chunks_exact_mut(ch).zip(xhat.data().chunks_exact(ch)) {
                    for c in 0..ch {
                        yrow[c] = hrow[c] * self.gamma.data()[c] + self.beta.data()[c];
                    }
                }
                Ok((y, BnCache::Train { xhat, inv_std, mean, var }))
            }
        }
    }

    fn backward(&self, cache: &BnCache<T>, dy: &Tensor<T>) -> Result<(Tensor<T>, Vec<Tensor<T>>), String> {
        let (xhat, inv_std) = match cache {
            BnCache::Train { xhat, inv_std, .. } => (xhat, inv_std),
            BnCache::Eval => return Err("backward through an eval-mode batchnorm tape".to_string()),
        };
        let ch = self.channels();
        let n = dy.len() / ch;
        let inv_n = T::from_f64(1.0 / n as f64);

        let mut sum_dy = vec![T::ZERO; ch];
        let mut sum_dy_xhat = vec![T::ZERO; ch];
        for (drow, hrow) in dy.data().chunks_exact(ch).zip(xhat.data().chunks_exact(ch)) {
            for c in 0..ch {
                sum_dy[c] += drow[c];
                sum_dy_xhat[c] += drow[c] * hrow[c];
            }
        }

        let mut dx = Tensor::zeros(dy.shape());
        for ((xrow, hrow), drow) in dx
            .data_mut()
            .chunks_exact_mut(ch)
            .zip(xhat.data().chunks_exact(ch))
            .zip(dy.data().chunks_exact(ch))
        {
            for c in 0..ch {
                let centered = drow[c] - sum_dy[c] * inv_n - hrow[c] * (sum_dy_xhat[c] * inv_n);
                xrow[c] = self.gamma.data()[c] * inv_std[c] * centered;
            }
        }
        let dgamma = Tensor::from_vec(&[ch], sum_dy_xhat);
        let dbeta = Tensor::from_vec(&[ch], sum_dy);
        Ok((dx, vec![dgamma, dbeta]))
    }

    fn commit(&mut self, cache: &BnCache<T>) {
        if let BnCache::Train { mean, var, .. } = cache {
            let mom = T::from_f64(self.momentum);
            let keep = T::from_f64(1.0 - self.momentum);
            for c in 0..self.channels() {
                let rm = self.running_mean.data()[c] * keep + mean[c] * mom;
                self.running_mean.data_mut()[c] = rm;
                let rv = self.running_var.data()[c] * keep + var[c] * mom;
                self.running_var.data_mut()[c] = rv;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Leaky ReLU
// ---------------------------------------------------------------------------

/// Elementwise leaky rectifier with a negative slope in (0, 1).
#[derive(Debug, Clone)]
pub struct LRelu {
    pub slope: f64,
}

impl LRelu {
    pub fn new(slope: f64) -> Self {
        assert!(slope > 0.0 && slope < 1.0, "lrelu slope must lie in (0, 1)");
        LRelu { slope }
    }

    fn forward<T: Scalar>(&self, x: &Tensor<T>) -> (Tensor<T>, Tensor<T>) {
        let slope = T::from_f64(self.slope);
        let y = x.map(|v| if v > T::ZERO { v } else { v * slope });
        (y, x.clone())
    }

    fn backward<T: Scalar>(&self, x: &Tensor<T>, dy: &Tensor<T>) -> Tensor<T> {
        let slope = T::from_f64(self.slope);
        let mut dx = dy.clone();
        for (d, &v) in dx.data_mut().iter_mut().zip(x.data()) {
            if v <= T::ZERO {
                *d = *d * slope;
            }
        }
        dx
    }
}

// ---------------------------------------------------------------------------
// Layer dispatch
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum Layer<T> {
    Dense(Dense<T>),
    Conv1d(Conv1d<T>),
    TConv1d(TConv1d<T>),
    BatchNorm1d(BatchNorm1d<T>),
    LRelu(LRelu),
}

#[derive(Debug)]
pub enum LayerCache<T> {
    Dense(Tensor<T>),
    Conv1d(ConvCache<T>),
    TConv1d(TConvCache<T>),
    BatchNorm1d(BnCache<T>),
    LRelu(Tensor<T>),
}

impl<T: Scalar> Layer<T> {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Layer::Dense(_) => "dense",
            Layer::Conv1d(_) => "conv1d",
            Layer::TConv1d(_) => "transposed_conv1d",
            Layer::BatchNorm1d(_) => "batchnorm1d",
            Layer::LRelu(_) => "lrelu",
        }
    }

    /// Per-sample output shape for a per-sample input shape.
    pub fn out_shape(&self, in_shape: &[usize]) -> Result<Vec<usize>, String> {
        match self {
            Layer::Dense(d) => {
                if in_shape != [d.inputs()] {
                    return Err(format!("dense expects [{}], got {:?}", d.inputs(), in_shape));
                }
                Ok(vec![d.outputs()])
            }
            Layer::Conv1d(c) => {
                if in_shape.len() != 2 || in_shape[1] != c.in_ch() {
                    return Err(format!("conv1d expects [len, {}], got {:?}", c.in_ch(), in_shape));
                }
                let out = conv_out_len(in_shape[0], c.kernel(), c.stride, c.pad)
                    .ok_or_else(|| format!("kernel {} does not fit length {}", c.kernel(), in_shape[0]))?;
                Ok(vec![out, c.out_ch()])
            }
            Layer::TConv1d(c) => {
                if in_shape.len() != 2 || in_shape[1] != c.in_ch() {
                    return Err(format!("tconv1d expects [len, {}], got {:?}", c.in_ch(), in_shape));
                }
                let out = tconv_out_len(in_shape[0], c.kernel(), c.stride, c.pad)
                    .ok_or_else(|| "empty transposed-conv output".to_string())?;
                Ok(vec![out, c.out_ch()])
            }
            Layer::BatchNorm1d(bn) => {
                if in_shape.last().copied() != Some(bn.channels()) {
                    return Err(format!(
                        "batchnorm expects trailing axis {}, got {:?}",
                        bn.channels(),
                        in_shape
                    ));
                }
                Ok(in_shape.to_vec())
            }
            Layer::LRelu(_) => Ok(in_shape.to_vec()),
        }
    }

    pub fn forward(&self, x: &Tensor<T>, mode: Mode) -> Result<(Tensor<T>, LayerCache<T>), String> {
        match self {
            Layer::Dense(l) => l.forward(x).map(|(y, c)| (y, LayerCache::Dense(c))),
            Layer::Conv1d(l) => l.forward(x).map(|(y, c)| (y, LayerCache::Conv1d(c))),
            Layer::TConv1d(l) => l.forward(x).map(|(y, c)| (y, LayerCache::TConv1d(c))),
            Layer::BatchNorm1d(l) => l.forward(x, mode).map(|(y, c)| (y, LayerCache::BatchNorm1d(c))),
            Layer::LRelu(l) => {
                let (y, c) = l.forward(x);
                Ok((y, LayerCache::LRelu(c)))
            }
        }
    }

    pub fn backward(&self, cache: &LayerCache<T>, dy: &Tensor<T>) -> Result<(Tensor<T>, Vec<Tensor<T>>), String> {
        match (self, cache) {
            (Layer::Dense(l), LayerCache::Dense(c)) => Ok(l.backward(c, dy)),
            (Layer::Conv1d(l), LayerCache::Conv1d(c)) => Ok(l.backward(c, dy)),
            (Layer::TConv1d(l), LayerCache::TConv1d(c)) => Ok(l.backward(c, dy)),
            (Layer::BatchNorm1d(l), LayerCache::BatchNorm1d(c)) => l.backward(c, dy),
            (Layer::LRelu(l), LayerCache::LRelu(c)) => Ok((l.backward(c, dy), Vec::new())),
            _ => Err("tape entry does not match layer kind".to_string()),
        }
    }

    pub fn params(&self) -> Vec<&Tensor<T>> {
        match self {
            Layer::Dense(l) => vec![&l.w, &l.b],
            Layer::Conv1d(l) => vec![&l.w, &l.b],
            Layer::TConv1d(l) => vec![&l.w, &l.b],
            Layer::BatchNorm1d(l) => vec![&l.gamma, &l.beta],
            Layer::LRelu(_) => Vec::new(),
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor<T>> {
        match self {
            Layer::Dense(l) => vec![&mut l.w, &mut l.b],
            Layer::Conv1d(l) => vec![&mut l.w, &mut l.b],
            Layer::TConv1d(l) => vec![&mut l.w, &mut l.b],
            Layer::BatchNorm1d(l) => vec![&mut l.gamma, &mut l.beta],
            Layer::LRelu(_) => Vec::new(),
        }
    }

    pub fn commit(&mut self, cache: &LayerCache<T>) {
        if let (Layer::BatchNorm1d(l), LayerCache::BatchNorm1d(c)) = (self, cache) {
            l.commit(c);
        }
    }
}
