use super::scalar::Scalar;
use super::tensor::Tensor;
use super::NnError;

/// Mean squared error over all elements, with its gradient with respect
/// to `pred`: `2 (pred - target) / n`.
///
/// The loss itself is accumulated in `f64` so reported values do not
/// depend on the training precision.
pub fn mse_loss<T: Scalar>(pred: &Tensor<T>, target: &Tensor<T>) -> Result<(f64, Tensor<T>), NnError> {
    if pred.shape() != target.shape() {
        return Err(NnError::Shape {
            layer: 0,
            kind: "mse_loss",
            detail: format!("pred {:?} vs target {:?}", pred.shape(), target.shape()),
        });
    }
    let n = pred.len();
    let scale = T::from_f64(2.0 / n as f64);
    let mut sum = 0.0f64;
    let mut grad = Tensor::zeros(pred.shape());
    for ((g, &p), &t) in grad.data_mut().iter_mut().zip(pred.data()).zip(target.data()) {
        let d = p - t;
        sum += d.to_f64() * d.to_f64();
        *g = d * scale;
    }
    Ok((sum / n as f64, grad))
}

/// Mean squared error of each sample (leading-axis slice) separately.
pub fn per_sample_mse<T: Scalar>(pred: &Tensor<T>, target: &Tensor<T>) -> Result<Vec<f64>, NnError> {
    if pred.shape() != target.shape() {
        return Err(NnError::Shape {
            layer: 0,
            kind: "per_sample_mse",
            detail: format!("pred {:?} vs target {:?}", pred.shape(), target.shape()),
        });
    }
    let batch = pred.batch();
    if batch == 0 {
        return Ok(Vec::new());
    }
    let per = pred.len() / batch;
    Ok(pred
        .data()
        .chunks_exact(per)
        .zip(target.data().chunks_exact(per))
        .map(|(p, t)| {
            let mut sum = 0.0f64;
            for (&a, &b) in p.iter().zip(t.iter()) {
                let d = (a - b).to_f64();
                sum += d * d;
            }
            sum / per as f64
        })
        .collect())
}
