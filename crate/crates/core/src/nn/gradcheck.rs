use super::layer::Mode;
use super::loss::mse_loss;
use super::network::Network;
use super::tensor::Tensor;
use super::NnError;

fn loss_of(net: &Network<f64>, x: &Tensor<f64>, target: &Tensor<f64>) -> Result<f64, NnError> {
    let (y, _tape) = net.forward(x, Mode::Train)?;
    let (loss, _) = mse_loss(&y, target)?;
    Ok(loss)
}

fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

/// Compare analytic parameter gradients of `mse_loss(forward(x), target)`
/// against central finite differences, returning the worst relative error.
///
/// Runs in train mode (so batchnorm uses batch statistics) and restores
/// every parameter it perturbs; running statistics are never committed.
pub fn grad_check(
    net: &mut Network<f64>,
    x: &Tensor<f64>,
    target: &Tensor<f64>,
    eps: f64,
) -> Result<f64, NnError> {
    assert!((1e-7..=1e-3).contains(&eps), "eps outside the sensible range");
    let (y, tape) = net.forward(x, Mode::Train)?;
    let (_, loss_grad) = mse_loss(&y, target)?;
    let analytic = net.backward(&tape, &loss_grad)?;

    let n_params = net.params().len();
    let mut worst = 0.0f64;
    for pi in 0..n_params {
        let n_elems = net.params()[pi].len();
        for ei in 0..n_elems {
            let original = net.params()[pi].data()[ei];
            net.params_mut()[pi].data_mut()[ei] = original + eps;
            let plus = loss_of(net, x, target)?;
            net.params_mut()[pi].data_mut()[ei] = original - eps;
            let minus = loss_of(net, x, target)?;
            net.params_mut()[pi].data_mut()[ei] = original;

            let numeric = (plus - minus) / (2.0 * eps);
            let rel = relative_error(analytic.params[pi].data()[ei], numeric);
            if rel > worst {
                worst = rel;
            }
        }
    }
    Ok(worst)
}

/// Finite-difference check of the input gradient returned by backward.
pub fn input_grad_check(
    net: &Network<f64>,
    x: &Tensor<f64>,
    target: &Tensor<f64>,
    eps: f64,
) -> Result<f64, NnError> {
    let (y, tape) = net.forward(x, Mode::Train)?;
    let (_, loss_grad) = mse_loss(&y, target)?;
    let analytic = net.backward(&tape, &loss_grad)?;

    let mut worst = 0.0f64;
    let mut probe = x.clone();
    for i in 0..x.len() {
        let original = probe.data()[i];
        probe.data_mut()[i] = original + eps;
        let plus = loss_of(net, &probe, target)?;
        probe.data_mut()[i] = original - eps;
        let minus = loss_of(net, &probe, target)?;
        probe.data_mut()[i] = original;

        let numeric = (plus - minus) / (2.0 * eps);
        let rel = relative_error(analytic.input.data()[i], numeric);
        if rel > worst {
            worst = rel;
        }
    }
    Ok(worst)
}
