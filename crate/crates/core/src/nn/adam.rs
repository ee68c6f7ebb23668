use super::scalar::Scalar;
use super::tensor::Tensor;
use super::NnError;

/// Bias-corrected Adam state for one parameter list.
///
/// Moments are kept in the same precision as the parameters; the step
/// counter advances exactly once per [`AdamState::apply`].
#[derive(Debug, Clone)]
pub struct AdamState<T> {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: u64,
    m: Vec<Tensor<T>>,
    v: Vec<Tensor<T>>,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(param_shapes: &[&[usize]], lr: f64) -> Self {
        AdamState {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            m: param_shapes.iter().map(|s| Tensor::zeros(s)).collect(),
            v: param_shapes.iter().map(|s| Tensor::zeros(s)).collect(),
        }
    }

    pub fn for_params(params: &[&Tensor<T>], lr: f64) -> Self {
        let shapes: Vec<&[usize]> = params.iter().map(|p| p.shape()).collect();
        AdamState::new(&shapes, lr)
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One optimiser step: `p -= lr * m_hat / (sqrt(v_hat) + eps)`.
    pub fn apply(&mut self, params: &mut [&mut Tensor<T>], grads: &[&Tensor<T>]) -> Result<(), NnError> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(NnError::ParamMismatch(format!(
                "optimizer tracks {} tensors, got {} params / {} grads",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        self.step += 1;
        let b1 = T::from_f64(self.beta1);
        let b2 = T::from_f64(self.beta2);
        let one_minus_b1 = T::from_f64(1.0 - self.beta1);
        let one_minus_b2 = T::from_f64(1.0 - self.beta2);
        let corr1 = T::from_f64(1.0 / (1.0 - self.beta1.powi(self.step as i32)));
        let corr2 = T::from_f64(1.0 / (1.0 - self.beta2.powi(self.step as i32)));
        let lr = T::from_f64(self.lr);
        let eps = T::from_f64(self.epsilon);

        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grads.iter())
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            if p.shape() != g.shape() || p.shape() != m.shape() {
                return Err(NnError::ParamMismatch(format!(
                    "parameter shape {:?} vs gradient {:?} vs state {:?}",
                    p.shape(),
                    g.shape(),
                    m.shape()
                )));
            }
            for (((pv, &gv), mv), vv) in p
                .data_mut()
                .iter_mut()
                .zip(g.data())
                .zip(m.data_mut().iter_mut())
                .zip(v.data_mut().iter_mut())
            {
                *mv = b1 * *mv + one_minus_b1 * gv;
                *vv = b2 * *vv + one_minus_b2 * gv * gv;
                let m_hat = *mv * corr1;
                let v_hat = *vv * corr2;
                *pv -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params_and_advances_step() {
        let mut p = Tensor::from_vec(&[2], vec![0.3f64, -0.7]);
        let g = Tensor::zeros(&[2]);
        let mut state = AdamState::for_params(&[&p], 0.01);
        state.apply(&mut [&mut p], &[&g]).unwrap();
        assert_eq!(state.step_count(), 1);
        assert_eq!(p.data(), &[0.3, -0.7]);
    }

    #[test]
    fn first_step_is_roughly_minus_lr() {
        // Bias correction makes m_hat = v_hat = 1 after one unit-gradient step.
        let mut p = Tensor::from_vec(&[1], vec![0.0f64]);
        let g = Tensor::from_vec(&[1], vec![1.0f64]);
        let mut state = AdamState::for_params(&[&p], 0.01);
        state.apply(&mut [&mut p], &[&g]).unwrap();
        assert!((p.data()[0] + 0.01).abs() < 1e-9, "got {}", p.data()[0]);
    }

    #[test]
    fn deterministic_across_reruns() {
        let run = || {
            let mut p = Tensor::from_vec(&[3], vec![0.1f64, 0.2, 0.3]);
            let mut state = AdamState::for_params(&[&p], 0.005);
            for i in 0..10 {
                let g = Tensor::from_vec(&[3], vec![0.3 - i as f64 * 0.01, -0.2, 0.05]);
                state.apply(&mut [&mut p], &[&g]).unwrap();
            }
            p.data().to_vec()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut p = Tensor::<f64>::zeros(&[2]);
        let g = Tensor::<f64>::zeros(&[3]);
        let mut state = AdamState::for_params(&[&p], 0.01);
        assert!(state.apply(&mut [&mut p], &[&g]).is_err());
    }
}
