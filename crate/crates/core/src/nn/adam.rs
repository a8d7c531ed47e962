use serde::{Deserialize, Serialize};

use super::mlp::{Grads, Mlp};
use crate::error::{Error, Result};
use crate::scalar::{s, Scalar};

/// Bias-corrected adaptive-moment optimiser bound to one network's shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Adam<T> {
    pub lr: T,
    pub beta1: T,
    pub beta2: T,
    pub eps: T,
    pub t: u64,
    m: Grads<T>,
    v: Grads<T>,
}

impl<T: Scalar> Adam<T> {
    pub fn new(net: &Mlp<T>, lr: T) -> Self {
        Self {
            lr,
            beta1: s(0.9),
            beta2: s(0.999),
            eps: s(1e-8),
            t: 0,
            m: Grads::zeros_like(net),
            v: Grads::zeros_like(net),
        }
    }

    /// Descends along `grads` (gradients of a loss to minimise).
    pub fn step(&mut self, net: &mut Mlp<T>, grads: &Grads<T>) -> Result<()> {
        grads.check_shape(net)?;
        self.m
            .check_shape(net)
            .map_err(|_| Error::Shape("optimiser state belongs to a different network".into()))?;
        self.t += 1;
        let t = i32::try_from(self.t).unwrap_or(i32::MAX);
        let bc1 = T::one() - self.beta1.powi(t);
        let bc2 = T::one() - self.beta2.powi(t);
        let (b1, b2) = (self.beta1, self.beta2);
        let params = net.params_mut();
        let state = self.m.iter_mut().zip(self.v.iter_mut());
        for ((p, &g), (m, v)) in params.zip(grads.iter()).zip(state) {
            *m = b1 * *m + (T::one() - b1) * g;
            *v = b2 * *v + (T::one() - b2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(())
    }
}
