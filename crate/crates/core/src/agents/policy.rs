use std::fmt::Debug;

use rand::Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::nn::{argmax, categorical_sample_eps_greedy, softmax, CategoricalHead, GaussianHead};
use crate::scalar::Scalar;

/// Maps raw actor outputs to an action distribution.
pub trait PolicyHead<T: Scalar>: Clone + Debug + Serialize + DeserializeOwned {
    type Action: Clone + Debug + PartialEq + Send + Sync;

    fn n_outputs(&self) -> usize;

    /// `log pi(a)` and its gradient with respect to the raw outputs.
    fn log_prob_grad(&self, out: &[T], action: &Self::Action) -> (T, Vec<T>);

    fn log_prob(&self, out: &[T], action: &Self::Action) -> T {
        self.log_prob_grad(out, action).0
    }

    /// Entropy and its gradient with respect to the raw outputs.
    fn entropy_grad(&self, out: &[T]) -> (T, Vec<T>);

    /// Exploratory draw. `eps` mixes in uniform actions where the head supports it.
    fn sample<R: Rng + ?Sized>(&self, out: &[T], eps: f64, rng: &mut R) -> Self::Action;

    /// Mode of the distribution.
    fn greedy(&self, out: &[T]) -> Self::Action;
}

impl<T: Scalar> PolicyHead<T> for CategoricalHead {
    type Action = usize;

    fn n_outputs(&self) -> usize {
        self.n_actions
    }

    fn log_prob_grad(&self, out: &[T], action: &usize) -> (T, Vec<T>) {
        CategoricalHead::log_prob_grad(self, out, *action)
    }

    fn entropy_grad(&self, out: &[T]) -> (T, Vec<T>) {
        CategoricalHead::entropy_grad(self, out)
    }

    fn sample<R: Rng + ?Sized>(&self, out: &[T], eps: f64, rng: &mut R) -> usize {
        categorical_sample_eps_greedy(&softmax(out), eps, rng)
    }

    fn greedy(&self, out: &[T]) -> usize {
        argmax(out)
    }
}

impl<T: Scalar> PolicyHead<T> for GaussianHead<T> {
    type Action = [T; 2];

    fn n_outputs(&self) -> usize {
        Self::OUTPUTS
    }

    fn log_prob_grad(&self, out: &[T], action: &[T; 2]) -> (T, Vec<T>) {
        GaussianHead::log_prob_grad(self, out, *action)
    }

    fn entropy_grad(&self, out: &[T]) -> (T, Vec<T>) {
        GaussianHead::entropy_grad(self, out)
    }

    fn sample<R: Rng + ?Sized>(&self, out: &[T], _eps: f64, rng: &mut R) -> [T; 2] {
        GaussianHead::sample(self, out, rng)
    }

    fn greedy(&self, out: &[T]) -> [T; 2] {
        self.mu_sigma(out).0
    }
}
