//! Dense networks with hand-written reverse-mode gradients, the two policy
//! heads and an Adam optimiser.

mod adam;
mod checkpoint;
mod heads;
mod mlp;

pub use adam::Adam;
pub use checkpoint::{FORMAT as CHECKPOINT_FORMAT, VERSION as CHECKPOINT_VERSION};
pub use heads::{
    argmax, categorical_sample_eps_greedy, gaussian_logprob, log_softmax, sample_categorical, softmax,
    CategoricalHead, GaussianHead,
};
pub use mlp::{sigmoid, softplus, Activation, Dense, Grads, LayerGrads, Mlp};
