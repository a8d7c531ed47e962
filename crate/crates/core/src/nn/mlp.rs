use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Linear,
    Softplus,
}

impl Activation {
    #[inline]
    pub fn apply<T: Scalar>(self, z: T) -> T {
        match self {
            Activation::Relu => z.max(T::zero()),
            Activation::Tanh => z.tanh(),
            Activation::Linear => z,
            Activation::Softplus => softplus(z),
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `y`.
    #[inline]
    pub fn derivative<T: Scalar>(self, z: T, y: T) -> T {
        match self {
            Activation::Relu => {
                if z > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::Tanh => T::one() - y * y,
            Activation::Linear => T::one(),
            Activation::Softplus => sigmoid(z),
        }
    }
}

#[inline]
pub fn softplus<T: Scalar>(z: T) -> T {
    // log(1 + e^z) without overflow
    z.max(T::zero()) + (-z.abs()).exp().ln_1p()
}

#[inline]
pub fn sigmoid<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// Fully connected layer, weights stored row-major `out x in`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Dense<T> {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<T>,
    pub bias: Vec<T>,
    pub activation: Activation,
}

impl<T: Scalar> Dense<T> {
    pub fn zeros(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        Self {
            in_dim,
            out_dim,
            weights: vec![T::zero(); in_dim * out_dim],
            bias: vec![T::zero(); out_dim],
            activation,
        }
    }

    /// Orthogonal rows/columns scaled by `gain`, zero bias.
    pub fn orthogonal<R: Rng + ?Sized>(
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        gain: f64,
        rng: &mut R,
    ) -> Self {
        let mut layer = Self::zeros(in_dim, out_dim, activation);
        let q = orthogonal_matrix(out_dim, in_dim, rng);
        for (w, v) in layer.weights.iter_mut().zip(q) {
            *w = T::lit(gain * v);
        }
        layer
    }

    #[inline]
    fn row(&self, o: usize) -> &[T] {
        &self.weights[o * self.in_dim..(o + 1) * self.in_dim]
    }

    fn pre_activation(&self, x: &[T]) -> Vec<T> {
        (0..self.out_dim).map(|o| dot(self.row(o), x) + self.bias[o]).collect()
    }
}

#[inline]
fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut acc = [T::zero(); 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = c * 4;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = T::zero();
    for i in chunks * 4..a.len() {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `rows x cols` matrix (row-major) whose rows or columns, whichever are
/// fewer, are orthonormal. Modified Gram-Schmidt on a Gaussian draw.
fn orthogonal_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Vec<f64> {
    let (long, short) = (rows.max(cols), rows.min(cols));
    // `short` vectors of length `long`
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(short);
    while basis.len() < short {
        let mut v: Vec<f64> = (0..long).map(|_| rng.sample(StandardNormal)).collect();
        for b in &basis {
            let p: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    let mut out = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            out[r * cols + c] = if rows >= cols { basis[c][r] } else { basis[r][c] };
        }
    }
    out
}

/// Activations recorded by a training forward pass.
#[derive(Clone, Debug, Default)]
struct Tape<T> {
    /// Input to each layer.
    inputs: Vec<Vec<T>>,
    pre: Vec<Vec<T>>,
    post: Vec<Vec<T>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Mlp<T> {
    layers: Vec<Dense<T>>,
    #[serde(skip)]
    tape: Option<Tape<T>>,
}

/// Equality compares parameters only.
impl<T: Scalar> PartialEq for Mlp<T> {
    fn eq(&self, other: &Self) -> bool {
        self.layers == other.layers
    }
}

impl<T: Scalar> Mlp<T> {
    pub fn from_layers(layers: Vec<Dense<T>>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Shape("network needs at least one layer".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.weights.len() != l.in_dim * l.out_dim || l.bias.len() != l.out_dim {
                return Err(Error::Shape(format!("layer {i} parameter lengths disagree with its dimensions")));
            }
            if i > 0 && layers[i - 1].out_dim != l.in_dim {
                return Err(Error::Shape(format!(
                    "layer {i} expects {} inputs but layer {} emits {}",
                    l.in_dim,
                    i - 1,
                    layers[i - 1].out_dim
                )));
            }
        }
        Ok(Self { layers, tape: None })
    }

    /// Orthogonally initialised network `dims[0] -> ... -> dims[last]`.
    ///
    /// Hidden layers use gain `sqrt(2)`; the output layer uses `output_gain`.
    pub fn new<R: Rng + ?Sized>(
        dims: &[usize],
        hidden: Activation,
        output: Activation,
        output_gain: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::Shape("need at least input and output sizes".into()));
        }
        let last = dims.len() - 2;
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let (act, gain) = if i == last { (output, output_gain) } else { (hidden, 2f64.sqrt()) };
                Dense::orthogonal(w[0], w[1], act, gain, rng)
            })
            .collect();
        Self::from_layers(layers)
    }

    pub fn layers(&self) -> &[Dense<T>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense<T>] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim
    }

    /// `[in, hidden..., out]`.
    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.input_dim()];
        d.extend(self.layers.iter().map(|l| l.out_dim));
        d
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    fn check_input(&self, x: &[T]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::Dimension { expected: self.input_dim(), got: x.len() });
        }
        Ok(())
    }

    /// Inference pass; leaves no trace.
    pub fn forward(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_input(x)?;
        let mut h = x.to_vec();
        for l in &self.layers {
            let mut z = l.pre_activation(&h);
            z.iter_mut().for_each(|v| *v = l.activation.apply(*v));
            h = z;
        }
        Ok(h)
    }

    /// Forward pass that records activations for a following [`Mlp::backward`].
    pub fn forward_train(&mut self, x: &[T]) -> Result<Vec<T>> {
        self.check_input(x)?;
        let mut tape = Tape::default();
        let mut h = x.to_vec();
        for l in &self.layers {
            let z = l.pre_activation(&h);
            let y: Vec<T> = z.iter().map(|&v| l.activation.apply(v)).collect();
            tape.inputs.push(std::mem::replace(&mut h, y.clone()));
            tape.pre.push(z);
            tape.post.push(y);
        }
        self.tape = Some(tape);
        Ok(h)
    }

    /// Gradients of a scalar loss given `dL/d(output)` for the last
    /// [`Mlp::forward_train`] input.
    pub fn backward(&self, grad_out: &[T]) -> Result<Grads<T>> {
        let mut g = Grads::zeros_like(self);
        self.backward_accumulate(grad_out, &mut g)?;
        Ok(g)
    }

    /// Like [`Mlp::backward`] but adds into `acc`.
    pub fn backward_accumulate(&self, grad_out: &[T], acc: &mut Grads<T>) -> Result<()> {
        let tape = self.tape.as_ref().ok_or(Error::NoForwardCache)?;
        if grad_out.len() != self.output_dim() {
            return Err(Error::Dimension { expected: self.output_dim(), got: grad_out.len() });
        }
        acc.check_shape(self)?;
        let mut delta: Vec<T> = grad_out.to_vec();
        for (i, l) in self.layers.iter().enumerate().rev() {
            for ((d, &z), &y) in delta.iter_mut().zip(&tape.pre[i]).zip(&tape.post[i]) {
                *d *= l.activation.derivative(z, y);
            }
            let input = &tape.inputs[i];
            let lg = &mut acc.layers[i];
            for (o, &d) in delta.iter().enumerate() {
                lg.bias[o] += d;
                if d != T::zero() {
                    let row = &mut lg.weights[o * l.in_dim..(o + 1) * l.in_dim];
                    for (w, &x) in row.iter_mut().zip(input) {
                        *w += d * x;
                    }
                }
            }
            if i > 0 {
                let mut next = vec![T::zero(); l.in_dim];
                for (o, &d) in delta.iter().enumerate() {
                    if d != T::zero() {
                        for (n, &w) in next.iter_mut().zip(l.row(o)) {
                            *n += w * d;
                        }
                    }
                }
                delta = next;
            }
        }
        Ok(())
    }

    /// Parameters in canonical order: per layer, weights then bias.
    pub fn params(&self) -> impl Iterator<Item = &T> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(l.bias.iter()))
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut T> {
        self.layers.iter_mut().flat_map(|l| l.weights.iter_mut().chain(l.bias.iter_mut()))
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.layers.len() == other.layers.len()
            && self
                .layers
                .iter()
                .zip(&other.layers)
                .all(|(a, b)| a.in_dim == b.in_dim && a.out_dim == b.out_dim && a.activation == b.activation)
    }

    /// Copies parameters from a shape-identical network.
    pub fn copy_params_from(&mut self, other: &Self) -> Result<()> {
        if !self.same_shape(other) {
            return Err(Error::Shape(format!("{:?} vs {:?}", self.dims(), other.dims())));
        }
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights.copy_from_slice(&b.weights);
            a.bias.copy_from_slice(&b.bias);
        }
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        self.params().all(|p| p.is_finite())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LayerGrads<T> {
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

/// Gradient buffers congruent with an [`Mlp`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Grads<T> {
    pub layers: Vec<LayerGrads<T>>,
}

impl<T: Scalar> Grads<T> {
    pub fn zeros_like(net: &Mlp<T>) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| LayerGrads { weights: vec![T::zero(); l.weights.len()], bias: vec![T::zero(); l.bias.len()] })
                .collect(),
        }
    }

    pub fn check_shape(&self, net: &Mlp<T>) -> Result<()> {
        let ok = self.layers.len() == net.layers.len()
            && self
                .layers
                .iter()
                .zip(&net.layers)
                .all(|(g, l)| g.weights.len() == l.weights.len() && g.bias.len() == l.bias.len());
        if ok {
            Ok(())
        } else {
            Err(Error::Shape("gradient buffers do not match network".into()))
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(l.bias.iter()))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut T> {
        self.layers.iter_mut().flat_map(|l| l.weights.iter_mut().chain(l.bias.iter_mut()))
    }

    pub fn scale(&mut self, k: T) {
        self.iter_mut().for_each(|g| *g *= k);
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (a, &b) in self.iter_mut().zip(other.iter()) {
            *a += b;
        }
    }

    pub fn l2_norm(&self) -> T {
        self.iter().map(|&g| g * g).sum::<T>().sqrt()
    }

    /// Rescales so the global L2 norm is at most `max_norm`.
    pub fn clip_norm(&mut self, max_norm: T) {
        let n = self.l2_norm();
        if n > max_norm && n > T::zero() {
            self.scale(max_norm / n);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.iter().all(|&g| g == T::zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(5)
    }

    #[test]
    fn zero_net_gives_zero() {
        let net = Mlp::<f64>::from_layers(vec![
            Dense::zeros(3, 4, Activation::Linear),
            Dense::zeros(4, 2, Activation::Linear),
        ])
        .unwrap();
        assert_eq!(net.forward(&[1.0, -2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn identity_layer_passes_input() {
        let mut l = Dense::<f64>::zeros(3, 3, Activation::Linear);
        for i in 0..3 {
            l.weights[i * 3 + i] = 1.0;
        }
        let net = Mlp::from_layers(vec![l]).unwrap();
        assert_eq!(net.forward(&[0.5, -1.5, 2.0]).unwrap(), vec![0.5, -1.5, 2.0]);
    }

    #[test]
    fn forward_is_deterministic_and_checks_dims() {
        let net = Mlp::<f64>::new(&[4, 8, 3], Activation::Tanh, Activation::Linear, 1.0, &mut rng()).unwrap();
        let x = [0.1, 0.2, -0.3, 0.4];
        assert_eq!(net.forward(&x).unwrap(), net.forward(&x).unwrap());
        assert!(matches!(net.forward(&[1.0]), Err(Error::Dimension { expected: 4, got: 1 })));
    }

    #[test]
    fn backward_requires_forward() {
        let net = Mlp::<f64>::new(&[2, 2], Activation::Tanh, Activation::Linear, 1.0, &mut rng()).unwrap();
        assert!(matches!(net.backward(&[1.0, 0.0]), Err(Error::NoForwardCache)));
    }

    #[test]
    fn zero_upstream_gives_zero_grads() {
        let mut net = Mlp::<f64>::new(&[3, 5, 2], Activation::Relu, Activation::Linear, 1.0, &mut rng()).unwrap();
        net.forward_train(&[1.0, 2.0, 3.0]).unwrap();
        assert!(net.backward(&[0.0, 0.0]).unwrap().is_zero());
    }

    #[test]
    fn scalar_linear_gradient() {
        let mut l = Dense::<f64>::zeros(1, 1, Activation::Linear);
        l.weights[0] = 0.7;
        let mut net = Mlp::from_layers(vec![l]).unwrap();
        net.forward_train(&[3.0]).unwrap();
        let g = net.backward(&[1.0]).unwrap();
        assert_eq!(g.layers[0].weights[0], 3.0);
        assert_eq!(g.layers[0].bias[0], 1.0);
    }

    #[test]
    fn orthogonal_rows_are_orthonormal() {
        let q = orthogonal_matrix(3, 7, &mut rng());
        for a in 0..3 {
            for b in 0..3 {
                let d: f64 = (0..7).map(|k| q[a * 7 + k] * q[b * 7 + k]).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-10);
            }
        }
        let q = orthogonal_matrix(6, 2, &mut rng());
        for a in 0..2 {
            for b in 0..2 {
                let d: f64 = (0..6).map(|k| q[k * 2 + a] * q[k * 2 + b]).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn from_layers_rejects_broken_chain() {
        let r = Mlp::<f64>::from_layers(vec![
            Dense::zeros(3, 4, Activation::Linear),
            Dense::zeros(5, 2, Activation::Linear),
        ]);
        assert!(matches!(r, Err(Error::Shape(_))));
    }

    #[test]
    fn softplus_is_stable() {
        assert!((softplus(0.0f64) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(softplus(1000.0f64), 1000.0);
        assert!(softplus(-1000.0f64) >= 0.0);
        assert!((sigmoid(0.0f64) - 0.5).abs() < 1e-15);
    }
}
