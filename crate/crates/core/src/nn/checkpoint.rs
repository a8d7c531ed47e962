//! Versioned JSON dump of layer shapes and row-major parameters.

use serde::{Deserialize, Serialize};

use super::mlp::{Dense, Mlp};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const FORMAT: &str = "uavdc-mlp";
pub const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct NetFile<T> {
    format: String,
    version: u32,
    layers: Vec<Dense<T>>,
}

impl<T: Scalar> Mlp<T> {
    pub fn to_checkpoint(&self) -> Result<String> {
        let file = NetFile { format: FORMAT.into(), version: VERSION, layers: self.layers().to_vec() };
        Ok(serde_json::to_string(&file)?)
    }

    /// Parses a checkpoint, checking format tag, version and internal shape
    /// consistency.
    pub fn from_checkpoint(text: &str) -> Result<Self> {
        let file: NetFile<T> = serde_json::from_str(text)?;
        if file.format != FORMAT {
            return Err(Error::Checkpoint(format!("unknown format tag {:?}", file.format)));
        }
        if file.version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {}", file.version)));
        }
        Mlp::from_layers(file.layers)
    }

    /// Replaces this network's parameters with the checkpoint's; shapes must
    /// match exactly.
    pub fn load_checkpoint(&mut self, text: &str) -> Result<()> {
        let other = Self::from_checkpoint(text)?;
        if !self.same_shape(&other) {
            return Err(Error::Checkpoint(format!(
                "shape mismatch: network is {:?}, checkpoint is {:?}",
                self.dims(),
                other.dims()
            )));
        }
        self.copy_params_from(&other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Activation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let net = Mlp::<f64>::new(&[3, 7, 2], Activation::Tanh, Activation::Linear, 0.5, &mut rng).unwrap();
        let text = net.to_checkpoint().unwrap();
        let back = Mlp::<f64>::from_checkpoint(&text).unwrap();
        assert_eq!(net, back);

        let mut fresh = Mlp::<f64>::new(&[3, 7, 2], Activation::Tanh, Activation::Linear, 0.5, &mut rng).unwrap();
        assert_ne!(fresh, net);
        fresh.load_checkpoint(&text).unwrap();
        assert_eq!(fresh, net);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let net = Mlp::<f64>::new(&[3, 7, 2], Activation::Tanh, Activation::Linear, 0.5, &mut rng).unwrap();
        let mut other = Mlp::<f64>::new(&[3, 8, 2], Activation::Tanh, Activation::Linear, 0.5, &mut rng).unwrap();
        assert!(matches!(other.load_checkpoint(&net.to_checkpoint().unwrap()), Err(Error::Checkpoint(_))));
    }

    #[test]
    fn corrupt_files_rejected() {
        assert!(Mlp::<f64>::from_checkpoint(r#"{"format":"other","version":1,"layers":[]}"#).is_err());
        assert!(Mlp::<f64>::from_checkpoint(r#"{"format":"uavdc-mlp","version":9,"layers":[]}"#).is_err());
        let bad = r#"{"format":"uavdc-mlp","version":1,"layers":[
            {"in_dim":2,"out_dim":1,"weights":[1.0],"bias":[0.0],"activation":"linear"}]}"#;
        assert!(matches!(Mlp::<f64>::from_checkpoint(bad), Err(Error::Shape(_))));
    }
}
