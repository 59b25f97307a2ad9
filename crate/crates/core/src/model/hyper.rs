use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::registry;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HyperParams {
    pub embed_dim: usize,
    pub hid: usize,
    pub window_sizes: Vec<usize>,
    pub filters_per_size: usize,
    /// Linear layers per task head.
    pub mlp_layers: usize,
    pub head_hidden: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub batch: usize,
    pub lr: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Registered sentence summary strategy.
    pub summary: String,
    /// Registered source of the per-word features fed to the word head.
    pub word_features: String,
    pub freeze_shared: bool,
    pub freeze_embeddings: bool,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            embed_dim: 100,
            hid: 64,
            window_sizes: vec![1, 2, 3],
            filters_per_size: 32,
            mlp_layers: 2,
            head_hidden: 64,
            lambda1: 0.5,
            lambda2: 0.5,
            batch: 32,
            lr: 1e-4,
            iterations: 1000,
            seed: 0,
            summary: "final".into(),
            word_features: "embedding".into(),
            freeze_shared: false,
            freeze_embeddings: false,
        }
    }
}

impl HyperParams {
    /// Sets the loss balance; `lambda1 + lambda2` must equal 1.
    pub fn with_lambdas(mut self, lambda1: f64, lambda2: f64) -> Result<Self> {
        self.lambda1 = lambda1;
        self.lambda2 = lambda2;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let (l1, l2) = (self.lambda1, self.lambda2);
        if !(l1.is_finite() && l2.is_finite()) || l1 < 0.0 || l2 < 0.0 || (l1 + l2 - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "lambda1 and lambda2 must be non-negative and sum to 1 (got {l1} and {l2})"
            )));
        }
        let positive = [
            ("embed_dim", self.embed_dim),
            ("hid", self.hid),
            ("filters_per_size", self.filters_per_size),
            ("mlp_layers", self.mlp_layers),
            ("head_hidden", self.head_hidden),
            ("batch", self.batch),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{name} must be positive")));
        }
        if self.window_sizes.is_empty() || self.window_sizes.contains(&0) {
            return Err(Error::Config("window sizes must be a nonempty list of positive integers".into()));
        }
        let mut sorted = self.window_sizes.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.window_sizes.len() {
            return Err(Error::Config("window sizes must be distinct".into()));
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::Config(format!("learning rate must be positive, got {}", self.lr)));
        }
        registry::summaries().get(&self.summary)?;
        registry::word_features().get(&self.word_features)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_constraint() {
        assert!(HyperParams::default().validate().is_ok());
        assert!(HyperParams::default().with_lambdas(1.0, 0.0).is_ok());
        assert!(HyperParams::default().with_lambdas(0.6, 0.6).is_err());
        assert!(HyperParams::default().with_lambdas(1.2, -0.2).is_err());
    }

    #[test]
    fn rejects_bad_windows_and_variants() {
        let hp = HyperParams {
            window_sizes: vec![2, 2],
            ..Default::default()
        };
        assert!(hp.validate().is_err());
        let hp = HyperParams {
            summary: "attention".into(),
            ..Default::default()
        };
        assert!(matches!(hp.validate(), Err(Error::Unknown(_))));
    }
}
