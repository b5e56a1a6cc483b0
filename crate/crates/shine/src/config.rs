//! Run configuration: hyperparameters, architecture, and model-shape choices.
//!
//! Mirrors the JSON config file; every field is optional there and defaults
//! to the values below. CLI flags override file values.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, ShineError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationKind {
    Summation,
    MaxPooling,
    Concatenation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityKind {
    InnerProduct,
    Euclidean,
    LogisticRegression,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Reconstruction weight of non-zero elements.
    pub alpha: f64,
    /// Social reconstruction balance; 0 disables the social autoencoder.
    pub lambda1: f64,
    /// Profile reconstruction balance; 0 disables the profile autoencoder.
    pub lambda2: f64,
    /// Supervised term balance.
    pub lambda3: f64,
    /// L2 regularization balance.
    pub lambda4: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Stop when the relative change of the epoch mean loss falls below this.
    pub convergence_tol: f64,
    pub adagrad_epsilon: f64,
    pub seed: u64,
    /// Hidden layer width; scaled down for inputs narrower than this.
    pub hidden_dim: usize,
    pub embedding_dim: usize,
    pub aggregation: AggregationKind,
    pub similarity: SimilarityKind,
    /// Distinct source/target autoencoder sets when true.
    pub asymmetric: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            alpha: 10.0,
            lambda1: 1.0,
            lambda2: 1.0,
            lambda3: 20.0,
            lambda4: 0.01,
            learning_rate: 0.05,
            batch_size: 128,
            max_epochs: 200,
            convergence_tol: 1e-4,
            adagrad_epsilon: 1e-8,
            seed: 0,
            hidden_dim: 1000,
            embedding_dim: 100,
            aggregation: AggregationKind::Concatenation,
            similarity: SimilarityKind::InnerProduct,
            asymmetric: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alpha < 1.0 {
            return Err(ShineError::InvalidConfig("alpha must be >= 1".into()));
        }
        for (name, v) in [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("lambda3", self.lambda3),
            ("lambda4", self.lambda4),
            ("learning_rate", self.learning_rate),
            ("convergence_tol", self.convergence_tol),
            ("adagrad_epsilon", self.adagrad_epsilon),
        ] {
            if v < 0.0 || !v.is_finite() {
                return Err(ShineError::InvalidConfig(format!(
                    "{name} must be finite and non-negative"
                )));
            }
        }
        if self.batch_size == 0 {
            return Err(ShineError::InvalidConfig("batch_size must be >= 1".into()));
        }
        if self.hidden_dim == 0 || self.embedding_dim == 0 {
            return Err(ShineError::InvalidConfig(
                "hidden_dim and embedding_dim must be >= 1".into(),
            ));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: TrainConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Stable fingerprint for reports.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(serde_json::to_string(self).expect("config serializes"));
        let d = hasher.finalize();
        d.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Layer plan for an autoencoder over inputs of width `n_in`:
    /// `[n_in, hidden, embedding, hidden, n_in]`, with hidden and embedding
    /// scaled down proportionally when `n_in` is narrower than `hidden_dim`.
    pub fn layer_dims(&self, n_in: usize) -> Vec<usize> {
        let (h, e) = if n_in < self.hidden_dim {
            let scale = n_in as f64 / self.hidden_dim as f64;
            let e = ((self.embedding_dim as f64 * scale).round() as usize).max(1);
            (n_in.max(1), e.min(n_in.max(1)))
        } else {
            (self.hidden_dim, self.embedding_dim)
        };
        vec![n_in, h, e, h, n_in]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_and_fingerprint_stable() {
        let cfg = TrainConfig::default();
        let cfg2 = TrainConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, cfg2);
        assert_eq!(cfg.fingerprint(), cfg2.fingerprint());
    }

    #[test]
    fn empty_json_gives_defaults() {
        let cfg = TrainConfig::from_json("{}").unwrap();
        assert_eq!(cfg, TrainConfig::default());
        assert_eq!(cfg.alpha, 10.0);
        assert_eq!(cfg.lambda3, 20.0);
    }

    #[test]
    fn layer_dims_scaling() {
        let cfg = TrainConfig::default();
        assert_eq!(cfg.layer_dims(4000), vec![4000, 1000, 100, 1000, 4000]);
        // narrow input scales proportionally
        assert_eq!(cfg.layer_dims(100), vec![100, 100, 10, 100, 100]);
        assert_eq!(cfg.layer_dims(2), vec![2, 2, 1, 2, 2]);
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(TrainConfig::from_json("{\"alpha\": 0.5}").is_err());
        assert!(TrainConfig::from_json("{\"batch_size\": 0}").is_err());
        assert!(TrainConfig::from_json("{\"bogus\": 1}").is_err());
    }
}
