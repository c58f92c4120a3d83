use serde::{Deserialize, Serialize};

use crate::error::{OpeError, Result};

/// Allowed deviation of a probability vector's sum from one.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// A distribution over `K` actions, indexed from zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Policy {
    probs: Vec<f64>,
}

impl Policy {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(OpeError::InvalidPolicy("empty probability vector".into()));
        }
        for (a, &p) in probs.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(OpeError::InvalidPolicy(format!(
                    "probability of action {a} is {p}, outside [0, 1]"
                )));
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(OpeError::InvalidPolicy(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { probs })
    }

    /// Normalizes nonnegative weights into a policy.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(OpeError::InvalidPolicy(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(OpeError::InvalidPolicy("weights sum to zero".into()));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn uniform(k: usize) -> Result<Self> {
        Self::from_weights(&vec![1.0; k])
    }

    /// Point mass on `action`.
    pub fn deterministic(k: usize, action: usize) -> Result<Self> {
        if action >= k {
            return Err(OpeError::ActionOutOfRange { action, actions: k });
        }
        let mut probs = vec![0.0; k];
        probs[action] = 1.0;
        Self::new(probs)
    }

    pub fn num_actions(&self) -> usize {
        self.probs.len()
    }

    pub fn prob(&self, action: usize) -> f64 {
        self.probs[action]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Smallest action probability, `min_a pi(a)`.
    pub fn min_prob(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Total mass of a set of actions.
    pub fn mass(&self, actions: &[usize]) -> f64 {
        actions.iter().map(|&a| self.probs[a]).sum()
    }
}

impl TryFrom<Vec<f64>> for Policy {
    type Error = OpeError;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Self::new(probs)
    }
}

impl From<Policy> for Vec<f64> {
    fn from(p: Policy) -> Self {
        p.probs
    }
}
