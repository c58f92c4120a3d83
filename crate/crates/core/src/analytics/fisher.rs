use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{OpeError, Result};
use crate::policy::Policy;

/// Per-sample Fisher information of the mean-reward vector under normal
/// rewards, `diag(pi_D(a) / sigma^2(a))`, and the gradient `pi` of the
/// policy value with respect to those means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherInfo {
    pub diagonal: Vec<f64>,
    pub gradient: Vec<f64>,
}

impl FisherInfo {
    pub fn new(behavior: &Policy, target: &Policy, sigma2: &[f64]) -> Result<Self> {
        let k = behavior.num_actions();
        if target.num_actions() != k || sigma2.len() != k {
            return Err(OpeError::DimensionMismatch {
                what: "fisher inputs",
                got: sigma2.len(),
                expected: k,
            });
        }
        if sigma2.iter().any(|&s| s.is_nan() || s <= 0.0) || behavior.probs().iter().any(|&q| q <= 0.0) {
            return Err(OpeError::Precondition(
                "Fisher information needs positive variances and propensities".into(),
            ));
        }
        Ok(Self {
            diagonal: behavior.probs().iter().zip(sigma2).map(|(q, s)| q / s).collect(),
            gradient: target.probs().to_vec(),
        })
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&self.diagonal))
    }

    /// `g^T F^{-1} g` through a general matrix inverse.
    pub fn quadratic_form(&self) -> Result<f64> {
        let inv = self
            .matrix()
            .try_inverse()
            .ok_or_else(|| OpeError::Precondition("singular Fisher information".into()))?;
        let g = DVector::from_column_slice(&self.gradient);
        Ok(g.dot(&(inv * &g)))
    }
}
