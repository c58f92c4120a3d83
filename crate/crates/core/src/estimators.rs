//! The likelihood-ratio (LR) and regression (REG) estimators.
//!
//! Both are pure functions of the policies and the logged data. REG never
//! looks at the behavior policy; it is LR with the behavior propensities
//! replaced by their empirical frequencies, `n(a)/n`.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{OpeError, Result};
use crate::instance::BanditInstance;
use crate::policy::Policy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Lr,
    Reg,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 2] = [EstimatorKind::Lr, EstimatorKind::Reg];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Lr => "lr",
            EstimatorKind::Reg => "reg",
        }
    }

    /// Point estimate on `data` for the instance's policies.
    pub fn estimate(self, instance: &BanditInstance, data: &Dataset) -> Result<f64> {
        match self {
            EstimatorKind::Lr => lr_value(instance.target(), instance.behavior(), data),
            EstimatorKind::Reg => reg_value(instance.target(), data),
        }
    }
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = OpeError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lr" => Ok(EstimatorKind::Lr),
            "reg" => Ok(EstimatorKind::Reg),
            other => Err(OpeError::InvalidConfig(format!("unknown estimator {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub value: f64,
    /// Per-sample importance weight applied to `R_i`.
    pub weights: Vec<f64>,
    /// Actions with `n(a) = 0`, ascending.
    pub unseen_actions: Vec<usize>,
}

fn check_dims(policy: &Policy, data: &Dataset, what: &'static str) -> Result<()> {
    if policy.num_actions() != data.num_actions() {
        return Err(OpeError::DimensionMismatch {
            what,
            got: policy.num_actions(),
            expected: data.num_actions(),
        });
    }
    Ok(())
}

fn check_lr_inputs(target: &Policy, behavior: &Policy, data: &Dataset) -> Result<()> {
    check_dims(target, data, "target")?;
    check_dims(behavior, data, "behavior")?;
    if data.is_empty() {
        return Err(OpeError::Precondition("LR needs at least one sample".into()));
    }
    for (index, &(action, _)) in data.samples().iter().enumerate() {
        if behavior.prob(action) == 0.0 {
            return Err(OpeError::ZeroPropensitySample { index, action });
        }
    }
    Ok(())
}

/// `(1/n) sum_i pi(A_i)/pi_D(A_i) R_i` without building a report.
pub fn lr_value(target: &Policy, behavior: &Policy, data: &Dataset) -> Result<f64> {
    check_lr_inputs(target, behavior, data)?;
    let total: f64 = data
        .samples()
        .iter()
        .map(|&(a, r)| target.prob(a) / behavior.prob(a) * r)
        .sum();
    Ok(total / data.len() as f64)
}

pub fn lr_estimate(target: &Policy, behavior: &Policy, data: &Dataset) -> Result<EstimateReport> {
    let value = lr_value(target, behavior, data)?;
    let weights = data
        .samples()
        .iter()
        .map(|&(a, _)| target.prob(a) / behavior.prob(a))
        .collect();
    Ok(EstimateReport {
        value,
        weights,
        unseen_actions: data.unseen_actions(),
    })
}

/// `sum_{a: n(a) > 0} pi(a) R(a)/n(a)` without building a report.
pub fn reg_value(target: &Policy, data: &Dataset) -> Result<f64> {
    check_dims(target, data, "target")?;
    Ok(data
        .counts()
        .iter()
        .zip(data.reward_sums())
        .enumerate()
        .filter(|(_, (&n, _))| n > 0)
        .map(|(a, (&n, &sum))| target.prob(a) * (sum / n as f64))
        .sum())
}

/// Implicit per-sample weights of REG, `pi(A_i) / (n(A_i)/n)`.
fn empirical_weights(target: &Policy, data: &Dataset) -> Vec<f64> {
    let n = data.len() as f64;
    data.samples()
        .iter()
        .map(|&(a, _)| target.prob(a) * n / data.count(a) as f64)
        .collect()
}

pub fn reg_estimate(target: &Policy, data: &Dataset) -> Result<EstimateReport> {
    let value = reg_value(target, data)?;
    Ok(EstimateReport {
        value,
        weights: empirical_weights(target, data),
        unseen_actions: data.unseen_actions(),
    })
}

/// REG written as LR with empirical propensities. Agrees with
/// [`reg_estimate`] up to floating-point rounding.
pub fn reg_estimate_reweighted(target: &Policy, data: &Dataset) -> Result<EstimateReport> {
    check_dims(target, data, "target")?;
    let weights = empirical_weights(target, data);
    let value = if data.is_empty() {
        0.0
    } else {
        weights
            .iter()
            .zip(data.samples())
            .map(|(w, &(_, r))| w * r)
            .sum::<f64>()
            / data.len() as f64
    };
    Ok(EstimateReport {
        value,
        weights,
        unseen_actions: data.unseen_actions(),
    })
}

/// `n(a)/n` per action. Not validated as a policy; may contain zeros.
pub fn empirical_propensity(data: &Dataset, num_actions: usize) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(OpeError::Precondition("empirical propensity of an empty dataset".into()));
    }
    if num_actions != data.num_actions() {
        return Err(OpeError::DimensionMismatch {
            what: "dataset",
            got: data.num_actions(),
            expected: num_actions,
        });
    }
    let n = data.len() as f64;
    Ok(data.counts().iter().map(|&c| c as f64 / n).collect())
}
