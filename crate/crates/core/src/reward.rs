use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{OpeError, Result};

/// Reward distribution of a single action.
///
/// `Sum` is the law of a sum of independent parts; it arises when a
/// trajectory of an MDP is collapsed into one composite action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RewardDist {
    Point {
        #[serde(alias = "r")]
        value: f64,
    },
    Bernoulli {
        p: f64,
    },
    Normal {
        mean: f64,
        var: f64,
    },
    Sum {
        parts: Vec<RewardDist>,
    },
}

impl RewardDist {
    pub fn point(value: f64) -> Self {
        RewardDist::Point { value }
    }

    pub fn bernoulli(p: f64) -> Self {
        RewardDist::Bernoulli { p }
    }

    pub fn normal(mean: f64, var: f64) -> Self {
        RewardDist::Normal { mean, var }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RewardDist::Point { value } if !value.is_finite() => Err(OpeError::InvalidReward(
                format!("point mass at non-finite value {value}"),
            )),
            RewardDist::Bernoulli { p } if !(0.0..=1.0).contains(p) => Err(
                OpeError::InvalidReward(format!("bernoulli parameter {p} outside [0, 1]")),
            ),
            RewardDist::Normal { mean, var } if !mean.is_finite() || !var.is_finite() || *var < 0.0 => {
                Err(OpeError::InvalidReward(format!(
                    "normal with mean {mean} and variance {var}"
                )))
            }
            RewardDist::Sum { parts } => parts.iter().try_for_each(RewardDist::validate),
            _ => Ok(()),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            RewardDist::Point { value } => *value,
            RewardDist::Bernoulli { p } => *p,
            RewardDist::Normal { mean, .. } => *mean,
            RewardDist::Sum { parts } => parts.iter().map(RewardDist::mean).sum(),
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            RewardDist::Point { .. } => 0.0,
            RewardDist::Bernoulli { p } => p * (1.0 - p),
            RewardDist::Normal { var, .. } => *var,
            RewardDist::Sum { parts } => parts.iter().map(RewardDist::variance).sum(),
        }
    }

    pub fn is_discrete(&self) -> bool {
        match self {
            RewardDist::Point { .. } | RewardDist::Bernoulli { .. } => true,
            RewardDist::Normal { var, .. } => *var == 0.0,
            RewardDist::Sum { parts } => parts.iter().all(RewardDist::is_discrete),
        }
    }

    /// Finite support as `(value, probability)` pairs, zero-probability atoms
    /// dropped. `None` for continuous laws.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            RewardDist::Point { value } => Some(vec![(*value, 1.0)]),
            RewardDist::Bernoulli { p } => Some(
                [(0.0, 1.0 - p), (1.0, *p)]
                    .into_iter()
                    .filter(|&(_, q)| q > 0.0)
                    .collect(),
            ),
            RewardDist::Normal { mean, var } if *var == 0.0 => Some(vec![(*mean, 1.0)]),
            RewardDist::Normal { .. } => None,
            RewardDist::Sum { parts } => {
                let mut acc = vec![(0.0, 1.0)];
                for part in parts {
                    let atoms = part.atoms()?;
                    acc = acc
                        .iter()
                        .flat_map(|&(v, p)| atoms.iter().map(move |&(w, q)| (v + w, p * q)))
                        .collect();
                }
                Some(acc)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            RewardDist::Point { value } => *value,
            RewardDist::Bernoulli { p } => {
                if rng.random_bool(*p) {
                    1.0
                } else {
                    0.0
                }
            }
            RewardDist::Normal { mean, var } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + var.sqrt() * z
            }
            RewardDist::Sum { parts } => parts.iter().map(|d| d.sample(rng)).sum(),
        }
    }
}

/// Per-action reward laws plus an optional cap on the mean rewards.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardModel {
    dists: Vec<RewardDist>,
    rmax: Option<f64>,
}

impl RewardModel {
    pub fn new(dists: Vec<RewardDist>, rmax: Option<f64>) -> Result<Self> {
        for d in &dists {
            d.validate()?;
        }
        if let Some(cap) = rmax {
            if !cap.is_finite() || cap < 0.0 {
                return Err(OpeError::InvalidReward(format!("rmax {cap} must be finite and >= 0")));
            }
        }
        Ok(Self { dists, rmax })
    }

    pub fn num_actions(&self) -> usize {
        self.dists.len()
    }

    pub fn dist(&self, action: usize) -> &RewardDist {
        &self.dists[action]
    }

    pub fn dists(&self) -> &[RewardDist] {
        &self.dists
    }

    pub fn mean(&self, action: usize) -> f64 {
        self.dists[action].mean()
    }

    pub fn variance(&self, action: usize) -> f64 {
        self.dists[action].variance()
    }

    pub fn means(&self) -> Vec<f64> {
        self.dists.iter().map(RewardDist::mean).collect()
    }

    pub fn variances(&self) -> Vec<f64> {
        self.dists.iter().map(RewardDist::variance).collect()
    }

    pub fn rmax(&self) -> Option<f64> {
        self.rmax
    }

    /// Cap used by bound computations: the declared `rmax`, or the largest
    /// mean (floored at zero) when none is declared.
    pub fn effective_rmax(&self) -> f64 {
        self.rmax
            .unwrap_or_else(|| self.means().into_iter().fold(0.0, f64::max))
    }

    /// Checks `0 <= mean(a) <= rmax` for every action.
    pub fn check_range(&self) -> Result<()> {
        let cap = self.effective_rmax();
        for (a, d) in self.dists.iter().enumerate() {
            let m = d.mean();
            if m < 0.0 || m > cap {
                return Err(OpeError::Precondition(format!(
                    "mean reward {m} of action {a} outside [0, {cap}]"
                )));
            }
        }
        Ok(())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.dists.iter().all(|d| d.mean() >= 0.0)
    }

    pub fn is_discrete(&self) -> bool {
        self.dists.iter().all(RewardDist::is_discrete)
    }

    pub fn all_normal(&self) -> bool {
        self.dists
            .iter()
            .all(|d| matches!(d, RewardDist::Normal { .. }))
    }
}
