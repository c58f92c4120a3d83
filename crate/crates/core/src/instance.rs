use serde::{Deserialize, Serialize};

use crate::error::{OpeError, Result};
use crate::policy::Policy;
use crate::reward::{RewardDist, RewardModel};

/// A finite-armed off-policy evaluation problem: logging policy, target
/// policy and the (unknown to estimators) reward laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceFile", into = "InstanceFile")]
pub struct BanditInstance {
    behavior: Policy,
    target: Policy,
    rewards: RewardModel,
    unsupported: Vec<usize>,
}

impl BanditInstance {
    /// Builds an instance. Actions the target takes but the behavior policy
    /// never does are recorded; see [`BanditInstance::is_identifiable`].
    pub fn new(behavior: Policy, target: Policy, rewards: RewardModel) -> Result<Self> {
        let k = behavior.num_actions();
        if target.num_actions() != k {
            return Err(OpeError::DimensionMismatch {
                what: "target",
                got: target.num_actions(),
                expected: k,
            });
        }
        if rewards.num_actions() != k {
            return Err(OpeError::DimensionMismatch {
                what: "rewards",
                got: rewards.num_actions(),
                expected: k,
            });
        }
        let unsupported = (0..k)
            .filter(|&a| target.prob(a) > 0.0 && behavior.prob(a) == 0.0)
            .collect();
        Ok(Self {
            behavior,
            target,
            rewards,
            unsupported,
        })
    }

    pub fn num_actions(&self) -> usize {
        self.behavior.num_actions()
    }

    pub fn behavior(&self) -> &Policy {
        &self.behavior
    }

    pub fn target(&self) -> &Policy {
        &self.target
    }

    pub fn rewards(&self) -> &RewardModel {
        &self.rewards
    }

    /// Actions with positive target mass and zero behavior mass.
    pub fn unsupported_actions(&self) -> &[usize] {
        &self.unsupported
    }

    pub fn is_identifiable(&self) -> bool {
        self.unsupported.is_empty()
    }

    pub fn require_identifiable(&self) -> Result<()> {
        match self.unsupported.first() {
            Some(&action) => Err(OpeError::Unidentifiable { action }),
            None => Ok(()),
        }
    }

    /// `sum_a pi(a) r(a)`.
    pub fn policy_value(&self) -> f64 {
        (0..self.num_actions())
            .map(|a| self.target.prob(a) * self.rewards.mean(a))
            .sum()
    }

    pub fn with_behavior(&self, behavior: Policy) -> Result<Self> {
        Self::new(behavior, self.target.clone(), self.rewards.clone())
    }

    pub fn with_rewards(&self, rewards: RewardModel) -> Result<Self> {
        Self::new(self.behavior.clone(), self.target.clone(), rewards)
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }
}

/// On-disk layout of an instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(rename = "K")]
    pub k: usize,
    pub behavior: Vec<f64>,
    pub target: Vec<f64>,
    pub rewards: Vec<RewardDist>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rmax: Option<f64>,
}

impl TryFrom<InstanceFile> for BanditInstance {
    type Error = OpeError;

    fn try_from(f: InstanceFile) -> Result<Self> {
        if f.behavior.len() != f.k {
            return Err(OpeError::DimensionMismatch {
                what: "behavior",
                got: f.behavior.len(),
                expected: f.k,
            });
        }
        BanditInstance::new(
            Policy::new(f.behavior)?,
            Policy::new(f.target)?,
            RewardModel::new(f.rewards, f.rmax)?,
        )
    }
}

impl From<BanditInstance> for InstanceFile {
    fn from(inst: BanditInstance) -> Self {
        InstanceFile {
            k: inst.num_actions(),
            behavior: inst.behavior.probs().to_vec(),
            target: inst.target.probs().to_vec(),
            rewards: inst.rewards.dists().to_vec(),
            rmax: inst.rewards.rmax(),
        }
    }
}
