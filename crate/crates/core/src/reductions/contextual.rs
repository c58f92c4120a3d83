use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::draw_index;
use crate::error::{OpeError, Result};
use crate::instance::BanditInstance;
use crate::policy::Policy;
use crate::reward::{RewardDist, RewardModel};
use crate::rng;

/// Context distribution `mu`, per-context behavior and target policies and
/// per-`(context, action)` reward laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ContextualFile", into = "ContextualFile")]
pub struct ContextualInstance {
    context: Policy,
    behavior: Vec<Policy>,
    target: Vec<Policy>,
    rewards: Vec<Vec<RewardDist>>,
}

/// A logged `(context, action, reward)` triple.
pub type ContextualSample = (usize, usize, f64);

impl ContextualInstance {
    pub fn new(
        context: Policy,
        behavior: Vec<Policy>,
        target: Vec<Policy>,
        rewards: Vec<Vec<RewardDist>>,
    ) -> Result<Self> {
        let m = context.num_actions();
        let k = behavior.first().map_or(0, Policy::num_actions);
        let rows_ok = |rows: usize| rows == m;
        if !rows_ok(behavior.len()) || !rows_ok(target.len()) || !rows_ok(rewards.len()) {
            return Err(OpeError::DimensionMismatch {
                what: "contextual tables",
                got: behavior.len().min(target.len()).min(rewards.len()),
                expected: m,
            });
        }
        for x in 0..m {
            if behavior[x].num_actions() != k || target[x].num_actions() != k || rewards[x].len() != k {
                return Err(OpeError::DimensionMismatch {
                    what: "contextual row",
                    got: rewards[x].len(),
                    expected: k,
                });
            }
            for d in &rewards[x] {
                d.validate()?;
            }
        }
        Ok(Self {
            context,
            behavior,
            target,
            rewards,
        })
    }

    pub fn num_contexts(&self) -> usize {
        self.context.num_actions()
    }

    pub fn num_actions(&self) -> usize {
        self.behavior[0].num_actions()
    }

    pub fn context(&self) -> &Policy {
        &self.context
    }

    pub fn behavior(&self, x: usize) -> &Policy {
        &self.behavior[x]
    }

    pub fn target(&self, x: usize) -> &Policy {
        &self.target[x]
    }

    pub fn reward(&self, x: usize, a: usize) -> &RewardDist {
        &self.rewards[x][a]
    }

    /// Index of `(x, a)` in the reduced bandit.
    pub fn composite(&self, x: usize, a: usize) -> usize {
        x * self.num_actions() + a
    }

    /// Joint target mass `mu(x) pi(a|x)`.
    pub fn target_mass(&self, x: usize, a: usize) -> f64 {
        self.context.prob(x) * self.target[x].prob(a)
    }

    pub fn behavior_mass(&self, x: usize, a: usize) -> f64 {
        self.context.prob(x) * self.behavior[x].prob(a)
    }

    /// `sum_x mu(x) sum_a pi(a|x) r(x, a)`, computed directly.
    pub fn policy_value(&self) -> f64 {
        (0..self.num_contexts())
            .map(|x| {
                self.context.prob(x)
                    * (0..self.num_actions())
                        .map(|a| self.target[x].prob(a) * self.rewards[x][a].mean())
                        .sum::<f64>()
            })
            .sum()
    }

    /// `n` logged triples under `mu` and the behavior policy.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<ContextualSample> {
        let mut rng = rng::seeded(seed);
        (0..n)
            .map(|_| {
                let x = draw_index(self.context.probs(), rng.random());
                let a = draw_index(self.behavior[x].probs(), rng.random());
                (x, a, self.rewards[x][a].sample(&mut rng))
            })
            .collect()
    }
}

/// Bandit over the `M * K` pairs with behavior `mu (x) pi_D` and target
/// `mu (x) pi`. Pair `(x, a)` becomes action `x * K + a`.
pub fn contextual_to_bandit(instance: &ContextualInstance) -> Result<BanditInstance> {
    let (m, k) = (instance.num_contexts(), instance.num_actions());
    let mut behavior = Vec::with_capacity(m * k);
    let mut target = Vec::with_capacity(m * k);
    let mut rewards = Vec::with_capacity(m * k);
    for x in 0..m {
        for a in 0..k {
            behavior.push(instance.behavior_mass(x, a));
            target.push(instance.target_mass(x, a));
            rewards.push(instance.rewards[x][a].clone());
        }
    }
    BanditInstance::new(
        Policy::new(behavior)?,
        Policy::new(target)?,
        RewardModel::new(rewards, None)?,
    )
}

/// REG on contextual data in one pass over the samples.
///
/// Only pairs that actually occur are tracked, so memory and time do not
/// depend on `M * K`. Pairs are summed in composite-index order, which makes
/// the result bit-identical to REG on the reduced bandit.
pub fn contextual_reg_fast(instance: &ContextualInstance, data: &[ContextualSample]) -> f64 {
    let mut cells: BTreeMap<usize, (u64, f64, f64)> = BTreeMap::new();
    for &(x, a, r) in data {
        let cell = cells
            .entry(instance.composite(x, a))
            .or_insert_with(|| (0, 0.0, instance.target_mass(x, a)));
        cell.0 += 1;
        cell.1 += r;
    }
    cells
        .values()
        .map(|&(count, sum, mass)| mass * (sum / count as f64))
        .sum()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ContextualFile {
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "K")]
    k: usize,
    context: Vec<f64>,
    behavior: Vec<Vec<f64>>,
    target: Vec<Vec<f64>>,
    rewards: Vec<Vec<RewardDist>>,
}

impl TryFrom<ContextualFile> for ContextualInstance {
    type Error = OpeError;

    fn try_from(f: ContextualFile) -> Result<Self> {
        if f.context.len() != f.m {
            return Err(OpeError::DimensionMismatch {
                what: "context",
                got: f.context.len(),
                expected: f.m,
            });
        }
        let rows = |v: Vec<Vec<f64>>| v.into_iter().map(Policy::new).collect::<Result<Vec<_>>>();
        let inst = ContextualInstance::new(Policy::new(f.context)?, rows(f.behavior)?, rows(f.target)?, f.rewards)?;
        if inst.num_actions() != f.k {
            return Err(OpeError::DimensionMismatch {
                what: "actions",
                got: inst.num_actions(),
                expected: f.k,
            });
        }
        Ok(inst)
    }
}

impl From<ContextualInstance> for ContextualFile {
    fn from(c: ContextualInstance) -> Self {
        let rows = |v: &[Policy]| v.iter().map(|p| p.probs().to_vec()).collect();
        ContextualFile {
            m: c.num_contexts(),
            k: c.num_actions(),
            context: c.context.probs().to_vec(),
            behavior: rows(&c.behavior),
            target: rows(&c.target),
            rewards: c.rewards,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Dataset;
    use crate::estimators::reg_value;

    fn uniform_instance(m: usize, k: usize) -> ContextualInstance {
        ContextualInstance::new(
            Policy::uniform(m).unwrap(),
            vec![Policy::uniform(k).unwrap(); m],
            vec![Policy::uniform(k).unwrap(); m],
            (0..m)
                .map(|x| (0..k).map(|a| RewardDist::bernoulli(((x + a) % 3) as f64 / 3.0)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn product_behavior() {
        let b = contextual_to_bandit(&uniform_instance(2, 2)).unwrap();
        assert_eq!(b.behavior().probs(), &[0.25; 4]);
    }

    #[test]
    fn single_context_is_the_bandit() {
        let c = ContextualInstance::new(
            Policy::new(vec![1.0]).unwrap(),
            vec![Policy::new(vec![0.3, 0.7]).unwrap()],
            vec![Policy::new(vec![0.6, 0.4]).unwrap()],
            vec![vec![RewardDist::point(0.2), RewardDist::bernoulli(0.5)]],
        )
        .unwrap();
        let b = contextual_to_bandit(&c).unwrap();
        assert_eq!(b.behavior().probs(), &[0.3, 0.7]);
        assert_eq!(b.target().probs(), &[0.6, 0.4]);
        assert_eq!(b.policy_value(), c.policy_value());
    }

    #[test]
    fn fast_reg_matches_reduced_bitwise() {
        let c = uniform_instance(3, 4);
        let b = contextual_to_bandit(&c).unwrap();
        for seed in 0..50 {
            let data = c.sample(1 + seed as usize % 17, seed);
            let flat: Vec<(usize, f64)> = data.iter().map(|&(x, a, r)| (c.composite(x, a), r)).collect();
            let ds = Dataset::from_samples(12, &flat).unwrap();
            let slow = reg_value(b.target(), &ds).unwrap();
            assert_eq!(contextual_reg_fast(&c, &data).to_bits(), slow.to_bits());
        }
        assert_eq!(contextual_reg_fast(&c, &[]), 0.0);
    }

    #[test]
    fn json_round_trip() {
        let c = uniform_instance(2, 3);
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains("\"M\":2"));
        let back: ContextualInstance = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }
}
