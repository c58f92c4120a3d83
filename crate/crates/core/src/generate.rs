//! Random small instances for property sweeps and self-checks.

use rand::Rng;

use crate::instance::BanditInstance;
use crate::policy::Policy;
use crate::reductions::{ContextualInstance, MdpInstance};
use crate::reward::{RewardDist, RewardModel};

/// Probability vector of length `k`; with `sparse`, each entry is zeroed
/// with probability 1/4 (at least one entry stays positive).
pub fn random_policy<R: Rng + ?Sized>(rng: &mut R, k: usize, sparse: bool) -> Policy {
    let mut w: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    if sparse {
        let keep = rng.random_range(0..k);
        for (a, x) in w.iter_mut().enumerate() {
            if a != keep && rng.random_bool(0.25) {
                *x = 0.0;
            }
        }
    }
    Policy::from_weights(&w).expect("positive weights")
}

/// Point-mass or Bernoulli reward with mean in `[0, 1]`.
pub fn random_discrete_reward<R: Rng + ?Sized>(rng: &mut R) -> RewardDist {
    if rng.random_bool(0.5) {
        RewardDist::point(rng.random_range(0.0..=1.0))
    } else {
        RewardDist::bernoulli(rng.random_range(0.0..=1.0))
    }
}

/// `K` in `2..=max_k`, fully supported behavior, possibly sparse target,
/// discrete rewards in `[0, 1]` with declared `rmax = 1`.
pub fn random_discrete_instance<R: Rng + ?Sized>(rng: &mut R, max_k: usize) -> BanditInstance {
    let k = rng.random_range(2..=max_k.max(2));
    let behavior = random_policy(rng, k, false);
    let target = random_policy(rng, k, true);
    let rewards = (0..k).map(|_| random_discrete_reward(rng)).collect();
    BanditInstance::new(behavior, target, RewardModel::new(rewards, Some(1.0)).expect("valid rewards"))
        .expect("valid instance")
}

/// Normal rewards with means in `[0, 1]` and variances in `[0.01, 1]`.
pub fn random_normal_instance<R: Rng + ?Sized>(rng: &mut R, max_k: usize) -> BanditInstance {
    let k = rng.random_range(2..=max_k.max(2));
    let behavior = random_policy(rng, k, false);
    let target = random_policy(rng, k, true);
    let rewards = (0..k)
        .map(|_| RewardDist::normal(rng.random_range(0.0..=1.0), rng.random_range(0.01..=1.0)))
        .collect();
    BanditInstance::new(behavior, target, RewardModel::new(rewards, None).expect("valid rewards"))
        .expect("valid instance")
}

pub fn random_contextual<R: Rng + ?Sized>(rng: &mut R, max_m: usize, max_k: usize) -> ContextualInstance {
    let m = rng.random_range(1..=max_m);
    let k = rng.random_range(1..=max_k);
    let context = random_policy(rng, m, false);
    let behavior = (0..m).map(|_| random_policy(rng, k, false)).collect();
    let target = (0..m).map(|_| random_policy(rng, k, true)).collect();
    let rewards = (0..m)
        .map(|_| (0..k).map(|_| random_discrete_reward(rng)).collect())
        .collect();
    ContextualInstance::new(context, behavior, target, rewards).expect("valid contextual instance")
}

/// MDP with sparse random transitions and discrete rewards.
pub fn random_mdp<R: Rng + ?Sized>(rng: &mut R, max_states: usize, max_actions: usize, max_horizon: usize) -> MdpInstance {
    let n = rng.random_range(1..=max_states);
    let k = rng.random_range(1..=max_actions);
    let h = rng.random_range(1..=max_horizon);
    let start = random_policy(rng, n, true).probs().to_vec();
    let transitions = (0..n)
        .map(|_| (0..k).map(|_| random_policy(rng, n, true).probs().to_vec()).collect())
        .collect();
    let rewards = (0..n)
        .map(|_| (0..k).map(|_| random_discrete_reward(rng)).collect())
        .collect();
    let behavior = (0..n).map(|_| random_policy(rng, k, false)).collect();
    let target = (0..n).map(|_| random_policy(rng, k, true)).collect();
    MdpInstance::new(h, start, transitions, rewards, behavior, target).expect("valid mdp")
}
