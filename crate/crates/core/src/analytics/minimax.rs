//! Minimax risk lower bound over the class of reward laws with means in
//! `[0, rmax]` and variances capped by `sigma2`.

use serde::{Deserialize, Serialize};

use super::moments::p_missing_set;
use crate::error::{OpeError, Result};
use crate::instance::BanditInstance;
use crate::policy::Policy;
use crate::reward::{RewardDist, RewardModel};

/// Largest action count searched exhaustively (2^K subsets).
pub const EXHAUSTIVE_MAX_ACTIONS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct MinimaxClass {
    pub target: Policy,
    pub behavior: Policy,
    pub rmax: f64,
    pub sigma2: Vec<f64>,
}

impl MinimaxClass {
    /// Class implied by an instance: its own variances as caps and its
    /// effective `rmax`. Fails when a mean lies outside `[0, rmax]`.
    pub fn of_instance(instance: &BanditInstance) -> Result<Self> {
        instance.rewards().check_range()?;
        Ok(Self {
            target: instance.target().clone(),
            behavior: instance.behavior().clone(),
            rmax: instance.rewards().effective_rmax(),
            sigma2: instance.rewards().variances(),
        })
    }

    fn validate(&self) -> Result<()> {
        let k = self.target.num_actions();
        if self.behavior.num_actions() != k || self.sigma2.len() != k {
            return Err(OpeError::DimensionMismatch {
                what: "minimax class",
                got: self.sigma2.len().min(self.behavior.num_actions()),
                expected: k,
            });
        }
        if self.rmax < 0.0 || self.sigma2.iter().any(|&s| s < 0.0) {
            return Err(OpeError::Precondition("rmax and variance caps must be >= 0".into()));
        }
        Ok(())
    }

    /// `v1` evaluated at the variance caps. Actions with no variance
    /// contribute nothing even when `pi_D(a) = 0`.
    pub fn v1(&self) -> f64 {
        (0..self.target.num_actions())
            .map(|a| {
                let noise = self.target.prob(a).powi(2) * self.sigma2[a];
                let q = self.behavior.prob(a);
                if noise == 0.0 {
                    0.0
                } else if q == 0.0 {
                    f64::INFINITY
                } else {
                    noise / q
                }
            })
            .sum()
    }

    /// `pi(B)^2 (1 - pi_D(B))^n`.
    pub fn subset_objective(&self, set: &[usize], n: usize) -> f64 {
        self.target.mass(set).powi(2) * p_missing_set(&self.behavior, set, n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimaxBound {
    /// `max(subset_term, variance_term) / 4`.
    pub value: f64,
    /// `rmax^2 max_B pi(B)^2 p_{B,n}`.
    pub subset_term: f64,
    /// `v1 / n`.
    pub variance_term: f64,
    pub best_subset: Vec<usize>,
    /// True when `best_subset` came from the sorted-prefix search, which
    /// may miss the best subset (the bound stays valid, possibly loose).
    pub heuristic: bool,
}

pub fn minimax_lower_bound(class: &MinimaxClass, n: usize) -> Result<MinimaxBound> {
    class.validate()?;
    if n == 0 {
        return Err(OpeError::Precondition("n must be at least 1".into()));
    }
    let k = class.target.num_actions();
    let (best_subset, best, heuristic) = if k <= EXHAUSTIVE_MAX_ACTIONS {
        let (s, v) = best_subset_exhaustive(class, n);
        (s, v, false)
    } else {
        let (s, v) = best_subset_sorted_prefix(class, n);
        (s, v, true)
    };
    let subset_term = class.rmax * class.rmax * best;
    let variance_term = class.v1() / n as f64;
    Ok(MinimaxBound {
        value: 0.25 * subset_term.max(variance_term),
        subset_term,
        variance_term,
        best_subset,
        heuristic,
    })
}

/// Maximizes `pi(B)^2 p_{B,n}` over all subsets; first maximizer in mask
/// order wins ties.
pub fn best_subset_exhaustive(class: &MinimaxClass, n: usize) -> (Vec<usize>, f64) {
    let k = class.target.num_actions();
    assert!(k <= EXHAUSTIVE_MAX_ACTIONS, "exhaustive search limited to {EXHAUSTIVE_MAX_ACTIONS} actions");
    let (pi, pd) = (class.target.probs(), class.behavior.probs());
    let mut best_mask = 0u32;
    let mut best = 0.0;
    for mask in 1u32..(1u32 << k) {
        let (mut target_mass, mut behavior_mass) = (0.0, 0.0);
        for a in 0..k {
            if mask & (1 << a) != 0 {
                target_mass += pi[a];
                behavior_mass += pd[a];
            }
        }
        let v = target_mass * target_mass * (1.0 - behavior_mass).max(0.0).powi(n as i32);
        if v > best {
            best = v;
            best_mask = mask;
        }
    }
    ((0..k).filter(|a| best_mask & (1 << a) != 0).collect(), best)
}

/// Prefixes of the actions sorted by descending `pi(a)/pi_D(a)`.
pub fn best_subset_sorted_prefix(class: &MinimaxClass, n: usize) -> (Vec<usize>, f64) {
    let k = class.target.num_actions();
    let ratio = |a: usize| {
        let (p, q) = (class.target.prob(a), class.behavior.prob(a));
        if p == 0.0 {
            0.0
        } else if q == 0.0 {
            f64::INFINITY
        } else {
            p / q
        }
    };
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| ratio(b).total_cmp(&ratio(a)).then(a.cmp(&b)));
    let mut best_len = 0;
    let mut best = 0.0;
    for len in 1..=k {
        let v = class.subset_objective(&order[..len], n);
        if v > best {
            best = v;
            best_len = len;
        }
    }
    let mut set = order[..best_len].to_vec();
    set.sort_unstable();
    (set, best)
}

/// Largest action count for which [`class_witnesses`] enumerates `2^K`
/// reward assignments.
pub const WITNESS_MAX_ACTIONS: usize = 12;

/// Members of the class of `instance` on which the bound can be checked:
/// the instance itself, then every noiseless instance with means in
/// `{0, rmax}^K` (mask bit `a` set means `r(a) = rmax`).
///
/// The lower bound is a statement about the worst case over the class, so
/// an estimator's MSE must reach it on at least one of these, not on each.
pub fn class_witnesses(instance: &BanditInstance) -> Result<Vec<BanditInstance>> {
    let class = MinimaxClass::of_instance(instance)?;
    let k = instance.num_actions();
    if k > WITNESS_MAX_ACTIONS {
        return Err(OpeError::BudgetExceeded {
            needed: 2f64.powi(k as i32),
            budget: 2f64.powi(WITNESS_MAX_ACTIONS as i32),
        });
    }
    let mut out = Vec::with_capacity(1 + (1 << k));
    out.push(instance.clone());
    for mask in 0u32..(1u32 << k) {
        let dists = (0..k)
            .map(|a| RewardDist::point(if mask & (1 << a) != 0 { class.rmax } else { 0.0 }))
            .collect();
        out.push(instance.with_rewards(RewardModel::new(dists, Some(class.rmax))?)?);
    }
    Ok(out)
}

/// Constant `K (min(4K, max_a r^2/sigma^2) + 5)` relating the REG MSE to the
/// minimax risk. A zero-variance action with nonzero mean makes the ratio
/// infinite, so `4K` is used.
pub fn reg_minimax_factor(instance: &BanditInstance) -> f64 {
    let k = instance.num_actions() as f64;
    let rewards = instance.rewards();
    let ratio = (0..instance.num_actions())
        .map(|a| {
            let (r, s) = (rewards.mean(a), rewards.variance(a));
            if r == 0.0 {
                0.0
            } else if s == 0.0 {
                f64::INFINITY
            } else {
                r * r / s
            }
        })
        .fold(0.0, f64::max);
    k * ((4.0 * k).min(ratio) + 5.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn class(target: &[f64], behavior: &[f64], rmax: f64, sigma2: &[f64]) -> MinimaxClass {
        MinimaxClass {
            target: Policy::new(target.to_vec()).unwrap(),
            behavior: Policy::new(behavior.to_vec()).unwrap(),
            rmax,
            sigma2: sigma2.to_vec(),
        }
    }

    #[test]
    fn zero_class_gives_zero() {
        let c = class(&[0.3, 0.7], &[0.5, 0.5], 0.0, &[0.0, 0.0]);
        assert_eq!(minimax_lower_bound(&c, 4).unwrap().value, 0.0);
    }

    #[test]
    fn two_action_example() {
        let c = class(&[1.0, 0.0], &[0.5, 0.5], 1.0, &[0.0, 0.0]);
        let b = minimax_lower_bound(&c, 1).unwrap();
        assert_eq!(b.best_subset, vec![0]);
        assert_eq!(b.subset_term, 0.5);
        assert_eq!(b.value, 0.125);
        assert!(!b.heuristic);
    }

    #[test]
    fn variance_term_dominates_for_large_n() {
        let c = class(&[0.5, 0.5], &[0.5, 0.5], 1.0, &[1.0, 1.0]);
        let b = minimax_lower_bound(&c, 1000).unwrap();
        assert!((b.variance_term - 1.0 / 1000.0).abs() < 1e-15);
        assert_eq!(b.value, 0.25 * b.variance_term);
    }

    #[test]
    fn heuristic_used_above_limit() {
        let k = 24;
        let w: Vec<f64> = (1..=k).map(|a| a as f64).collect();
        let c = MinimaxClass {
            target: Policy::from_weights(&w).unwrap(),
            behavior: Policy::uniform(k).unwrap(),
            rmax: 1.0,
            sigma2: vec![0.01; k],
        };
        let b = minimax_lower_bound(&c, 5).unwrap();
        assert!(b.heuristic);
        assert!((c.subset_objective(&b.best_subset, 5) - b.subset_term).abs() < 1e-15);
    }

    #[test]
    fn heuristic_never_beats_exhaustive() {
        let c = class(&[0.1, 0.2, 0.3, 0.4], &[0.4, 0.3, 0.2, 0.1], 1.0, &[0.0; 4]);
        for n in 1..30 {
            let (_, ex) = best_subset_exhaustive(&c, n);
            let (_, he) = best_subset_sorted_prefix(&c, n);
            assert!(he <= ex);
        }
    }

    #[test]
    fn unsupported_noisy_action_gives_infinite_v1() {
        let c = class(&[0.5, 0.5], &[1.0, 0.0], 1.0, &[0.0, 0.1]);
        assert!(c.v1().is_infinite());
        let c = class(&[0.5, 0.5], &[1.0, 0.0], 1.0, &[0.1, 0.0]);
        assert!((c.v1() - 0.025).abs() < 1e-15);
    }
}
