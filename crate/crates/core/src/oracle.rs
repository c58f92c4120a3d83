//! Brute-force exact moments of an estimator.
//!
//! Walks every sequence of `n` logged `(action, reward)` outcomes together
//! with its probability. Exponential in `n`, so guarded by a budget on the
//! number of sequences visited.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{OpeError, Result};
use crate::estimators::EstimatorKind;
use crate::instance::BanditInstance;

/// Default cap on enumerated outcome sequences.
pub const DEFAULT_BUDGET: f64 = 1e7;

/// Above this many samples, sequence probabilities are accumulated as logs.
const LOG_SPACE_ABOVE: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactMoments {
    pub mean: f64,
    pub variance: f64,
    pub mse: f64,
}

/// One possible logged sample with its probability.
#[derive(Debug, Clone, Copy)]
struct Outcome {
    action: usize,
    reward: f64,
    prob: f64,
    log_prob: f64,
}

fn single_sample_outcomes(instance: &BanditInstance) -> Result<Vec<Outcome>> {
    let behavior = instance.behavior();
    let mut out = Vec::new();
    for a in 0..instance.num_actions() {
        let pa = behavior.prob(a);
        if pa == 0.0 {
            continue;
        }
        let atoms = instance
            .rewards()
            .dist(a)
            .atoms()
            .ok_or(OpeError::ContinuousReward { action: a })?;
        for (reward, q) in atoms {
            let prob = pa * q;
            out.push(Outcome {
                action: a,
                reward,
                prob,
                log_prob: prob.ln(),
            });
        }
    }
    Ok(out)
}

/// Number of sequences [`for_each_dataset`] would visit.
pub fn enumeration_size(instance: &BanditInstance, n: usize) -> Result<f64> {
    Ok((single_sample_outcomes(instance)?.len() as f64).powi(n as i32))
}

/// Calls `visit(data, prob)` for every length-`n` outcome sequence.
///
/// Probabilities over all visited sequences sum to one.
pub fn for_each_dataset<F>(instance: &BanditInstance, n: usize, budget: f64, visit: F) -> Result<()>
where
    F: FnMut(&Dataset, f64),
{
    walk_all(instance, n, budget, n > LOG_SPACE_ABOVE, visit)
}

fn walk_all<F>(instance: &BanditInstance, n: usize, budget: f64, log_space: bool, mut visit: F) -> Result<()>
where
    F: FnMut(&Dataset, f64),
{
    let outcomes = single_sample_outcomes(instance)?;
    let needed = (outcomes.len() as f64).powi(n as i32);
    if needed > budget {
        return Err(OpeError::BudgetExceeded { needed, budget });
    }
    let mut walk = Walk {
        outcomes: &outcomes,
        n,
        log_space,
        stack: Vec::with_capacity(n),
        data: Dataset::new(instance.num_actions()),
    };
    walk.descend(if log_space { 0.0 } else { 1.0 }, &mut visit);
    Ok(())
}

struct Walk<'a> {
    outcomes: &'a [Outcome],
    n: usize,
    log_space: bool,
    stack: Vec<(usize, f64)>,
    data: Dataset,
}

impl Walk<'_> {
    fn descend<F: FnMut(&Dataset, f64)>(&mut self, acc: f64, visit: &mut F) {
        if self.stack.len() == self.n {
            self.data.clear();
            for &(a, r) in &self.stack {
                self.data.push(a, r);
            }
            let prob = if self.log_space { acc.exp() } else { acc };
            visit(&self.data, prob);
            return;
        }
        for o in self.outcomes {
            let next = if self.log_space {
                acc + o.log_prob
            } else {
                acc * o.prob
            };
            self.stack.push((o.action, o.reward));
            self.descend(next, visit);
            self.stack.pop();
        }
    }
}

/// Exact `E[v]`, `V(v)` and `E[(v - v_pi)^2]` of `estimator` at sample size `n`.
pub fn enumerate_exact_moments(
    instance: &BanditInstance,
    n: usize,
    estimator: EstimatorKind,
    budget: f64,
) -> Result<ExactMoments> {
    if n == 0 {
        return Err(OpeError::Precondition("sample size must be at least 1".into()));
    }
    if estimator == EstimatorKind::Lr {
        instance.require_identifiable()?;
    }
    let truth = instance.policy_value();
    let mut mean = 0.0;
    let mut mse = 0.0;
    let mut failure = None;
    for_each_dataset(instance, n, budget, |data, prob| {
        match estimator.estimate(instance, data) {
            Ok(v) => {
                mean += prob * v;
                mse += prob * (v - truth) * (v - truth);
            }
            Err(e) => failure = Some(e),
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let bias = mean - truth;
    Ok(ExactMoments {
        mean,
        variance: (mse - bias * bias).max(0.0),
        mse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::Policy;
    use crate::reward::{RewardDist, RewardModel};

    fn points(behavior: &[f64], target: &[f64], values: &[f64]) -> BanditInstance {
        BanditInstance::new(
            Policy::new(behavior.to_vec()).unwrap(),
            Policy::new(target.to_vec()).unwrap(),
            RewardModel::new(values.iter().map(|&v| RewardDist::point(v)).collect(), None).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn single_arm_is_exact() {
        let inst = points(&[1.0], &[1.0], &[1.0]);
        for n in 1..5 {
            let m = enumerate_exact_moments(&inst, n, EstimatorKind::Lr, DEFAULT_BUDGET).unwrap();
            assert_eq!((m.mean, m.variance, m.mse), (1.0, 0.0, 0.0));
        }
    }

    #[test]
    fn two_arm_lr_mse_is_one_twelfth() {
        let inst = points(&[0.5, 0.5], &[0.5, 0.5], &[0.0, 1.0]);
        let m = enumerate_exact_moments(&inst, 3, EstimatorKind::Lr, DEFAULT_BUDGET).unwrap();
        assert!((m.mean - 0.5).abs() < 1e-15);
        assert!((m.mse - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn reg_bias_one_sample() {
        let inst = points(&[0.5, 0.5], &[0.5, 0.5], &[1.0, 1.0]);
        let m = enumerate_exact_moments(&inst, 1, EstimatorKind::Reg, DEFAULT_BUDGET).unwrap();
        assert!((m.mean - 0.5).abs() < 1e-15);
        assert!((m.mean - inst.policy_value() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn probabilities_sum_to_one_in_log_space() {
        let inst = BanditInstance::new(
            Policy::new(vec![0.5, 0.5]).unwrap(),
            Policy::new(vec![0.5, 0.5]).unwrap(),
            RewardModel::new(vec![RewardDist::point(0.0), RewardDist::point(1.0)], None).unwrap(),
        )
        .unwrap();
        let mut total = 0.0;
        for_each_dataset(&inst, 20, DEFAULT_BUDGET, |_, p| total += p).unwrap();
        assert!((total - 1.0).abs() < 1e-12);
        // 2^31 > budget unless raised
        assert!(matches!(
            for_each_dataset(&inst, 31, DEFAULT_BUDGET, |_, _| {}),
            Err(OpeError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn log_space_matches_direct_products() {
        let inst = BanditInstance::new(
            Policy::new(vec![0.7, 0.2, 0.1]).unwrap(),
            Policy::new(vec![0.1, 0.3, 0.6]).unwrap(),
            RewardModel::new(
                vec![RewardDist::point(0.0), RewardDist::bernoulli(0.3), RewardDist::point(1.0)],
                None,
            )
            .unwrap(),
        )
        .unwrap();
        let mut direct = Vec::new();
        let mut logged = Vec::new();
        walk_all(&inst, 6, DEFAULT_BUDGET, false, |_, p| direct.push(p)).unwrap();
        walk_all(&inst, 6, DEFAULT_BUDGET, true, |_, p| logged.push(p)).unwrap();
        assert_eq!(direct.len(), logged.len());
        for (a, b) in direct.iter().zip(&logged) {
            assert!((a - b).abs() <= 1e-14 * a.max(1e-300));
        }
    }

    #[test]
    fn rejects_continuous_and_unidentifiable() {
        let inst = BanditInstance::new(
            Policy::uniform(2).unwrap(),
            Policy::uniform(2).unwrap(),
            RewardModel::new(vec![RewardDist::point(0.0), RewardDist::normal(0.0, 1.0)], None).unwrap(),
        )
        .unwrap();
        assert_eq!(
            enumerate_exact_moments(&inst, 2, EstimatorKind::Reg, DEFAULT_BUDGET),
            Err(OpeError::ContinuousReward { action: 1 })
        );
        let inst = points(&[1.0, 0.0], &[0.5, 0.5], &[1.0, 1.0]);
        assert!(enumerate_exact_moments(&inst, 2, EstimatorKind::Lr, DEFAULT_BUDGET).is_err());
        assert!(enumerate_exact_moments(&inst, 2, EstimatorKind::Reg, DEFAULT_BUDGET).is_ok());
    }
}
