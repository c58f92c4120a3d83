//! Negative-association variance bound for the coverage indicators, and the
//! deterministic bias check behind the unavoidable `K` factor of REG.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use super::moments::{p_missing, reg_bias};
use crate::error::{OpeError, Result};
use crate::instance::BanditInstance;
use crate::policy::Policy;
use crate::reward::{RewardDist, RewardModel};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndicatorVariance {
    /// `V(sum_a w_a 1{n(a) > 0})`, `w_a = pi(a) r(a)`.
    pub value: f64,
    /// False when `value` is a Monte Carlo estimate (enumeration over budget).
    pub exact: bool,
    /// `sum_a w_a^2 p_{a,n} (1 - p_{a,n})`.
    pub bound: f64,
}

/// Replications used when the multinomial enumeration is over budget.
pub const INDICATOR_MC_REPLICATIONS: usize = 100_000;

pub fn indicator_variance_bound(
    instance: &BanditInstance,
    n: usize,
    budget: f64,
    seed: u64,
) -> Result<IndicatorVariance> {
    if !instance.rewards().is_nonnegative() {
        return Err(OpeError::Precondition(
            "indicator variance bound needs nonnegative mean rewards".into(),
        ));
    }
    let k = instance.num_actions();
    let w: Vec<f64> = (0..k)
        .map(|a| instance.target().prob(a) * instance.rewards().mean(a))
        .collect();
    let missing = p_missing(instance.behavior(), n);
    let bound = (0..k)
        .map(|a| w[a] * w[a] * missing[a] * (1.0 - missing[a]))
        .sum();

    // actions with pi_D = 0 are never seen: constant indicators
    let live: Vec<usize> = (0..k).filter(|&a| instance.behavior().prob(a) > 0.0).collect();
    let compositions = binomial_coefficient(n + live.len() - 1, live.len() - 1);
    let (value, exact) = if compositions <= budget {
        (enumerate_variance(instance, &live, &w, n), true)
    } else {
        (sampled_variance(instance, &w, n, seed), false)
    };
    Ok(IndicatorVariance {
        value,
        exact,
        bound,
    })
}

fn binomial_coefficient(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exact variance by walking every count vector `(n(a))` of the live
/// actions with its multinomial probability.
fn enumerate_variance(instance: &BanditInstance, live: &[usize], w: &[f64], n: usize) -> f64 {
    let ln_fact: Vec<f64> = std::iter::once(0.0)
        .chain((1..=n).scan(0.0, |s, i| {
            *s += (i as f64).ln();
            Some(*s)
        }))
        .collect();
    let ln_p: Vec<f64> = live.iter().map(|&a| instance.behavior().prob(a).ln()).collect();

    let mut outcomes = Vec::new();
    let mut counts = vec![0usize; live.len()];
    compositions(&mut counts, 0, n, &mut |c| {
        let ln_prob = ln_fact[n]
            + c.iter()
                .zip(&ln_p)
                .map(|(&m, lp)| m as f64 * lp - ln_fact[m])
                .sum::<f64>();
        let s: f64 = c
            .iter()
            .zip(live)
            .filter(|(&m, _)| m > 0)
            .map(|(_, &a)| w[a])
            .sum();
        outcomes.push((ln_prob.exp(), s));
    });
    let mean: f64 = outcomes.iter().map(|(p, s)| p * s).sum();
    outcomes.iter().map(|(p, s)| p * (s - mean) * (s - mean)).sum()
}

fn compositions<F: FnMut(&[usize])>(counts: &mut [usize], pos: usize, left: usize, f: &mut F) {
    if pos + 1 == counts.len() {
        counts[pos] = left;
        f(counts);
        return;
    }
    for m in 0..=left {
        counts[pos] = m;
        compositions(counts, pos + 1, left - m, f);
    }
}

fn sampled_variance(instance: &BanditInstance, w: &[f64], n: usize, seed: u64) -> f64 {
    let dist = WeightedIndex::new(instance.behavior().probs()).expect("valid policy");
    let mut rng = rng::seeded(seed);
    let mut seen = vec![false; w.len()];
    let values: Vec<f64> = (0..INDICATOR_MC_REPLICATIONS)
        .map(|_| {
            seen.iter_mut().for_each(|s| *s = false);
            for _ in 0..n {
                seen[dist.sample(&mut rng)] = true;
            }
            seen.iter().zip(w).filter(|(s, _)| **s).map(|(_, w)| w).sum()
        })
        .collect();
    let m = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformBiasCheck {
    /// Squared REG bias at `pi = pi_D = 1/K`, `r = 1`.
    pub squared_bias: f64,
    /// `(1 - 1/K)^{2n}`.
    pub closed_form: f64,
    /// `exp(-2n/(K-1))`.
    pub exponential_floor: f64,
}

/// Instance with uniform target and behavior and unit point-mass rewards.
pub fn uniform_unit_instance(k: usize) -> Result<BanditInstance> {
    BanditInstance::new(
        Policy::uniform(k)?,
        Policy::uniform(k)?,
        RewardModel::new(vec![RewardDist::point(1.0); k], None)?,
    )
}

pub fn uniform_bias_check(k: usize, n: usize) -> Result<UniformBiasCheck> {
    if k < 2 {
        return Err(OpeError::Precondition("needs at least two actions".into()));
    }
    let b = reg_bias(&uniform_unit_instance(k)?, n);
    let kf = k as f64;
    Ok(UniformBiasCheck {
        squared_bias: b * b,
        closed_form: (1.0 - 1.0 / kf).powi(2 * n as i32),
        exponential_floor: (-2.0 * n as f64 / (kf - 1.0)).exp(),
    })
}

/// `n exp(-2n/(K-1))` for real `n`; at `n = (K-1)/2` equals `(K-1)/(2e)`.
pub fn ratio_floor(k: usize, n: f64) -> f64 {
    n * (-2.0 * n / (k as f64 - 1.0)).exp()
}
