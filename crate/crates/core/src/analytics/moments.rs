//! Closed-form variance constants and MSE expressions for LR and REG.

use serde::{Deserialize, Serialize};

use super::binomial::inverse_moment_exact;
use crate::error::{OpeError, Result};
use crate::instance::BanditInstance;
use crate::policy::Policy;

/// The two variance constants of the LR estimator.
///
/// `v1 = sum_a pi(a)^2 sigma^2(a) / pi_D(a)` is the importance-weighted
/// reward noise; `v2` is the variance under `pi_D` of `pi(A) r(A) / pi_D(A)`.
/// Both are `+inf` (and `supported` false) when the target uses an action
/// the behavior policy never takes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceConstants {
    pub v1: f64,
    pub v2: f64,
    pub supported: bool,
}

pub fn compute_v1_v2(instance: &BanditInstance) -> VarianceConstants {
    if !instance.is_identifiable() {
        return VarianceConstants {
            v1: f64::INFINITY,
            v2: f64::INFINITY,
            supported: false,
        };
    }
    let (pi, pd) = (instance.target(), instance.behavior());
    let rewards = instance.rewards();
    let value = instance.policy_value();
    let mut v1 = 0.0;
    let mut v2 = 0.0;
    for a in 0..instance.num_actions() {
        let q = pd.prob(a);
        if q == 0.0 {
            continue;
        }
        let p = pi.prob(a);
        v1 += p * p * rewards.variance(a) / q;
        // centered form of sum pi^2 r^2 / pi_D - v^2; never negative
        let dev = p * rewards.mean(a) / q - value;
        v2 += q * dev * dev;
    }
    VarianceConstants {
        v1,
        v2,
        supported: true,
    }
}

/// `(1 - pi_D(a))^n` for every action.
pub fn p_missing(behavior: &Policy, n: usize) -> Vec<f64> {
    behavior
        .probs()
        .iter()
        .map(|&q| (1.0 - q).powi(n as i32))
        .collect()
}

/// `(1 - pi_D(B))^n`: probability that no logged action falls in `set`.
pub fn p_missing_set(behavior: &Policy, set: &[usize], n: usize) -> f64 {
    (1.0 - behavior.mass(set)).max(0.0).powi(n as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegTerms {
    /// Upper bound on squared bias plus conditional-mean variance of REG.
    pub v0n: f64,
    /// Excess of the exact inverse-count moment over `1/pi_D`, weighted by
    /// `pi^2 sigma^2`. Signed.
    pub v3n: f64,
}

pub fn compute_v0n_v3n(instance: &BanditInstance, n: usize) -> Result<RegTerms> {
    if n == 0 {
        return Err(OpeError::Precondition("n must be at least 1".into()));
    }
    let (pi, pd) = (instance.target(), instance.behavior());
    let rewards = instance.rewards();
    let missing = p_missing(pd, n);
    let mut bias = 0.0;
    let mut spread = 0.0;
    let mut v3n = 0.0;
    for (a, &pm) in missing.iter().enumerate() {
        let (p, r) = (pi.prob(a), rewards.mean(a));
        bias += p * r * pm;
        spread += p * p * r * r * pm * (1.0 - pm);
        let noise = p * p * rewards.variance(a);
        if noise > 0.0 {
            v3n += if pd.prob(a) == 0.0 {
                f64::INFINITY
            } else {
                inverse_moment_exact(n, pd.prob(a))? * noise
            };
        }
    }
    Ok(RegTerms {
        v0n: bias * bias + spread,
        v3n,
    })
}

/// Exact MSE of LR: `(v1 + v2) / n`.
pub fn lr_mse(instance: &BanditInstance, n: usize) -> Result<f64> {
    instance.require_identifiable()?;
    if n == 0 {
        return Err(OpeError::Precondition("n must be at least 1".into()));
    }
    let c = compute_v1_v2(instance);
    Ok((c.v1 + c.v2) / n as f64)
}

/// Magnitude of the REG bias, `b_n = sum_a pi(a) r(a) p_{a,n}`
/// (so `E[v_reg] = v - b_n`).
pub fn reg_bias(instance: &BanditInstance, n: usize) -> f64 {
    let missing = p_missing(instance.behavior(), n);
    (0..instance.num_actions())
        .map(|a| instance.target().prob(a) * instance.rewards().mean(a) * missing[a])
        .sum()
}

/// Exact `E[v_reg] = sum_a pi(a) r(a) (1 - p_{a,n})`.
pub fn reg_mean(instance: &BanditInstance, n: usize) -> f64 {
    let missing = p_missing(instance.behavior(), n);
    (0..instance.num_actions())
        .map(|a| instance.target().prob(a) * instance.rewards().mean(a) * (1.0 - missing[a]))
        .sum()
}

/// `v0n + (v1 + v3n) / n`. Requires nonnegative mean rewards.
pub fn reg_mse_upper(instance: &BanditInstance, n: usize) -> Result<f64> {
    if !instance.rewards().is_nonnegative() {
        return Err(OpeError::Precondition(
            "REG upper bound needs nonnegative mean rewards".into(),
        ));
    }
    let terms = compute_v0n_v3n(instance, n)?;
    let c = compute_v1_v2(instance);
    Ok(terms.v0n + (c.v1 + terms.v3n) / n as f64)
}

/// `v1/n + 4 b_n^2 (1 + v1/n) + (2/n) sum_a pi^2 sigma^2 p_{a,n} / pi_D`,
/// stated for normal reward laws.
pub fn reg_mse_lower_normal(instance: &BanditInstance, n: usize) -> Result<f64> {
    if !instance.rewards().all_normal() {
        return Err(OpeError::Precondition(
            "REG lower bound is stated for normal rewards only".into(),
        ));
    }
    instance.require_identifiable()?;
    if n == 0 {
        return Err(OpeError::Precondition("n must be at least 1".into()));
    }
    let nf = n as f64;
    let v1 = compute_v1_v2(instance).v1;
    let b = reg_bias(instance, n);
    let missing = p_missing(instance.behavior(), n);
    let tail: f64 = (0..instance.num_actions())
        .filter(|&a| instance.behavior().prob(a) > 0.0)
        .map(|a| {
            let p = instance.target().prob(a);
            p * p * instance.rewards().variance(a) * missing[a] / instance.behavior().prob(a)
        })
        .sum();
    Ok(v1 / nf + 4.0 * b * b * (1.0 + v1 / nf) + 2.0 / nf * tail)
}

/// Cramér–Rao bound for estimators with the bias of REG under normal
/// rewards: `b_n^2 + sum_a pi^2 (1 - p_{a,n})^2 sigma^2 / (n pi_D)`.
///
/// The gradient of `E[v_reg]` in `r(a)` is `pi(a) (1 - p_{a,n})`, and the
/// Fisher information of `n` samples is `n diag(pi_D / sigma^2)`.
pub fn reg_mse_cramer_rao(instance: &BanditInstance, n: usize) -> Result<f64> {
    if !instance.rewards().all_normal() {
        return Err(OpeError::Precondition(
            "Cramér–Rao bound is computed for normal rewards only".into(),
        ));
    }
    instance.require_identifiable()?;
    if n == 0 {
        return Err(OpeError::Precondition("n must be at least 1".into()));
    }
    let b = reg_bias(instance, n);
    let missing = p_missing(instance.behavior(), n);
    let var: f64 = (0..instance.num_actions())
        .filter(|&a| instance.behavior().prob(a) > 0.0)
        .map(|a| {
            let g = instance.target().prob(a) * (1.0 - missing[a]);
            g * g * instance.rewards().variance(a) / (n as f64 * instance.behavior().prob(a))
        })
        .sum();
    Ok(b * b + var)
}

/// Exact REG MSE for any reward law: squared bias, plus the expected
/// conditional noise `(v1 + v3n)/n`, plus the exact variance of
/// `sum_a pi(a) r(a) 1{n(a) > 0}` from pairwise joint-missing probabilities.
pub fn reg_mse_exact(instance: &BanditInstance, n: usize) -> Result<f64> {
    instance.require_identifiable()?;
    let terms = compute_v0n_v3n(instance, n)?;
    let v1 = compute_v1_v2(instance).v1;
    let b = reg_bias(instance, n);
    Ok(b * b + (v1 + terms.v3n) / n as f64 + indicator_variance_exact(instance, n))
}

/// `V(sum_a w_a 1{n(a) > 0})` with `w_a = pi(a) r(a)`, via
/// `Cov(1{n(a)>0}, 1{n(b)>0}) = (1 - pi_D(a) - pi_D(b))^n - p_{a,n} p_{b,n}`.
pub fn indicator_variance_exact(instance: &BanditInstance, n: usize) -> f64 {
    let pd = instance.behavior();
    let k = instance.num_actions();
    let w: Vec<f64> = (0..k)
        .map(|a| instance.target().prob(a) * instance.rewards().mean(a))
        .collect();
    let missing = p_missing(pd, n);
    let mut var = 0.0;
    for a in 0..k {
        var += w[a] * w[a] * missing[a] * (1.0 - missing[a]);
        for b in (a + 1)..k {
            let both = (1.0 - pd.prob(a) - pd.prob(b)).max(0.0).powi(n as i32);
            var += 2.0 * w[a] * w[b] * (both - missing[a] * missing[b]);
        }
    }
    var
}
