//! Closed-form quantities and bounds for the LR and REG estimators.

mod binomial;
mod fisher;
mod lemmas;
mod minimax;
mod moments;

pub use binomial::{
    binomial_lower_tail, binomial_pmf, chernoff_lower_tail, inverse_moment_bounds,
    inverse_moment_exact, InverseMomentBounds, REFINED_MIN_NP,
};
pub use fisher::FisherInfo;
pub use lemmas::{
    indicator_variance_bound, ratio_floor, uniform_bias_check, uniform_unit_instance,
    IndicatorVariance, UniformBiasCheck, INDICATOR_MC_REPLICATIONS,
};
pub use minimax::{
    best_subset_exhaustive, best_subset_sorted_prefix, class_witnesses, minimax_lower_bound, reg_minimax_factor,
    MinimaxBound, MinimaxClass, EXHAUSTIVE_MAX_ACTIONS, WITNESS_MAX_ACTIONS,
};
pub use moments::{
    compute_v0n_v3n, compute_v1_v2, indicator_variance_exact, lr_mse, p_missing, p_missing_set,
    reg_bias, reg_mean, reg_mse_cramer_rao, reg_mse_exact, reg_mse_lower_normal, reg_mse_upper, RegTerms,
    VarianceConstants,
};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::instance::BanditInstance;

/// Every analytic quantity of an instance at one sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticReport {
    pub n: usize,
    pub policy_value: f64,
    pub v1: f64,
    pub v2: f64,
    pub p_missing: Vec<f64>,
    pub v0n: f64,
    pub v3n: f64,
    pub bias_bn: f64,
    pub lr_mse: f64,
    /// `None` when some mean reward is negative.
    pub reg_mse_upper: Option<f64>,
    /// `None` unless every reward law is normal.
    pub reg_mse_lower_normal: Option<f64>,
    /// `None` when the instance's means fall outside `[0, rmax]`.
    pub minimax_lower: Option<f64>,
    pub best_subset: Vec<usize>,
    pub subset_search_heuristic: bool,
}

/// Builds the full report. Fails on unidentifiable instances, and when a
/// declared `rmax` is violated by the reward means.
pub fn analyze(instance: &BanditInstance, n: usize) -> Result<AnalyticReport> {
    instance.require_identifiable()?;
    if instance.rewards().rmax().is_some() {
        instance.rewards().check_range()?;
    }
    let consts = compute_v1_v2(instance);
    let terms = compute_v0n_v3n(instance, n)?;
    let minimax = MinimaxClass::of_instance(instance)
        .ok()
        .map(|class| minimax_lower_bound(&class, n))
        .transpose()?;
    Ok(AnalyticReport {
        n,
        policy_value: instance.policy_value(),
        v1: consts.v1,
        v2: consts.v2,
        p_missing: p_missing(instance.behavior(), n),
        v0n: terms.v0n,
        v3n: terms.v3n,
        bias_bn: reg_bias(instance, n),
        lr_mse: lr_mse(instance, n)?,
        reg_mse_upper: reg_mse_upper(instance, n).ok(),
        reg_mse_lower_normal: reg_mse_lower_normal(instance, n).ok(),
        minimax_lower: minimax.as_ref().map(|m| m.value),
        subset_search_heuristic: minimax.as_ref().is_some_and(|m| m.heuristic),
        best_subset: minimax.map(|m| m.best_subset).unwrap_or_default(),
    })
}
