//! Named self-check suites: closed forms against the exhaustive oracle, and
//! inequality sweeps over parameter grids.
//!
//! Each suite is deterministic under the seed in [`VerifyOptions`].

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analytics::{
    binomial_lower_tail, chernoff_lower_tail, class_witnesses, compute_v1_v2, indicator_variance_bound,
    inverse_moment_bounds, inverse_moment_exact, lr_mse, minimax_lower_bound, reg_mean, reg_mse_upper,
    FisherInfo, MinimaxClass, VarianceConstants,
};
use crate::error::{OpeError, Result};
use crate::estimators::EstimatorKind;
use crate::generate::{random_contextual, random_discrete_instance, random_mdp, random_normal_instance};
use crate::instance::BanditInstance;
use crate::oracle::{enumerate_exact_moments, DEFAULT_BUDGET};
use crate::reductions::{combination_lock, contextual_to_bandit, mdp_to_bandit, DEFAULT_TRAJECTORY_BUDGET};
use crate::rng::replication_stream;

pub const SUITES: [&str; 10] = [
    "lr_mse_exact",
    "reg_bias",
    "reg_mse_upper",
    "inverse_moment",
    "indicator_variance",
    "chernoff_tail",
    "fisher_identity",
    "reductions",
    "minimax_consistency",
    "uniform_rate",
];

/// Formula for `(v1, v2)` used by the LR suite; replaceable so tests can
/// check that a wrong formula is caught.
pub type VarianceFormula = fn(&BanditInstance) -> VarianceConstants;

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random instances per suite.
    pub instances: usize,
    pub variance_formula: VarianceFormula,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 7,
            instances: 50,
            variance_formula: compute_v1_v2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub suite: String,
    pub status: SuiteStatus,
    pub checks: usize,
    pub failures: usize,
    /// First few failing cases.
    pub examples: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub suites: Vec<SuiteOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.status != SuiteStatus::Fail)
    }

    pub fn suite(&self, name: &str) -> Option<&SuiteOutcome> {
        self.suites.iter().find(|s| s.suite == name)
    }
}

const MAX_EXAMPLES: usize = 5;

struct Tally {
    checks: usize,
    failures: usize,
    examples: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Self {
            checks: 0,
            failures: 0,
            examples: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
            if self.examples.len() < MAX_EXAMPLES {
                self.examples.push(describe());
            }
        }
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }
}

/// Runs the `selected` suites (all when empty); the others are reported as
/// skipped.
pub fn run_verify(selected: &[String], options: &VerifyOptions) -> Result<VerifyReport> {
    for name in selected {
        if !SUITES.contains(&name.as_str()) {
            return Err(OpeError::InvalidConfig(format!(
                "unknown suite {name:?}; known suites: {}",
                SUITES.join(", ")
            )));
        }
    }
    let mut suites = Vec::with_capacity(SUITES.len());
    for (i, &name) in SUITES.iter().enumerate() {
        if !selected.is_empty() && !selected.iter().any(|s| s == name) {
            suites.push(SuiteOutcome {
                suite: name.into(),
                status: SuiteStatus::Skipped,
                checks: 0,
                failures: 0,
                examples: Vec::new(),
            });
            continue;
        }
        let mut rng = replication_stream(options.seed, i, 0);
        let mut t = Tally::new();
        run_suite(name, &mut rng, options, &mut t)?;
        suites.push(SuiteOutcome {
            suite: name.into(),
            status: if t.failures == 0 { SuiteStatus::Pass } else { SuiteStatus::Fail },
            checks: t.checks,
            failures: t.failures,
            examples: t.examples,
        });
    }
    Ok(VerifyReport {
        seed: options.seed,
        suites,
    })
}

fn run_suite<R: Rng>(name: &str, rng: &mut R, opts: &VerifyOptions, t: &mut Tally) -> Result<()> {
    match name {
        "lr_mse_exact" => {
            for _ in 0..opts.instances {
                let inst = random_discrete_instance(rng, 4);
                let n = rng.random_range(1..=5);
                let exact = enumerate_exact_moments(&inst, n, EstimatorKind::Lr, DEFAULT_BUDGET)?.mse;
                let vc = (opts.variance_formula)(&inst);
                let closed = (vc.v1 + vc.v2) / n as f64;
                t.check(Tally::close(exact, closed, 1e-10), || {
                    format!("K={} n={n}: oracle {exact} vs (V1+V2)/n {closed}", inst.num_actions())
                });
            }
        }
        "reg_bias" => {
            for _ in 0..opts.instances {
                let inst = random_discrete_instance(rng, 4);
                let n = rng.random_range(1..=5);
                let exact = enumerate_exact_moments(&inst, n, EstimatorKind::Reg, DEFAULT_BUDGET)?.mean;
                let closed = reg_mean(&inst, n);
                t.check(Tally::close(exact, closed, 1e-10), || {
                    format!("n={n}: oracle mean {exact} vs {closed}")
                });
            }
        }
        "reg_mse_upper" => {
            for _ in 0..opts.instances {
                let inst = random_discrete_instance(rng, 4);
                let n = rng.random_range(1..=5);
                let exact = enumerate_exact_moments(&inst, n, EstimatorKind::Reg, DEFAULT_BUDGET)?.mse;
                let upper = reg_mse_upper(&inst, n)?;
                t.check(exact <= upper + 1e-12, || format!("n={n}: oracle {exact} > bound {upper}"));
            }
        }
        "inverse_moment" => {
            for n in (1..=400).step_by(3) {
                for p in [0.01, 0.03, 0.1, 0.2, 0.35, 0.5, 0.75, 0.9, 1.0] {
                    let exact = inverse_moment_exact(n, p)?;
                    let b = inverse_moment_bounds(n, p)?;
                    t.check(exact <= b.basic + 1e-12, || format!("n={n} p={p}: {exact} > 4/p"));
                    if let Some(refined) = b.refined {
                        t.check(exact <= refined + 1e-12, || {
                            format!("n={n} p={p}: {exact} > refined {refined}")
                        });
                    }
                }
            }
        }
        "indicator_variance" => {
            for _ in 0..opts.instances {
                let inst = random_discrete_instance(rng, 4);
                let n = rng.random_range(1..=8);
                let iv = indicator_variance_bound(&inst, n, DEFAULT_BUDGET, 0)?;
                t.check(iv.value <= iv.bound + 1e-12, || {
                    format!("n={n}: variance {} > bound {}", iv.value, iv.bound)
                });
            }
        }
        "chernoff_tail" => {
            for n in (1..=300).step_by(7) {
                for p in [0.02, 0.1, 0.3, 0.5, 0.8, 0.99] {
                    for beta in [0.05, 0.2, 0.5, 0.8, 0.99] {
                        let tail = binomial_lower_tail(n, p, beta);
                        let bound = chernoff_lower_tail(n, p, beta)?;
                        t.check(tail <= bound + 1e-12, || {
                            format!("n={n} p={p} beta={beta}: {tail} > {bound}")
                        });
                    }
                }
            }
        }
        "fisher_identity" => {
            for _ in 0..opts.instances {
                let inst = random_normal_instance(rng, 6);
                let fisher = FisherInfo::new(inst.behavior(), inst.target(), &inst.rewards().variances())?;
                let quad = fisher.quadratic_form()?;
                let v1 = compute_v1_v2(&inst).v1;
                t.check(Tally::close(quad, v1, 1e-12), || format!("quadratic form {quad} vs V1 {v1}"));
            }
        }
        "reductions" => {
            for _ in 0..opts.instances {
                let ctx = random_contextual(rng, 3, 3);
                let b = contextual_to_bandit(&ctx)?;
                let (x, y) = (b.policy_value(), ctx.policy_value());
                t.check(Tally::close(x, y, 1e-10), || format!("contextual value {x} vs {y}"));
                let mdp = random_mdp(rng, 3, 3, 3);
                let red = mdp_to_bandit(&mdp, DEFAULT_TRAJECTORY_BUDGET)?;
                let (x, y) = (red.bandit.policy_value(), mdp.target_value());
                t.check(Tally::close(x, y, 1e-10), || format!("MDP value {x} vs backward induction {y}"));
            }
            for n_states in 2..=8 {
                let p_left = 0.25;
                let lock = combination_lock(n_states, p_left, 1.0, None)?;
                let red = mdp_to_bandit(&lock, DEFAULT_TRAJECTORY_BUDGET)?;
                let reach: f64 = red
                    .trajectories
                    .iter()
                    .enumerate()
                    .filter(|(_, path)| path.states.last() == Some(&(n_states - 1)))
                    .map(|(i, _)| red.bandit.behavior().prob(i))
                    .sum();
                let expected = (1.0f64 - p_left).powi(n_states as i32 - 1);
                t.check(reach == expected, || format!("lock N={n_states}: reach {reach} vs {expected}"));
            }
        }
        "minimax_consistency" => {
            for _ in 0..opts.instances {
                let inst = random_discrete_instance(rng, 4);
                let n = rng.random_range(1..=5);
                let bound = minimax_lower_bound(&MinimaxClass::of_instance(&inst)?, n)?.value;
                let mut worst_lr: f64 = 0.0;
                let mut worst_reg: f64 = 0.0;
                for w in class_witnesses(&inst)? {
                    if w.is_identifiable() {
                        worst_lr = worst_lr.max(lr_mse(&w, n)?);
                    }
                    worst_reg = worst_reg.max(enumerate_exact_moments(&w, n, EstimatorKind::Reg, DEFAULT_BUDGET)?.mse);
                }
                if inst.is_identifiable() {
                    t.check(bound <= worst_lr + 1e-12, || format!("n={n}: bound {bound} > worst LR MSE {worst_lr}"));
                }
                t.check(bound <= worst_reg + 1e-12, || format!("n={n}: bound {bound} > worst REG MSE {worst_reg}"));
            }
        }
        "uniform_rate" => {
            for k in 3..=200usize {
                let kf = k as f64;
                for n in 1..=500usize {
                    let lhs = (1.0 - 1.0 / kf).powi(2 * n as i32);
                    let rhs = (-2.0 * n as f64 / (kf - 1.0)).exp();
                    t.check(lhs >= rhs * (1.0 - 1e-12), || format!("K={k} n={n}: {lhs} < {rhs}"));
                }
                let half = (kf - 1.0) / 2.0;
                let floor = half * (-2.0 * half / (kf - 1.0)).exp();
                let target = (kf - 1.0) / (2.0 * std::f64::consts::E);
                t.check(floor >= target * (1.0 - 1e-9), || format!("K={k}: {floor} < {target}"));
            }
        }
        _ => unreachable!("suite names are validated"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass() {
        let opts = VerifyOptions {
            instances: 15,
            ..Default::default()
        };
        let report = run_verify(&[], &opts).unwrap();
        for s in &report.suites {
            assert_eq!(s.status, SuiteStatus::Pass, "{s:?}");
            assert!(s.checks > 0);
        }
    }

    #[test]
    fn unselected_suites_are_listed_as_skipped() {
        let report = run_verify(&["uniform_rate".into()], &VerifyOptions::default()).unwrap();
        assert_eq!(report.suites.len(), SUITES.len());
        assert_eq!(report.suite("uniform_rate").unwrap().status, SuiteStatus::Pass);
        assert_eq!(report.suite("fisher_identity").unwrap().status, SuiteStatus::Skipped);
    }

    #[test]
    fn unknown_suite_is_an_error() {
        assert!(run_verify(&["nope".into()], &VerifyOptions::default()).is_err());
    }

    #[test]
    fn perturbed_variance_formula_is_caught() {
        fn off_by_a_bit(inst: &BanditInstance) -> VarianceConstants {
            let mut vc = compute_v1_v2(inst);
            vc.v1 *= 1.01;
            vc
        }
        let opts = VerifyOptions {
            instances: 10,
            variance_formula: off_by_a_bit,
            ..Default::default()
        };
        let report = run_verify(&["lr_mse_exact".into()], &opts).unwrap();
        assert!(!report.passed());
        assert_eq!(report.suite("lr_mse_exact").unwrap().status, SuiteStatus::Fail);
    }
}
