use serde::{Deserialize, Serialize};

use super::{run_mc, CsvRow, McConfig, McResult, DEFAULT_REPLICATIONS};
use crate::analytics::compute_v1_v2;
use crate::error::Result;
use crate::estimators::EstimatorKind;
use crate::instance::BanditInstance;
use crate::policy::Policy;
use crate::reward::{RewardDist, RewardModel};

pub const DEFAULT_SEED: u64 = 42;

pub const COMPARISON_SAMPLE_SIZES: [usize; 10] = [10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10_000];

/// Instance ids of the estimator-comparison experiment, indexed by shape.
pub const COMPARISON_IDS: [&str; 3] = ["logging_increasing", "logging_uniform", "logging_decreasing"];

/// `K` actions numbered `a = 1..K` (stored at index `a - 1`) with mean reward
/// `a/K`, Normal noise of variance `sigma2`, and target `pi(a) ∝ a`.
fn linear_instance(k: usize, sigma2: f64, logging_weights: &[f64]) -> Result<BanditInstance> {
    let up: Vec<f64> = (1..=k).map(|a| a as f64).collect();
    let rewards = (1..=k).map(|a| RewardDist::normal(a as f64 / k as f64, sigma2)).collect();
    BanditInstance::new(
        Policy::from_weights(logging_weights)?,
        Policy::from_weights(&up)?,
        RewardModel::new(rewards, None)?,
    )
}

/// One of the three estimator-comparison instances: `shape` 0 logs with
/// `pi_D(a) ∝ a`, 1 uniformly, 2 with `pi_D(a) ∝ K + 1 - a`.
pub fn comparison_instance(k: usize, sigma2: f64, shape: usize) -> Result<BanditInstance> {
    let weights: Vec<f64> = (1..=k)
        .map(|a| match shape {
            0 => a as f64,
            1 => 1.0,
            _ => (k + 1 - a) as f64,
        })
        .collect();
    linear_instance(k, sigma2, &weights)
}

/// Uniform logging over `K` actions, otherwise as in the comparison instances.
pub fn kscaling_instance(k: usize, sigma2: f64) -> Result<BanditInstance> {
    linear_instance(k, sigma2, &vec![1.0; k])
}

/// Roughly `per_decade` log-spaced integers from 1 up to and including `max`.
pub fn log_grid(max: usize, per_decade: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    let top = (max as f64).log10();
    let steps = (top * per_decade as f64).floor() as usize;
    for j in 0..=steps {
        let n = 10f64.powf(j as f64 / per_decade as f64).round() as usize;
        if out.last() != Some(&n) && n <= max {
            out.push(n);
        }
    }
    if out.last() != Some(&max) {
        out.push(max);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSetup {
    pub k: usize,
    pub sigma2: f64,
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    pub threads: Option<usize>,
}

impl Default for ComparisonSetup {
    fn default() -> Self {
        Self {
            k: 10,
            sigma2: 0.01,
            sample_sizes: COMPARISON_SAMPLE_SIZES.to_vec(),
            replications: DEFAULT_REPLICATIONS,
            seed: DEFAULT_SEED,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KScalingSetup {
    pub ks: Vec<usize>,
    pub sigma2: f64,
    /// The grid for `K` runs from 1 to `max_factor * K`.
    pub max_factor: usize,
    pub points_per_decade: usize,
    pub replications: usize,
    pub seed: u64,
    pub threads: Option<usize>,
}

impl Default for KScalingSetup {
    fn default() -> Self {
        Self {
            ks: vec![50, 100, 200, 500, 1000],
            sigma2: 0.01,
            max_factor: 40,
            points_per_decade: 8,
            replications: DEFAULT_REPLICATIONS,
            seed: DEFAULT_SEED,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRun {
    pub instance_id: String,
    pub k: usize,
    pub v1: f64,
    pub v2: f64,
    pub result: McResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentBundle {
    pub experiment: String,
    pub runs: Vec<InstanceRun>,
}

impl ExperimentBundle {
    pub fn rows(&self) -> Vec<CsvRow> {
        self.runs
            .iter()
            .flat_map(|run| {
                run.result.points.iter().map(move |p| CsvRow {
                    experiment: self.experiment.clone(),
                    instance_id: run.instance_id.clone(),
                    estimator: p.estimator,
                    n: p.n,
                    replications: p.replications,
                    mse: p.mse,
                    nmse: p.nmse,
                    stderr: p.stderr,
                    seed: run.result.seed,
                })
            })
            .collect()
    }

    pub fn run(&self, instance_id: &str) -> Option<&InstanceRun> {
        self.runs.iter().find(|r| r.instance_id == instance_id)
    }
}

fn run_instance(id: String, instance: &BanditInstance, config: &McConfig) -> Result<InstanceRun> {
    let vc = compute_v1_v2(instance);
    Ok(InstanceRun {
        instance_id: id,
        k: instance.num_actions(),
        v1: vc.v1,
        v2: vc.v2,
        result: run_mc(instance, config)?,
    })
}

/// LR against REG on the three logging policies.
pub fn experiment_estimator_comparison(setup: &ComparisonSetup) -> Result<ExperimentBundle> {
    let config = McConfig::new(setup.sample_sizes.clone(), setup.replications, setup.seed).with_threads(setup.threads);
    let runs = COMPARISON_IDS
        .iter()
        .enumerate()
        .map(|(shape, id)| run_instance(id.to_string(), &comparison_instance(setup.k, setup.sigma2, shape)?, &config))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentBundle {
        experiment: "comparison".into(),
        runs,
    })
}

/// REG under uniform logging for each `K`.
pub fn experiment_k_scaling(setup: &KScalingSetup) -> Result<ExperimentBundle> {
    let runs = setup
        .ks
        .iter()
        .map(|&k| {
            let grid = log_grid(setup.max_factor * k, setup.points_per_decade);
            let config = McConfig::new(grid, setup.replications, setup.seed)
                .with_estimators(vec![EstimatorKind::Reg])
                .with_threads(setup.threads);
            run_instance(format!("k{k}"), &kscaling_instance(k, setup.sigma2)?, &config)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentBundle {
        experiment: "kscaling".into(),
        runs,
    })
}
