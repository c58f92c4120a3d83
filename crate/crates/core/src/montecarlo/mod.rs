//! Replicated simulation: empirical MSE and nMSE curves for the estimators.
//!
//! Replication `i` at sample size `n` draws from its own random stream keyed
//! by `(seed, n, i)`, and squared errors are summed in replication order, so
//! results are bit-identical for any number of threads.

mod csv;
mod experiments;

pub use self::csv::{read_csv, write_csv, CsvRow, CSV_COLUMNS};
pub use experiments::{
    comparison_instance, experiment_estimator_comparison, experiment_k_scaling, kscaling_instance, log_grid,
    ComparisonSetup, ExperimentBundle, InstanceRun, KScalingSetup, COMPARISON_IDS, COMPARISON_SAMPLE_SIZES,
    DEFAULT_SEED,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Sampler};
use crate::error::{OpeError, Result};
use crate::estimators::EstimatorKind;
use crate::instance::BanditInstance;
use crate::rng::replication_stream;

pub const DEFAULT_REPLICATIONS: usize = 10_000;

fn default_replications() -> usize {
    DEFAULT_REPLICATIONS
}

fn default_estimators() -> Vec<EstimatorKind> {
    EstimatorKind::ALL.to_vec()
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    #[serde(default = "default_replications")]
    pub replications: usize,
    pub sample_sizes: Vec<usize>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<EstimatorKind>,
    /// Worker threads; `None` lets the pool pick.
    #[serde(default)]
    pub threads: Option<usize>,
}

impl McConfig {
    pub fn new(sample_sizes: Vec<usize>, replications: usize, seed: u64) -> Self {
        Self {
            replications,
            sample_sizes,
            seed,
            estimators: default_estimators(),
            threads: None,
        }
    }

    pub fn with_estimators(mut self, estimators: Vec<EstimatorKind>) -> Self {
        self.estimators = estimators;
        self
    }

    pub fn with_threads(mut self, threads: Option<usize>) -> Self {
        self.threads = threads;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < 2 {
            return Err(OpeError::InvalidConfig(format!(
                "replications must be at least 2, got {}",
                self.replications
            )));
        }
        if self.sample_sizes.is_empty() || self.sample_sizes[0] == 0 {
            return Err(OpeError::InvalidConfig("sample sizes must be non-empty and positive".into()));
        }
        if self.sample_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(OpeError::InvalidConfig("sample sizes must be strictly increasing".into()));
        }
        if self.estimators.is_empty() {
            return Err(OpeError::InvalidConfig("no estimators selected".into()));
        }
        if self.threads == Some(0) {
            return Err(OpeError::InvalidConfig("threads must be positive".into()));
        }
        Ok(())
    }
}

/// Summary for one `(estimator, n)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McPoint {
    pub estimator: EstimatorKind,
    pub n: usize,
    pub replications: usize,
    pub mse: f64,
    pub nmse: f64,
    /// Standard error of `mse`: sample deviation of the squared errors over
    /// the square root of the replication count.
    pub stderr: f64,
    pub mean_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub seed: u64,
    pub truth: f64,
    /// Ordered by `n`, then by the configured estimator order.
    pub points: Vec<McPoint>,
}

impl McResult {
    pub fn curve(&self, estimator: EstimatorKind) -> Vec<&McPoint> {
        self.points.iter().filter(|p| p.estimator == estimator).collect()
    }

    pub fn point(&self, estimator: EstimatorKind, n: usize) -> Option<&McPoint> {
        self.points.iter().find(|p| p.estimator == estimator && p.n == n)
    }

    /// Sample size with the largest nMSE for `estimator`; first one on ties.
    pub fn knee(&self, estimator: EstimatorKind) -> Option<usize> {
        let mut best: Option<&McPoint> = None;
        for p in self.curve(estimator) {
            if best.is_none_or(|b| p.nmse > b.nmse) {
                best = Some(p);
            }
        }
        best.map(|p| p.n)
    }
}

pub fn run_mc(instance: &BanditInstance, config: &McConfig) -> Result<McResult> {
    config.validate()?;
    if config.estimators.contains(&EstimatorKind::Lr) {
        instance.require_identifiable()?;
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = config.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| OpeError::InvalidConfig(format!("thread pool: {e}")))?;
    let truth = instance.policy_value();
    let sampler = Sampler::new(instance);
    let k = instance.num_actions();
    let m = config.estimators.len();
    let mut points = Vec::with_capacity(config.sample_sizes.len() * m);
    for &n in &config.sample_sizes {
        let estimates: Vec<Vec<f64>> = pool.install(|| {
            (0..config.replications)
                .into_par_iter()
                .map_init(
                    || Dataset::new(k),
                    |data, r| {
                        let mut rng = replication_stream(config.seed, n, r);
                        data.clear();
                        sampler.fill(&mut rng, n, data);
                        config
                            .estimators
                            .iter()
                            .map(|e| e.estimate(instance, data))
                            .collect::<Result<Vec<f64>>>()
                    },
                )
                .collect::<Result<Vec<_>>>()
        })?;
        for (j, &estimator) in config.estimators.iter().enumerate() {
            let squared: Vec<f64> = estimates.iter().map(|e| (e[j] - truth).powi(2)).collect();
            let mean_estimate = estimates.iter().map(|e| e[j]).sum::<f64>() / config.replications as f64;
            let (mse, stderr) = mean_and_stderr(&squared);
            points.push(McPoint {
                estimator,
                n,
                replications: config.replications,
                mse,
                nmse: n as f64 * mse,
                stderr,
                mean_estimate,
            });
        }
    }
    Ok(McResult {
        seed: config.seed,
        truth,
        points,
    })
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (r - 1.0)).sqrt() / r.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::Policy;
    use crate::reward::{RewardDist, RewardModel};

    fn noiseless() -> BanditInstance {
        let p = Policy::new(vec![0.2, 0.3, 0.5]).unwrap();
        let r = RewardModel::new(vec![RewardDist::point(0.1), RewardDist::point(0.5), RewardDist::point(0.9)], None)
            .unwrap();
        BanditInstance::new(p.clone(), p, r).unwrap()
    }

    #[test]
    fn config_rejects_bad_values() {
        assert!(McConfig::new(vec![10], 1, 0).validate().is_err());
        assert!(McConfig::new(vec![10, 10], 5, 0).validate().is_err());
        assert!(McConfig::new(vec![0, 3], 5, 0).validate().is_err());
        assert!(McConfig::new(vec![], 5, 0).validate().is_err());
        assert!(McConfig::new(vec![1, 3], 5, 0).validate().is_ok());
    }

    #[test]
    fn stderr_of_known_values() {
        let (m, s) = mean_and_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        // sample variance 5/3
        assert!((s - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn nmse_is_n_times_mse() {
        let inst = noiseless().with_behavior(Policy::uniform(3).unwrap()).unwrap();
        let res = run_mc(&inst, &McConfig::new(vec![3, 7, 20], 50, 1)).unwrap();
        for p in &res.points {
            assert_eq!(p.nmse, p.n as f64 * p.mse);
        }
        assert_eq!(res.points.len(), 6);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let inst = noiseless().with_behavior(Policy::uniform(3).unwrap()).unwrap();
        let cfg = McConfig::new(vec![5, 40], 300, 11);
        let one = run_mc(&inst, &cfg.clone().with_threads(Some(1))).unwrap();
        let four = run_mc(&inst, &cfg.with_threads(Some(4))).unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn unidentifiable_rejected_for_lr_only() {
        let inst = noiseless().with_behavior(Policy::new(vec![0.5, 0.5, 0.0]).unwrap()).unwrap();
        let cfg = McConfig::new(vec![5], 10, 0);
        assert!(matches!(run_mc(&inst, &cfg), Err(OpeError::Unidentifiable { action: 2 })));
        let reg_only = cfg.with_estimators(vec![EstimatorKind::Reg]);
        assert!(run_mc(&inst, &reg_only).is_ok());
    }

    #[test]
    fn config_json_defaults() {
        let cfg: McConfig = serde_json::from_str(r#"{"sample_sizes": [10, 100]}"#).unwrap();
        assert_eq!(cfg.replications, DEFAULT_REPLICATIONS);
        assert_eq!(cfg.estimators, EstimatorKind::ALL.to_vec());
        assert!(serde_json::from_str::<McConfig>(r#"{"sample_sizes": [1], "bogus": 1}"#).is_err());
    }
}
