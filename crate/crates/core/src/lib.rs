//! Off-policy evaluation for finite-armed bandits, contextual bandits and
//! fixed-horizon MDPs.
//!
//! The likelihood-ratio (LR) and regression (REG) estimators, their exact
//! risk expressions and minimax lower bounds, brute-force oracles for small
//! instances, reductions of contextual and MDP problems to the bandit case,
//! and a deterministic parallel Monte Carlo harness.

pub mod analytics;
pub mod dataset;
pub mod error;
pub mod estimators;
pub mod generate;
pub mod instance;
pub mod montecarlo;
pub mod oracle;
pub mod policy;
pub mod reductions;
pub mod reward;
pub mod rng;
pub mod verify;

pub use dataset::{sample_dataset, Dataset, Sampler};
pub use error::{OpeError, Result};
pub use estimators::{
    empirical_propensity, lr_estimate, reg_estimate, reg_estimate_reweighted, EstimateReport,
    EstimatorKind,
};
pub use instance::BanditInstance;
pub use oracle::{enumerate_exact_moments, ExactMoments};
pub use policy::Policy;
pub use reward::{RewardDist, RewardModel};
pub use montecarlo::{run_mc, McConfig, McResult};
pub use reductions::{combination_lock, contextual_to_bandit, mdp_to_bandit, ContextualInstance, MdpInstance};
