//! Contextual bandits and fixed-horizon MDPs viewed as plain bandits over
//! composite actions: `(context, action)` pairs, or whole trajectories.

mod contextual;
mod lock;
mod mdp;

pub use contextual::{contextual_reg_fast, contextual_to_bandit, ContextualInstance, ContextualSample};
pub use lock::{combination_lock, LOCK_LEFT, LOCK_RIGHT};
pub use mdp::{
    lr_on_trajectories, mdp_to_bandit, LoggedTrajectory, MdpInstance, Trajectory, TrajectoryBandit,
    DEFAULT_TRAJECTORY_BUDGET,
};

use crate::error::{OpeError, Result};
use crate::policy::SUM_TOLERANCE;

/// Index drawn from `probs` by inverse CDF at `u in [0, 1)`.
pub(crate) fn draw_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc && p > 0.0 {
            return i;
        }
    }
    // rounding left u just above the total: last index with mass
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

pub(crate) fn check_distribution(probs: &[f64], what: &str) -> Result<()> {
    if probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
        return Err(OpeError::InvalidPolicy(format!("{what}: entry outside [0, 1]")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > SUM_TOLERANCE {
        return Err(OpeError::InvalidPolicy(format!("{what}: sums to {total}")));
    }
    Ok(())
}
