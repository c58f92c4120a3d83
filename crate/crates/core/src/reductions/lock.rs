use super::MdpInstance;
use crate::error::{OpeError, Result};
use crate::policy::Policy;
use crate::reward::RewardDist;

pub const LOCK_LEFT: usize = 0;
pub const LOCK_RIGHT: usize = 1;

/// Chain of `n_states` states, entered at state 0. `RIGHT` advances one
/// state (the last state absorbs), `LEFT` returns to the start. Moving into
/// the last state pays `rmax`; every other step pays 0.
///
/// The behavior policy plays `LEFT` with probability `p_left` everywhere; the
/// target always plays `RIGHT`. `horizon` defaults to `n_states - 1`, the
/// shortest path to the reward.
pub fn combination_lock(n_states: usize, p_left: f64, rmax: f64, horizon: Option<usize>) -> Result<MdpInstance> {
    if n_states < 2 {
        return Err(OpeError::InvalidConfig("a lock needs at least 2 states".into()));
    }
    if !(p_left > 0.0 && p_left < 1.0) {
        return Err(OpeError::InvalidConfig(format!("p_left {p_left} must lie in (0, 1)")));
    }
    let last = n_states - 1;
    let unit = |i: usize| {
        let mut row = vec![0.0; n_states];
        row[i] = 1.0;
        row
    };
    let transitions = (0..n_states)
        .map(|x| vec![unit(0), unit((x + 1).min(last))])
        .collect();
    let rewards = (0..n_states)
        .map(|x| {
            let pay = if x + 1 == last { rmax } else { 0.0 };
            vec![RewardDist::point(0.0), RewardDist::point(pay)]
        })
        .collect();
    let behavior = Policy::new(vec![p_left, 1.0 - p_left])?;
    let target = Policy::deterministic(2, LOCK_RIGHT)?;
    MdpInstance::new(
        horizon.unwrap_or(last),
        unit(0),
        transitions,
        rewards,
        vec![behavior; n_states],
        vec![target; n_states],
    )
}
