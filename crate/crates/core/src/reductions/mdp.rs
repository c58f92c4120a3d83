use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_distribution, draw_index};
use crate::error::{OpeError, Result};
use crate::instance::BanditInstance;
use crate::policy::Policy;
use crate::reward::{RewardDist, RewardModel};
use crate::rng;

/// Cap on the number of trajectories visited while building the reduction.
pub const DEFAULT_TRAJECTORY_BUDGET: f64 = 1e7;

/// Finite MDP with a fixed horizon and stationary policies.
///
/// `transitions[x][a]` is the next-state distribution; `rewards[x][a]` the
/// reward law of taking `a` in `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MdpFile", into = "MdpFile")]
pub struct MdpInstance {
    horizon: usize,
    start: Vec<f64>,
    transitions: Vec<Vec<Vec<f64>>>,
    rewards: Vec<Vec<RewardDist>>,
    behavior: Vec<Policy>,
    target: Vec<Policy>,
}

/// States `x_1..x_{H+1}` and actions `a_1..a_H`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Trajectory {
    pub states: Vec<usize>,
    pub actions: Vec<usize>,
}

/// An observed trajectory together with its per-step rewards.
#[derive(Debug, Clone, PartialEq)]
pub struct LoggedTrajectory {
    pub path: Trajectory,
    pub rewards: Vec<f64>,
}

impl MdpInstance {
    pub fn new(
        horizon: usize,
        start: Vec<f64>,
        transitions: Vec<Vec<Vec<f64>>>,
        rewards: Vec<Vec<RewardDist>>,
        behavior: Vec<Policy>,
        target: Vec<Policy>,
    ) -> Result<Self> {
        if horizon == 0 {
            return Err(OpeError::InvalidConfig("horizon must be at least 1".into()));
        }
        let n = start.len();
        check_distribution(&start, "start distribution")?;
        let k = behavior.first().map_or(0, Policy::num_actions);
        for (what, len) in [
            ("transition rows", transitions.len()),
            ("reward rows", rewards.len()),
            ("behavior rows", behavior.len()),
            ("target rows", target.len()),
        ] {
            if len != n {
                return Err(OpeError::DimensionMismatch { what, got: len, expected: n });
            }
        }
        for x in 0..n {
            if transitions[x].len() != k || rewards[x].len() != k {
                return Err(OpeError::DimensionMismatch {
                    what: "actions per state",
                    got: transitions[x].len().min(rewards[x].len()),
                    expected: k,
                });
            }
            if behavior[x].num_actions() != k || target[x].num_actions() != k {
                return Err(OpeError::DimensionMismatch {
                    what: "policy row",
                    got: behavior[x].num_actions().min(target[x].num_actions()),
                    expected: k,
                });
            }
            for a in 0..k {
                if transitions[x][a].len() != n {
                    return Err(OpeError::DimensionMismatch {
                        what: "transition row",
                        got: transitions[x][a].len(),
                        expected: n,
                    });
                }
                check_distribution(&transitions[x][a], "transition row")?;
                rewards[x][a].validate()?;
            }
        }
        Ok(Self {
            horizon,
            start,
            transitions,
            rewards,
            behavior,
            target,
        })
    }

    pub fn num_states(&self) -> usize {
        self.start.len()
    }

    pub fn num_actions(&self) -> usize {
        self.behavior[0].num_actions()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn behavior(&self, x: usize) -> &Policy {
        &self.behavior[x]
    }

    pub fn target(&self, x: usize) -> &Policy {
        &self.target[x]
    }

    pub fn transition(&self, x: usize, a: usize) -> &[f64] {
        &self.transitions[x][a]
    }

    pub fn reward(&self, x: usize, a: usize) -> &RewardDist {
        &self.rewards[x][a]
    }

    pub fn with_horizon(&self, horizon: usize) -> Result<Self> {
        let mut out = self.clone();
        if horizon == 0 {
            return Err(OpeError::InvalidConfig("horizon must be at least 1".into()));
        }
        out.horizon = horizon;
        Ok(out)
    }

    /// Expected total reward of the target policy by backward induction.
    pub fn target_value(&self) -> f64 {
        self.value_of(&self.target)
    }

    pub fn behavior_value(&self) -> f64 {
        self.value_of(&self.behavior)
    }

    fn value_of(&self, policy: &[Policy]) -> f64 {
        let (n, k) = (self.num_states(), self.num_actions());
        let mut value = vec![0.0; n];
        for _ in 0..self.horizon {
            value = (0..n)
                .map(|x| {
                    (0..k)
                        .map(|a| {
                            let next: f64 = self.transitions[x][a].iter().zip(&value).map(|(p, v)| p * v).sum();
                            policy[x].prob(a) * (self.rewards[x][a].mean() + next)
                        })
                        .sum()
                })
                .collect();
        }
        self.start.iter().zip(&value).map(|(p, v)| p * v).sum()
    }

    /// Probability of the path under the behavior (`false`) or target
    /// (`true`) policy.
    pub fn path_probability(&self, path: &Trajectory, under_target: bool) -> f64 {
        let policy = if under_target { &self.target } else { &self.behavior };
        let mut p = self.start[path.states[0]];
        for (h, &a) in path.actions.iter().enumerate() {
            let x = path.states[h];
            p *= policy[x].prob(a) * self.transitions[x][a][path.states[h + 1]];
        }
        p
    }

    /// Product of per-step ratios `pi(a_h|x_h) / pi_D(a_h|x_h)`.
    pub fn stepwise_weight(&self, path: &Trajectory) -> f64 {
        path.actions
            .iter()
            .zip(&path.states)
            .map(|(&a, &x)| self.target[x].prob(a) / self.behavior[x].prob(a))
            .product()
    }

    /// `n` trajectories generated by the behavior policy.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<LoggedTrajectory> {
        let mut rng = rng::seeded(seed);
        (0..n)
            .map(|_| {
                let mut x = draw_index(&self.start, rng.random());
                let mut states = vec![x];
                let mut actions = Vec::with_capacity(self.horizon);
                let mut rewards = Vec::with_capacity(self.horizon);
                for _ in 0..self.horizon {
                    let a = draw_index(self.behavior[x].probs(), rng.random());
                    rewards.push(self.rewards[x][a].sample(&mut rng));
                    x = draw_index(&self.transitions[x][a], rng.random());
                    actions.push(a);
                    states.push(x);
                }
                LoggedTrajectory {
                    path: Trajectory { states, actions },
                    rewards,
                }
            })
            .collect()
    }
}

/// Per-trajectory LR: the mean over trajectories of the product of per-step
/// ratios times the return.
pub fn lr_on_trajectories(mdp: &MdpInstance, data: &[LoggedTrajectory]) -> Result<f64> {
    if data.is_empty() {
        return Err(OpeError::Precondition("LR needs at least one trajectory".into()));
    }
    let total: f64 = data
        .iter()
        .map(|t| mdp.stepwise_weight(&t.path) * t.rewards.iter().sum::<f64>())
        .sum();
    Ok(total / data.len() as f64)
}

/// The reduced bandit and the trajectory behind each of its actions.
#[derive(Debug, Clone)]
pub struct TrajectoryBandit {
    pub bandit: BanditInstance,
    pub trajectories: Vec<Trajectory>,
    index: HashMap<Trajectory, usize>,
}

impl TrajectoryBandit {
    /// Declares a cap on trajectory returns, used by the bound computations.
    pub fn with_rmax(mut self, rmax: f64) -> Result<Self> {
        let rewards = RewardModel::new(self.bandit.rewards().dists().to_vec(), Some(rmax))?;
        self.bandit = self.bandit.with_rewards(rewards)?;
        Ok(self)
    }

    pub fn action_of(&self, path: &Trajectory) -> Option<usize> {
        self.index.get(path).copied()
    }
}

/// Bandit whose actions are the trajectories with positive probability under
/// the behavior or the target policy.
///
/// Only those trajectories are visited, so the cost is governed by the number
/// of reachable paths rather than `N^(H+1) K^H`; `budget` caps that number.
pub fn mdp_to_bandit(mdp: &MdpInstance, budget: f64) -> Result<TrajectoryBandit> {
    let mut walk = Walk {
        mdp,
        budget,
        states: Vec::with_capacity(mdp.horizon + 1),
        actions: Vec::with_capacity(mdp.horizon),
        out: Vec::new(),
    };
    for x in 0..mdp.num_states() {
        let p = mdp.start[x];
        if p > 0.0 {
            walk.states.push(x);
            walk.descend(p, p)?;
            walk.states.pop();
        }
    }
    let mut trajectories = Vec::with_capacity(walk.out.len());
    let mut behavior = Vec::with_capacity(walk.out.len());
    let mut target = Vec::with_capacity(walk.out.len());
    let mut rewards = Vec::with_capacity(walk.out.len());
    for (path, pb, pt) in walk.out {
        behavior.push(pb);
        target.push(pt);
        rewards.push(RewardDist::Sum {
            parts: path
                .actions
                .iter()
                .zip(&path.states)
                .map(|(&a, &x)| mdp.rewards[x][a].clone())
                .collect(),
        });
        trajectories.push(path);
    }
    let bandit = BanditInstance::new(
        Policy::new(behavior)?,
        Policy::new(target)?,
        RewardModel::new(rewards, None)?,
    )?;
    let index = trajectories.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
    Ok(TrajectoryBandit {
        bandit,
        trajectories,
        index,
    })
}

struct Walk<'a> {
    mdp: &'a MdpInstance,
    budget: f64,
    states: Vec<usize>,
    actions: Vec<usize>,
    out: Vec<(Trajectory, f64, f64)>,
}

impl Walk<'_> {
    fn descend(&mut self, pb: f64, pt: f64) -> Result<()> {
        if self.actions.len() == self.mdp.horizon {
            if self.out.len() as f64 >= self.budget {
                return Err(OpeError::BudgetExceeded {
                    needed: self.out.len() as f64 + 1.0,
                    budget: self.budget,
                });
            }
            self.out.push((
                Trajectory {
                    states: self.states.clone(),
                    actions: self.actions.clone(),
                },
                pb,
                pt,
            ));
            return Ok(());
        }
        let x = *self.states.last().expect("walk starts with a state");
        for a in 0..self.mdp.num_actions() {
            let (qb, qt) = (self.mdp.behavior[x].prob(a), self.mdp.target[x].prob(a));
            if qb == 0.0 && qt == 0.0 {
                continue;
            }
            for y in 0..self.mdp.num_states() {
                let step = self.mdp.transitions[x][a][y];
                if step == 0.0 {
                    continue;
                }
                self.actions.push(a);
                self.states.push(y);
                self.descend(pb * qb * step, pt * qt * step)?;
                self.states.pop();
                self.actions.pop();
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MdpFile {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "H")]
    h: usize,
    start: Vec<f64>,
    transitions: Vec<Vec<Vec<f64>>>,
    rewards: Vec<Vec<RewardDist>>,
    behavior: Vec<Vec<f64>>,
    target: Vec<Vec<f64>>,
}

impl TryFrom<MdpFile> for MdpInstance {
    type Error = OpeError;

    fn try_from(f: MdpFile) -> Result<Self> {
        if f.start.len() != f.n {
            return Err(OpeError::DimensionMismatch {
                what: "start distribution",
                got: f.start.len(),
                expected: f.n,
            });
        }
        let rows = |v: Vec<Vec<f64>>| v.into_iter().map(Policy::new).collect::<Result<Vec<_>>>();
        let mdp = MdpInstance::new(f.h, f.start, f.transitions, f.rewards, rows(f.behavior)?, rows(f.target)?)?;
        if mdp.num_actions() != f.k {
            return Err(OpeError::DimensionMismatch {
                what: "actions",
                got: mdp.num_actions(),
                expected: f.k,
            });
        }
        Ok(mdp)
    }
}

impl From<MdpInstance> for MdpFile {
    fn from(m: MdpInstance) -> Self {
        let rows = |v: &[Policy]| v.iter().map(|p| p.probs().to_vec()).collect();
        MdpFile {
            n: m.num_states(),
            k: m.num_actions(),
            h: m.horizon,
            behavior: rows(&m.behavior),
            target: rows(&m.target),
            start: m.start,
            transitions: m.transitions,
            rewards: m.rewards,
        }
    }
}
