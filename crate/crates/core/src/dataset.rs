use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{OpeError, Result};
use crate::instance::BanditInstance;
use crate::rng;

/// Logged `(action, reward)` pairs with per-action counts `n(a)` and reward
/// totals `R(a)` kept in sync.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<(usize, f64)>,
    counts: Vec<u64>,
    sums: Vec<f64>,
}

impl Dataset {
    pub fn new(num_actions: usize) -> Self {
        Self {
            samples: Vec::new(),
            counts: vec![0; num_actions],
            sums: vec![0.0; num_actions],
        }
    }

    pub fn from_samples(num_actions: usize, samples: &[(usize, f64)]) -> Result<Self> {
        let mut data = Self::new(num_actions);
        for &(a, r) in samples {
            if a >= num_actions {
                return Err(OpeError::ActionOutOfRange {
                    action: a,
                    actions: num_actions,
                });
            }
            data.push(a, r);
        }
        Ok(data)
    }

    /// Appends a sample. Panics if `action` is out of range.
    pub fn push(&mut self, action: usize, reward: f64) {
        self.samples.push((action, reward));
        self.counts[action] += 1;
        self.sums[action] += reward;
    }

    pub fn clear(&mut self) {
        self.samples.clear();
        self.counts.iter_mut().for_each(|c| *c = 0);
        self.sums.iter_mut().for_each(|s| *s = 0.0);
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn num_actions(&self) -> usize {
        self.counts.len()
    }

    pub fn samples(&self) -> &[(usize, f64)] {
        &self.samples
    }

    pub fn count(&self, action: usize) -> u64 {
        self.counts[action]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn reward_sum(&self, action: usize) -> f64 {
        self.sums[action]
    }

    pub fn reward_sums(&self) -> &[f64] {
        &self.sums
    }

    /// Actions with `n(a) = 0`, ascending.
    pub fn unseen_actions(&self) -> Vec<usize> {
        (0..self.counts.len()).filter(|&a| self.counts[a] == 0).collect()
    }

    pub fn mean_reward(&self) -> f64 {
        self.samples.iter().map(|s| s.1).sum::<f64>() / self.samples.len() as f64
    }
}

/// Draws `(A, R)` pairs from an instance's behavior policy and reward laws.
#[derive(Debug, Clone)]
pub struct Sampler<'a> {
    instance: &'a BanditInstance,
    actions: WeightedIndex<f64>,
}

impl<'a> Sampler<'a> {
    pub fn new(instance: &'a BanditInstance) -> Self {
        let actions = WeightedIndex::new(instance.behavior().probs())
            .expect("a validated policy has positive total mass");
        Self { instance, actions }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, f64) {
        let a = self.actions.sample(rng);
        (a, self.instance.rewards().dist(a).sample(rng))
    }

    /// Replaces the contents of `data` with `n` fresh draws.
    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, n: usize, data: &mut Dataset) {
        data.clear();
        for _ in 0..n {
            let (a, r) = self.draw(rng);
            data.push(a, r);
        }
    }
}

/// `n` i.i.d. draws from the instance, fully determined by `seed`.
pub fn sample_dataset(instance: &BanditInstance, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(OpeError::Precondition("sample size must be at least 1".into()));
    }
    let sampler = Sampler::new(instance);
    let mut rng = rng::seeded(seed);
    let mut data = Dataset::new(instance.num_actions());
    sampler.fill(&mut rng, n, &mut data);
    Ok(data)
}
