use ope_core::analytics::compute_v1_v2;
use ope_core::dataset::Dataset;
use ope_core::estimators::{lr_value, reg_value};
use ope_core::generate::{random_contextual, random_mdp};
use ope_core::reductions::{
    combination_lock, contextual_reg_fast, contextual_to_bandit, lr_on_trajectories, mdp_to_bandit, ContextualInstance,
    MdpInstance, DEFAULT_TRAJECTORY_BUDGET,
};
use ope_core::rng::seeded;
use ope_core::{Policy, RewardDist};
use rand::Rng;

fn direct_v1_v2(c: &ContextualInstance) -> (f64, f64) {
    let v = c.policy_value();
    let (mut v1, mut second) = (0.0, 0.0);
    for x in 0..c.num_contexts() {
        for a in 0..c.num_actions() {
            let mu = c.context().prob(x);
            let (p, q) = (c.target(x).prob(a), c.behavior(x).prob(a));
            let (r, s) = (c.reward(x, a).mean(), c.reward(x, a).variance());
            v1 += mu * p * p * s / q;
            second += mu * p * p * r * r / q;
        }
    }
    (v1, second - v * v)
}

#[test]
fn contextual_constants_match_direct_formulas() {
    let mut rng = seeded(301);
    for _ in 0..100 {
        let c = random_contextual(&mut rng, 4, 4);
        let b = contextual_to_bandit(&c).unwrap();
        let vc = compute_v1_v2(&b);
        let (v1, v2) = direct_v1_v2(&c);
        assert!((vc.v1 - v1).abs() < 1e-12);
        assert!((vc.v2 - v2).abs() < 1e-12);
        assert!((b.policy_value() - c.policy_value()).abs() < 1e-12);
    }
}

#[test]
fn fast_contextual_reg_is_bit_identical() {
    let mut rng = seeded(302);
    for seed in 0..100 {
        let c = random_contextual(&mut rng, 5, 5);
        let b = contextual_to_bandit(&c).unwrap();
        let data = c.sample(rng.random_range(1..60), seed);
        let flat: Vec<(usize, f64)> = data.iter().map(|&(x, a, r)| (c.composite(x, a), r)).collect();
        let ds = Dataset::from_samples(b.num_actions(), &flat).unwrap();
        assert_eq!(contextual_reg_fast(&c, &data).to_bits(), reg_value(b.target(), &ds).unwrap().to_bits());
    }
}

#[test]
fn one_step_mdp_is_the_contextual_problem() {
    let mut rng = seeded(303);
    for _ in 0..50 {
        let mdp = random_mdp(&mut rng, 3, 3, 1);
        let ctx = ContextualInstance::new(
            Policy::new((0..mdp.num_states()).map(|x| start_prob(&mdp, x)).collect()).unwrap(),
            (0..mdp.num_states()).map(|x| mdp.behavior(x).clone()).collect(),
            (0..mdp.num_states()).map(|x| mdp.target(x).clone()).collect(),
            (0..mdp.num_states())
                .map(|x| (0..mdp.num_actions()).map(|a| mdp.reward(x, a).clone()).collect())
                .collect(),
        )
        .unwrap();
        let red = mdp_to_bandit(&mdp, DEFAULT_TRAJECTORY_BUDGET).unwrap();
        let (a, b) = (compute_v1_v2(&red.bandit), compute_v1_v2(&contextual_to_bandit(&ctx).unwrap()));
        assert!((red.bandit.policy_value() - ctx.policy_value()).abs() < 1e-12);
        assert!((a.v1 - b.v1).abs() < 1e-12);
        assert!((a.v2 - b.v2).abs() < 1e-12);
    }
}

fn start_prob(mdp: &MdpInstance, x: usize) -> f64 {
    // a one-step trajectory bandit's behavior mass over states x1
    let red = mdp_to_bandit(mdp, DEFAULT_TRAJECTORY_BUDGET).unwrap();
    red.trajectories
        .iter()
        .enumerate()
        .filter(|(_, t)| t.states[0] == x)
        .map(|(i, _)| red.bandit.behavior().prob(i))
        .sum()
}

#[test]
fn trajectory_lr_equals_reduced_lr() {
    let mut rng = seeded(304);
    for seed in 0..50 {
        let mdp = random_mdp(&mut rng, 3, 3, 3);
        let red = mdp_to_bandit(&mdp, DEFAULT_TRAJECTORY_BUDGET).unwrap();
        let logged = mdp.sample(40, seed);
        let flat: Vec<(usize, f64)> = logged
            .iter()
            .map(|t| (red.action_of(&t.path).unwrap(), t.rewards.iter().sum()))
            .collect();
        let ds = Dataset::from_samples(red.bandit.num_actions(), &flat).unwrap();
        let reduced = lr_value(red.bandit.target(), red.bandit.behavior(), &ds).unwrap();
        let stepwise = lr_on_trajectories(&mdp, &logged).unwrap();
        assert!((reduced - stepwise).abs() <= 1e-12 * reduced.abs().max(1.0), "{reduced} vs {stepwise}");
    }
}

#[test]
fn mdp_values_match_backward_induction() {
    let mut rng = seeded(305);
    for _ in 0..100 {
        let mdp = random_mdp(&mut rng, 3, 3, 4);
        let red = mdp_to_bandit(&mdp, DEFAULT_TRAJECTORY_BUDGET).unwrap();
        assert!((red.bandit.policy_value() - mdp.target_value()).abs() < 1e-10);
        let behavior_value: f64 = (0..red.bandit.num_actions())
            .map(|i| red.bandit.behavior().prob(i) * red.bandit.rewards().mean(i))
            .sum();
        assert!((behavior_value - mdp.behavior_value()).abs() < 1e-10);
    }
}

#[test]
fn lock_reach_probability_is_exact() {
    for n_states in 2..=8 {
        for p_left in [0.5, 0.25, 0.125, 0.75] {
            let lock = combination_lock(n_states, p_left, 1.0, None).unwrap();
            let red = mdp_to_bandit(&lock, DEFAULT_TRAJECTORY_BUDGET).unwrap();
            let reach: f64 = red
                .trajectories
                .iter()
                .enumerate()
                .filter(|(_, t)| t.states.last() == Some(&(n_states - 1)))
                .map(|(i, _)| red.bandit.behavior().prob(i))
                .sum();
            assert_eq!(reach, (1.0f64 - p_left).powi(n_states as i32 - 1));
            assert_eq!(red.bandit.policy_value(), 1.0);
            // the behavior value is the reach probability times the payoff
            assert_eq!(lock.behavior_value(), reach);
        }
    }
}

#[test]
fn mdp_json_round_trip_through_file() {
    let lock = combination_lock(4, 0.25, 2.0, Some(5)).unwrap();
    let dir = std::env::temp_dir().join(format!("ope-mdp-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("lock.json");
    std::fs::write(&path, serde_json::to_string(&lock).unwrap()).unwrap();
    let back: MdpInstance = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(back, lock);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn fast_reg_on_a_million_pairs() {
    let (m, k) = (1000, 1000);
    let rows = || -> Vec<Policy> { vec![Policy::uniform(k).unwrap(); m] };
    let c = ContextualInstance::new(
        Policy::uniform(m).unwrap(),
        rows(),
        rows(),
        (0..m).map(|x| (0..k).map(|a| RewardDist::point(((x + a) % 7) as f64 / 7.0)).collect()).collect(),
    )
    .unwrap();
    let data = c.sample(1000, 5);
    let v = contextual_reg_fast(&c, &data);
    // each observed pair contributes 1e-6 times its reward
    let direct: f64 = data.iter().map(|&(_, _, r)| r).sum::<f64>() * 1e-6;
    assert!(v > 0.0 && v <= direct + 1e-12);
    assert_eq!(contextual_reg_fast(&c, &[]), 0.0);
}

#[test]
fn deterministic_two_step_masses_sum_to_one() {
    let mdp = MdpInstance::new(
        2,
        vec![0.5, 0.5],
        vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![vec![0.0, 1.0], vec![1.0, 0.0]]],
        vec![vec![RewardDist::point(0.0), RewardDist::point(1.0)]; 2],
        vec![Policy::new(vec![0.3, 0.7]).unwrap(); 2],
        vec![Policy::new(vec![0.9, 0.1]).unwrap(); 2],
    )
    .unwrap();
    let red = mdp_to_bandit(&mdp, DEFAULT_TRAJECTORY_BUDGET).unwrap();
    assert_eq!(red.trajectories.len(), 8);
    let total = |p: &Policy| p.probs().iter().sum::<f64>();
    assert!((total(red.bandit.behavior()) - 1.0).abs() < 1e-15);
    assert!((total(red.bandit.target()) - 1.0).abs() < 1e-15);
    for (i, t) in red.trajectories.iter().enumerate() {
        let ratio = red.bandit.target().prob(i) / red.bandit.behavior().prob(i);
        assert!((ratio - mdp.stepwise_weight(t)).abs() < 1e-12);
    }
}

#[test]
fn lock_reg_bias_is_the_missing_probability_of_the_opening_path() {
    let lock = combination_lock(6, 0.5, 1.0, None).unwrap();
    let red = mdp_to_bandit(&lock, DEFAULT_TRAJECTORY_BUDGET).unwrap().with_rmax(1.0).unwrap();
    assert_eq!(red.bandit.rewards().rmax(), Some(1.0));
    for n in [1, 10, 32, 100, 1000] {
        let want = (1.0f64 - 1.0 / 32.0).powi(n);
        let b = ope_core::analytics::reg_bias(&red.bandit, n as usize);
        assert!((b - want).abs() <= 1e-14, "n={n}: {b} vs {want}");
    }
}
