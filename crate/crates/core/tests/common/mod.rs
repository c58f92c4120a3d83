#![allow(dead_code)]

use ope_core::BanditInstance;

/// Exact first two moments of both estimators, by walking every sequence of
/// `n` logged `(action, reward)` pairs. Written from the estimator
/// definitions, independently of the library's oracle.
#[derive(Debug, Clone, Copy)]
pub struct BruteMoments {
    pub lr_mean: f64,
    pub lr_mse: f64,
    pub reg_mean: f64,
    pub reg_mse: f64,
}

pub fn brute_force(instance: &BanditInstance, n: usize) -> BruteMoments {
    let k = instance.num_actions();
    let mut outcomes = Vec::new();
    for a in 0..k {
        let q = instance.behavior().prob(a);
        if q == 0.0 {
            continue;
        }
        for (r, w) in instance.rewards().dist(a).atoms().expect("discrete rewards") {
            if w > 0.0 {
                outcomes.push((a, r, q * w));
            }
        }
    }
    let v = instance.policy_value();
    let mut acc = BruteMoments {
        lr_mean: 0.0,
        lr_mse: 0.0,
        reg_mean: 0.0,
        reg_mse: 0.0,
    };
    let mut seq = vec![0usize; n];
    loop {
        let mut prob = 1.0;
        let mut counts = vec![0usize; k];
        let mut sums = vec![0.0; k];
        let mut lr = 0.0;
        for &i in &seq {
            let (a, r, p) = outcomes[i];
            prob *= p;
            counts[a] += 1;
            sums[a] += r;
            lr += instance.target().prob(a) / instance.behavior().prob(a) * r;
        }
        lr /= n as f64;
        let reg: f64 = (0..k)
            .filter(|&a| counts[a] > 0)
            .map(|a| instance.target().prob(a) * sums[a] / counts[a] as f64)
            .sum();
        acc.lr_mean += prob * lr;
        acc.lr_mse += prob * (lr - v) * (lr - v);
        acc.reg_mean += prob * reg;
        acc.reg_mse += prob * (reg - v) * (reg - v);
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == n {
                return acc;
            }
            seq[pos] += 1;
            if seq[pos] < outcomes.len() {
                break;
            }
            seq[pos] = 0;
            pos += 1;
        }
    }
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
