//! Exact binomial quantities: the inverse-moment expectation behind the REG
//! variance, its two upper bounds, and the Chernoff lower-tail bound.

use serde::{Deserialize, Serialize};

use crate::error::{OpeError, Result};

/// Sample sizes above this use the normalized recurrence.
const DIRECT_MAX_N: usize = 60;

/// Probability mass function of Binomial(n, p) as a vector indexed by k.
pub fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    let mut pmf = vec![0.0; n + 1];
    if p <= 0.0 {
        pmf[0] = 1.0;
        return pmf;
    }
    if p >= 1.0 {
        pmf[n] = 1.0;
        return pmf;
    }
    if n <= DIRECT_MAX_N {
        let mut coef = 1.0;
        for (k, slot) in pmf.iter_mut().enumerate() {
            *slot = coef * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
            coef = coef * (n - k) as f64 / (k + 1) as f64;
        }
        pmf
    } else {
        pmf_by_recurrence(n, p)
    }
}

/// Ratios `pmf(k+1)/pmf(k)` walked outward from the mode, then normalized;
/// no powers or factorials that could overflow.
fn pmf_by_recurrence(n: usize, p: f64) -> Vec<f64> {
    let mut w = vec![0.0; n + 1];
    let mode = (((n + 1) as f64 * p).floor() as usize).min(n);
    let odds = p / (1.0 - p);
    w[mode] = 1.0;
    for k in mode..n {
        w[k + 1] = w[k] * (n - k) as f64 / (k + 1) as f64 * odds;
    }
    for k in (0..mode).rev() {
        w[k] = w[k + 1] * (k + 1) as f64 / (n - k) as f64 / odds;
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

fn check_np(n: usize, p: f64) -> Result<()> {
    if n == 0 {
        return Err(OpeError::Precondition("n must be at least 1".into()));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(OpeError::Precondition(format!("p = {p} outside (0, 1]")));
    }
    Ok(())
}

/// `E[1{S>0}/p_hat - 1/p]` for `S ~ Binomial(n, p)`, `p_hat = S/n`.
///
/// Can be negative: for small `n` the indicator discards the `S = 0` mass.
pub fn inverse_moment_exact(n: usize, p: f64) -> Result<f64> {
    check_np(n, p)?;
    let pmf = binomial_pmf(n, p);
    let e: f64 = (1..=n).map(|k| n as f64 / k as f64 * pmf[k]).sum();
    Ok(e - 1.0 / p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseMomentBounds {
    /// `4/p`, valid for every `n`.
    pub basic: f64,
    /// `(2/p) sqrt(2/(np)) (sqrt(1.5 ln(np/2)) + 1)`, stated for `np >= 34`.
    pub refined: Option<f64>,
}

pub const REFINED_MIN_NP: f64 = 34.0;

pub fn inverse_moment_bounds(n: usize, p: f64) -> Result<InverseMomentBounds> {
    check_np(n, p)?;
    let np = n as f64 * p;
    let refined = (np >= REFINED_MIN_NP)
        .then(|| 2.0 / p * (2.0 / np).sqrt() * ((1.5 * (np / 2.0).ln()).sqrt() + 1.0));
    Ok(InverseMomentBounds {
        basic: 4.0 / p,
        refined,
    })
}

/// Multiplicative Chernoff bound `exp(-beta^2 n p / 2)` on
/// `P(S/n <= (1 - beta) p)`.
pub fn chernoff_lower_tail(n: usize, p: f64, beta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&beta) {
        return Err(OpeError::Precondition(format!("beta = {beta} outside [0, 1)")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(OpeError::Precondition(format!("p = {p} outside [0, 1]")));
    }
    Ok((-beta * beta * n as f64 * p / 2.0).exp())
}

/// Exact `P(S/n <= (1 - beta) p)` for `S ~ Binomial(n, p)`. A threshold
/// within 1e-9 of an integer counts that integer in.
pub fn binomial_lower_tail(n: usize, p: f64, beta: f64) -> f64 {
    let threshold = (1.0 - beta) * p * n as f64;
    let kmax = (threshold + 1e-9).floor();
    if kmax < 0.0 {
        return 0.0;
    }
    let kmax = (kmax as usize).min(n);
    binomial_pmf(n, p)[..=kmax].iter().sum()
}
