//! Small deterministic statistics helpers for the experiment aggregates.

use rand_chacha::rand_core::RngCore;

use crate::seeding;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut sorted = xs.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Seeded percentile-bootstrap 95% confidence interval for an estimator.
pub fn bootstrap_ci(
    xs: &[f64],
    estimator: fn(&[f64]) -> f64,
    iters: usize,
    seed: u64,
) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mut rng = seeding::trial_rng(seed, 0);
    let mut estimates = Vec::with_capacity(iters);
    let mut resample = vec![0.0; xs.len()];
    for _ in 0..iters {
        for slot in resample.iter_mut() {
            *slot = xs[(rng.next_u64() % xs.len() as u64) as usize];
        }
        estimates.push(estimator(&resample));
    }
    estimates.sort_unstable_by(f64::total_cmp);
    let lo = estimates[(0.025 * (iters - 1) as f64).round() as usize];
    let hi = estimates[(0.975 * (iters - 1) as f64).round() as usize];
    (lo, hi)
}
