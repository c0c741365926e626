//! Closed-form quenched quantities.
//!
//! Everything here reduces to ratios of sums of `exp(S_i)` over index
//! ranges. For a query interval `[a, b]` put `w_i = exp(S_i - K)` with `K`
//! the running maximum of `S` over `[a, b-1]`; then
//!
//! * hitting: `P_x[T_b < T_a] = sum(w_i, a..x) / sum(w_i, a..b)` and its
//!   complement sums the remaining terms, so the pair adds to 1 exactly;
//! * expected exit times follow the two-stage difference-equation formula,
//!   first at `a + 1`, then transported to general `x`;
//! * the number of visits to `x` before leaving `(a, b)` is geometric with
//!   parameter `alpha_x P_{x+1}[T_x < T_b] + beta_x P_{x-1}[T_x < T_a]`;
//! * the expected local time at `x` per excursion from `i` is the ratio of
//!   an entry probability and an escape rate, which collapses to
//!   `(alpha_i / alpha_x) exp(S_i - S_x)`.
//!
//! All sums are accumulated in the scaled form, so the formulas stay finite
//! for potentials spanning hundreds of log-units.

use thiserror::Error;

use crate::environment::Environment;
use crate::potential::Potential;

#[derive(Debug, Error, PartialEq)]
pub enum QueryError {
    #[error("degenerate interval: need a < x < b, got a={a}, x={x}, b={b}")]
    Degenerate { a: i64, x: i64, b: i64 },
}

/// A query `a < x < b`, all inside the potential window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntervalQuery {
    pub a: i64,
    pub x: i64,
    pub b: i64,
}

impl IntervalQuery {
    pub fn new(a: i64, x: i64, b: i64) -> Result<Self, QueryError> {
        if a < x && x < b {
            Ok(Self { a, x, b })
        } else {
            Err(QueryError::Degenerate { a, x, b })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuinProbabilities {
    /// `P_x[T_a < T_b]`: the walk reaches `a` first.
    pub p_a_before_b: f64,
    /// `P_x[T_b < T_a]`: the walk reaches `b` first.
    pub p_b_before_a: f64,
}

/// Weights `exp(S_i - K)` over `[a, b-1]`, `K = max S` there.
fn scaled_weights(pot: &Potential, a: i64, b: i64) -> Vec<f64> {
    let k = pot.max_in(a, b - 1);
    (a..b).map(|i| (pot.value(i) - k).exp()).collect()
}

/// Both exit probabilities from `x` on `(a, b)`.
pub fn ruin_probabilities(pot: &Potential, q: IntervalQuery) -> RuinProbabilities {
    let w = scaled_weights(pot, q.a, q.b);
    let split = (q.x - q.a) as usize;
    let below: f64 = w[..split].iter().sum();
    let above: f64 = w[split..].iter().sum();
    let total = below + above;
    RuinProbabilities {
        p_a_before_b: above / total,
        p_b_before_a: below / total,
    }
}

/// `P_x[T_b < T_a]` allowing `x` to sit on a boundary (0 at `a`, 1 at `b`).
fn hit_b_first(w: &[f64], a: i64, x: i64) -> f64 {
    let split = (x - a) as usize;
    if split == 0 {
        return 0.0;
    }
    if split == w.len() {
        return 1.0;
    }
    let below: f64 = w[..split].iter().sum();
    let above: f64 = w[split..].iter().sum();
    below / (below + above)
}

/// `E_x[T_a /\ T_b]` by the difference-equation solution. Equivalent to
/// indexing [`expected_exit_profile`] at `x`.
pub fn expected_exit_time(pot: &Potential, env: &Environment, q: IntervalQuery) -> f64 {
    expected_exit_profile(pot, env, q.a, q.b)[(q.x - q.a - 1) as usize]
}

/// `E_x[T_a /\ T_b]` for every interior `x` in one sweep.
///
/// The exit time is accumulated as occupation,
/// `E_x = sum over y of P_x[T_y < T_a /\ T_b] / escape(y)`, where
/// `escape(y) = alpha_y P_{y+1}[T_b < T_y] + beta_y P_{y-1}[T_a < T_y]`
/// is the per-visit probability of leaving without returning to `y`. Every
/// factor is a ratio of partial sums of `w_i`, so the whole expression is a
/// sum of positive terms. The textbook two-stage form (the value next to
/// `a`, transported to `x` with `F(j, l) = exp(S_j - S_l)` corrections) is
/// the same solution of the same difference equation, but its two terms
/// cancel catastrophically on lopsided intervals; see the equivalence test.
pub fn expected_exit_profile(pot: &Potential, env: &Environment, a: i64, b: i64) -> Vec<f64> {
    assert!(b - a >= 2, "need at least one interior site");
    let w = scaled_weights(pot, a, b);
    let at = |i: i64| (i - a) as usize;
    // prefix[t] = sum of w over [a, t); suffix[t] = sum over [t, b)
    let mut prefix = vec![0.0; w.len() + 1];
    for (i, &wi) in w.iter().enumerate() {
        prefix[i + 1] = prefix[i] + wi;
    }
    let mut suffix = vec![0.0; w.len() + 1];
    for i in (0..w.len()).rev() {
        suffix[i] = suffix[i + 1] + w[i];
    }
    // expected visits to y per entry = 1 / escape(y)
    let sojourn: Vec<f64> = (a + 1..b)
        .map(|y| {
            let up = env.alpha(y) * w[at(y)] / suffix[at(y)];
            let down = env.beta(y) * w[at(y) - 1] / prefix[at(y)];
            1.0 / (up + down)
        })
        .collect();

    let n = (b - a - 1) as usize;
    let mut out = vec![0.0; n];
    // from the left: sum over y < x of P_x[T_y first] / escape(y), with
    // P_x[T_y < T_b] = suffix_x / suffix_y
    let mut acc = 0.0; // sum of sojourn(y) / suffix_y
    for (row, x) in (a + 1..b).enumerate() {
        out[row] += suffix[at(x)] * acc + sojourn[row];
        acc += sojourn[row] / suffix[at(x)];
    }
    // from the right: y > x with P_x[T_y < T_a] = prefix_x / prefix_y
    let mut acc = 0.0;
    for row in (0..n).rev() {
        let x = a + 1 + row as i64;
        out[row] += prefix[at(x)] * acc;
        acc += sojourn[row] / prefix[at(x)];
    }
    out
}

/// The two-stage textbook form of the exit time, kept as a secondary route
/// for the equivalence test: value next to `a`, then the general-`x`
/// transport. Numerically fragile by construction.
#[doc(hidden)]
pub fn expected_exit_two_stage(pot: &Potential, env: &Environment, q: IntervalQuery) -> f64 {
    let (a, x, b) = (q.a, q.x, q.b);
    let w = scaled_weights(pot, a, b);
    let at = |i: i64| (i - a) as usize;
    let mut prefix = vec![0.0; w.len() + 1];
    for (i, &wi) in w.iter().enumerate() {
        prefix[i + 1] = prefix[i] + wi;
    }
    let mut suffix = vec![0.0; w.len() + 1];
    for i in (0..w.len()).rev() {
        suffix[i] = suffix[i + 1] + w[i];
    }
    let cost = |l: i64| 1.0 / (env.alpha(l) * w[at(l)]);
    let numer: f64 = (a + 1..b).map(|l| cost(l) * suffix[at(l)]).sum();
    let e_next_to_a = numer * w[0] / prefix[w.len()];
    let transported = e_next_to_a * prefix[at(x)] / w[0];
    let internal: f64 = (a + 1..x)
        .map(|l| cost(l) * (prefix[at(x)] - prefix[at(l)]))
        .sum();
    transported - internal
}

/// Parameter of the geometric law of `xi(x, T_a /\ T_b)` under `P_x`:
/// `p = alpha_x P_{x+1}[T_x < T_b] + beta_x P_{x-1}[T_x < T_a]`.
pub fn geometric_parameter(pot: &Potential, env: &Environment, q: IntervalQuery) -> f64 {
    let right = {
        let w = scaled_weights(pot, q.x, q.b);
        1.0 - hit_b_first(&w, q.x, q.x + 1)
    };
    let left = {
        let w = scaled_weights(pot, q.a, q.x);
        hit_b_first(&w, q.a, q.x - 1)
    };
    env.alpha(q.x) * right + env.beta(q.x) * left
}

/// `E_i[xi(x, T_i)]`: expected local time at `x` during one excursion from
/// `i`, as the ratio of the two exit probabilities on the interval between
/// them.
pub fn expected_local_time(pot: &Potential, env: &Environment, i: i64, x: i64) -> f64 {
    assert_ne!(i, x);
    if x > i {
        let w = scaled_weights(pot, i, x);
        let total: f64 = w.iter().sum();
        let entry = env.alpha(i) * (w[0] / total); // alpha_i P_{i+1}[T_x < T_i]
        let escape = env.beta(x) * (w[w.len() - 1] / total); // beta_x P_{x-1}[T_x > T_i]
        entry / escape
    } else {
        let w = scaled_weights(pot, x, i);
        let total: f64 = w.iter().sum();
        let entry = env.beta(i) * (w[w.len() - 1] / total); // beta_i P_{i-1}[T_x < T_i]
        let escape = env.alpha(x) * (w[0] / total); // alpha_x P_{x+1}[T_x > T_i]
        entry / escape
    }
}

/// `E_m[xi(k, T_m)]` for every `k` in `[lo, hi]`, in one sweep. Pointwise
/// identical (same algebra, reduced) to [`expected_local_time`]:
/// the ratio collapses to `(alpha_m / alpha_k) exp(S_m - S_k)`,
/// the invariant-measure ratio of the chain. The entry for `k = m` is 1.
pub fn occupation_profile(
    pot: &Potential,
    env: &Environment,
    lo: i64,
    hi: i64,
    m: i64,
) -> Vec<f64> {
    assert!(lo <= m && m <= hi);
    let s_m = pot.value(m);
    let a_m = env.alpha(m);
    (lo..=hi)
        .map(|k| {
            if k == m {
                1.0
            } else {
                (a_m / env.alpha(k)) * (s_m - pot.value(k)).exp()
            }
        })
        .collect()
}

/// `E_m[xi(region, T_m)] = 1 + sum over the region's other sites` of the
/// expected per-excursion local time.
pub fn expected_occupation(
    pot: &Potential,
    env: &Environment,
    lo: i64,
    hi: i64,
    m: i64,
) -> f64 {
    occupation_profile(pot, env, lo, hi, m).iter().sum()
}

/// `sum over k in [lo, hi], k != m of exp(-(S_k - S_m))`, the environment
/// functional whose fluctuations control the occupation of the valley.
pub fn potential_sum(pot: &Potential, lo: i64, hi: i64, m: i64) -> f64 {
    assert!(lo <= m && m <= hi);
    let s_m = pot.value(m);
    (lo..=hi)
        .filter(|&k| k != m)
        .map(|k| (s_m - pot.value(k)).exp())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{sample_environment, DistributionSpec, ValidatedDistribution};
    use crate::potential::build_potential;

    const LN3: f64 = 1.0986122886681098;

    fn flat_pair(radius: i64) -> (Environment, Potential) {
        let n = (2 * radius + 1) as usize;
        let env = Environment::from_alphas(-radius, vec![0.5; n], 0.5, 1.0, "flat".into())
            .unwrap();
        let pot = build_potential(&env);
        (env, pot)
    }

    fn two_point_pair(seed: u64, radius: i64) -> (Environment, Potential) {
        let vd =
            ValidatedDistribution::new(DistributionSpec::TwoPointSymmetric { alpha: 0.25 })
                .unwrap();
        let env = sample_environment(&vd, -radius, radius, seed).unwrap();
        let pot = build_potential(&env);
        (env, pot)
    }

    #[test]
    fn flat_ruin_is_classical() {
        let (_, pot) = flat_pair(10);
        let r = ruin_probabilities(&pot, IntervalQuery::new(0, 2, 5).unwrap());
        assert!((r.p_b_before_a - 2.0 / 5.0).abs() < 1e-15);
        assert!((r.p_a_before_b - 3.0 / 5.0).abs() < 1e-15);
    }

    #[test]
    fn constant_drift_ruin() {
        // alpha = 0.75 everywhere: eps = -ln 3, S_i = -i ln 3
        let env =
            Environment::from_alphas(-1, vec![0.75; 10], 0.25, LN3 * LN3, "drift".into())
                .unwrap();
        let pot = build_potential(&env);
        let r = ruin_probabilities(&pot, IntervalQuery::new(0, 1, 3).unwrap());
        assert!((r.p_b_before_a - 9.0 / 13.0).abs() < 1e-14);
    }

    #[test]
    fn ruin_complementarity() {
        let (_, pot) = two_point_pair(3, 40);
        for (a, x, b) in [(-30, -2, 7), (-10, 0, 10), (0, 5, 31), (-31, 14, 33)] {
            let r = ruin_probabilities(&pot, IntervalQuery::new(a, x, b).unwrap());
            assert!((r.p_a_before_b + r.p_b_before_a - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_exit_times() {
        let (env, pot) = flat_pair(10);
        let t = expected_exit_time(&pot, &env, IntervalQuery::new(0, 2, 4).unwrap());
        assert!((t - 4.0).abs() < 1e-12);
        let t = expected_exit_time(&pot, &env, IntervalQuery::new(0, 1, 3).unwrap());
        assert!((t - 2.0).abs() < 1e-12);
    }

    #[test]
    fn geometric_parameter_flat_cases() {
        let (env, pot) = flat_pair(10);
        let p = geometric_parameter(&pot, &env, IntervalQuery::new(-1, 0, 1).unwrap());
        assert_eq!(p, 0.0);
        let p = geometric_parameter(&pot, &env, IntervalQuery::new(-2, 0, 2).unwrap());
        assert!((p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn local_time_flat_is_one() {
        let (env, pot) = flat_pair(20);
        for x in [-7i64, -1, 1, 3, 15] {
            let v = expected_local_time(&pot, &env, 0, x);
            assert!((v - 1.0).abs() < 1e-12, "x={x}: {v}");
        }
    }

    #[test]
    fn local_time_sandwich() {
        let (env, pot) = two_point_pair(11, 60);
        let eta0 = 0.25;
        for x in [-40i64, -13, -1, 1, 9, 44] {
            let v = expected_local_time(&pot, &env, 0, x);
            let shape = (-(pot.value(x) - pot.value(0))).exp();
            assert!(v >= eta0 / (1.0 - eta0) * shape - 1e-12);
            assert!(v <= shape / eta0 + 1e-12);
        }
    }

    #[test]
    fn occupation_profile_matches_factor_route() {
        let (env, pot) = two_point_pair(5, 50);
        let prof = occupation_profile(&pot, &env, -30, 30, 4);
        for k in -30..=30i64 {
            if k == 4 {
                continue;
            }
            let direct = expected_local_time(&pot, &env, 4, k);
            let stream = prof[(k + 30) as usize];
            assert!(
                (direct - stream).abs() <= 1e-12 * direct.max(1.0),
                "k={k}: {direct} vs {stream}"
            );
        }
    }

    #[test]
    fn occupation_flat_symmetric_window() {
        let (env, pot) = flat_pair(10);
        assert!((expected_occupation(&pot, &env, -1, 1, 0) - 3.0).abs() < 1e-12);
        assert_eq!(expected_occupation(&pot, &env, 3, 3, 3), 1.0);
    }

    #[test]
    fn occupation_sandwich_against_potential_sum() {
        let eta0 = 0.25;
        for seed in 0..50 {
            let (env, pot) = two_point_pair(seed, 60);
            let m = pot.argmin_in(-60, 60);
            let occ = expected_occupation(&pot, &env, -60, 60, m) - 1.0;
            let ps = potential_sum(&pot, -60, 60, m);
            assert!(occ >= eta0 / (1.0 - eta0) * ps - 1e-12);
            assert!(occ <= ps / eta0 + 1e-12);
        }
    }

    #[test]
    fn potential_sum_examples() {
        let (_, pot) = flat_pair(5);
        assert!((potential_sum(&pot, -1, 1, 0) - 2.0).abs() < 1e-15);
        assert_eq!(potential_sum(&pot, 2, 2, 2), 0.0);

        // staircase vs naive summation
        let levels: [i64; 19] = [6, 5, 4, 3, 2, 1, 2, 1, 0, -1, -2, -3, -2, -1, 0, 1, 2, 3, 4];
        let stair =
            Potential::from_values(-8, levels.iter().map(|&k| k as f64 * LN3).collect());
        let got = potential_sum(&stair, -6, 10, 3);
        let naive: f64 = (-6..=10)
            .filter(|&k| k != 3)
            .map(|k| (stair.value(3) - stair.value(k)).exp())
            .sum();
        assert!((got - naive).abs() < 1e-12 * naive);
    }

    #[test]
    fn degenerate_query_rejected() {
        assert!(IntervalQuery::new(0, 0, 1).is_err());
        assert!(IntervalQuery::new(0, 1, 1).is_err());
        assert!(IntervalQuery::new(3, 2, 5).is_err());
    }
}
