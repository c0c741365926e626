//! The random potential associated to an environment.
//!
//! With `eps_k = ln(beta_k / alpha_k)`, the potential is the unique sequence
//! with `S_0 = 0` and `S_k - S_{k-1} = eps_k` for every `k` in the window —
//! one increment rule on both sides of the origin, which is the convention
//! under which the closed-form hitting probabilities are exact on intervals
//! that straddle 0. The walk behaves like a diffusion in the landscape `S`:
//! it falls into valleys of `S` and needs time `exp(depth)` to climb out.

use crate::environment::Environment;

#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    lo: i64,
    values: Vec<f64>,
    /// The increments the values were accumulated from; `increments[j]` is
    /// `eps` at index `lo + 1 + j`. Kept so differencing the potential hands
    /// back each increment bit for bit (re-subtracting the accumulated
    /// values would re-round).
    increments: Vec<f64>,
}

/// Build the potential over the environment's window.
pub fn build_potential(env: &Environment) -> Potential {
    let (lo, hi) = env.window();
    let mut values = vec![0.0; (hi - lo + 1) as usize];
    let at = |i: i64| (i - lo) as usize;
    for k in 1..=hi {
        values[at(k)] = values[at(k - 1)] + env.log_odds(k);
    }
    for k in (lo..0).rev() {
        values[at(k)] = values[at(k + 1)] - env.log_odds(k + 1);
    }
    let increments = (lo + 1..=hi).map(|k| env.log_odds(k)).collect();
    Potential {
        lo,
        values,
        increments,
    }
}

impl Potential {
    /// Directly from values; `S_0` must be present and equal to 0.
    pub fn from_values(lo: i64, values: Vec<f64>) -> Self {
        let hi = lo + values.len() as i64 - 1;
        assert!(lo <= 0 && 0 <= hi, "window [{lo}, {hi}] must contain 0");
        assert_eq!(values[(-lo) as usize], 0.0, "S_0 must be 0");
        let increments = values.windows(2).map(|w| w[1] - w[0]).collect();
        Potential {
            lo,
            values,
            increments,
        }
    }

    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.lo + self.values.len() as i64 - 1)
    }

    pub fn contains(&self, i: i64) -> bool {
        let (lo, hi) = self.window();
        lo <= i && i <= hi
    }

    #[inline]
    pub fn value(&self, i: i64) -> f64 {
        self.values[(i - self.lo) as usize]
    }

    /// `S_k - S_{k-1}`, exactly as accumulated.
    pub fn increment(&self, k: i64) -> f64 {
        self.increments[(k - 1 - self.lo) as usize]
    }

    pub fn max_in(&self, a: i64, b: i64) -> f64 {
        (a..=b).map(|i| self.value(i)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_in(&self, a: i64, b: i64) -> f64 {
        (a..=b).map(|i| self.value(i)).fold(f64::INFINITY, f64::min)
    }

    /// Argmin over `[a, b]`; ties broken by smallest `|index|`, then by the
    /// positive index.
    pub fn argmin_in(&self, a: i64, b: i64) -> i64 {
        let mut best = a;
        let mut best_v = self.value(a);
        for i in a + 1..=b {
            let v = self.value(i);
            if v < best_v || (v == best_v && tie_key(i) < tie_key(best)) {
                best = i;
                best_v = v;
            }
        }
        best
    }

    /// First index `m >= 1` with `S_m >= a` (stopping time `V_a^+` of the
    /// positive side), if it exists in the window.
    pub fn first_rise_to(&self, a: f64) -> Option<i64> {
        let (_, hi) = self.window();
        (1..=hi).find(|&m| self.value(m) >= a)
    }

    /// First index `m >= 1` with `S_m <= -a` (stopping time `V_a^-`).
    pub fn first_drop_to(&self, a: f64) -> Option<i64> {
        let (_, hi) = self.window();
        (1..=hi).find(|&m| self.value(m) <= -a)
    }
}

/// Tie-break key: smaller `|i|` wins, positive preferred on equal `|i|`.
#[inline]
pub(crate) fn tie_key(i: i64) -> (i64, bool) {
    (i.abs(), i < 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{sample_environment, DistributionSpec, ValidatedDistribution};

    fn env() -> Environment {
        let vd =
            ValidatedDistribution::new(DistributionSpec::TwoPointSymmetric { alpha: 0.25 })
                .unwrap();
        sample_environment(&vd, -200, 200, 5).unwrap()
    }

    #[test]
    fn origin_is_zero_and_increments_recover_log_odds() {
        let e = env();
        let pot = build_potential(&e);
        assert_eq!(pot.value(0), 0.0);
        let (lo, hi) = e.window();
        for k in lo + 1..=hi {
            // bit-level round trip of each increment
            assert_eq!(pot.increment(k), e.log_odds(k));
            // ... and the accumulated values agree to rounding
            assert!((pot.value(k) - pot.value(k - 1) - e.log_odds(k)).abs() < 1e-12);
        }
    }

    #[test]
    fn unified_convention_across_zero() {
        // alpha_1 = 0.25, alpha_2 = 0.75  =>  S_1 = ln 3, S_2 = 0
        let e = Environment::from_alphas(
            0,
            vec![0.25, 0.25, 0.75],
            0.25,
            3f64.ln().powi(2),
            "fixture".into(),
        )
        .unwrap();
        let pot = build_potential(&e);
        assert!((pot.value(1) - 3f64.ln()).abs() < 1e-15);
        assert!(pot.value(2).abs() < 1e-15);

        // alpha_0 = 0.25  =>  S_{-1} = -ln 3 under S_0 - S_{-1} = eps_0
        let e = Environment::from_alphas(
            -1,
            vec![0.5, 0.25, 0.5],
            0.25,
            1.0,
            "fixture".into(),
        )
        .unwrap();
        let pot = build_potential(&e);
        assert!((pot.value(-1) + 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn increments_bounded_by_ie() {
        let e = env();
        let pot = build_potential(&e);
        let ie = 3f64.ln();
        let (lo, hi) = e.window();
        for k in lo + 1..=hi {
            assert!(pot.increment(k).abs() <= ie + 1e-12);
        }
    }

    #[test]
    fn argmin_tie_breaks_toward_zero_then_positive() {
        // V-shaped with exactly equal minima at -2 and +2
        let pot = Potential::from_values(-3, vec![3.0, -1.0, 0.5, 0.0, 0.5, -1.0, 3.0]);
        assert_eq!(pot.argmin_in(-3, 3), 2);
        assert_eq!(pot.argmin_in(-3, 1), -2);
    }

    #[test]
    fn stopping_times() {
        let pot = Potential::from_values(0, vec![0.0, 1.0, 2.0, -1.0, 3.0]);
        assert_eq!(pot.first_rise_to(2.0), Some(2));
        assert_eq!(pot.first_drop_to(0.5), Some(3));
        assert_eq!(pot.first_rise_to(10.0), None);
    }
}
