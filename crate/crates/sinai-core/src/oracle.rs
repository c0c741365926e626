//! First-step-analysis linear systems: the ground truth for the closed forms.
//!
//! Each quantity in [`crate::exact`] satisfies a tridiagonal system over a
//! finite interval; solving those systems by direct elimination gives an
//! independent computation path. These solvers trade speed for certainty and
//! are meant for test-scale intervals.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::environment::Environment;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("interval [{a}, {b}] has no interior")]
    IntervalTooSmall { a: i64, b: i64 },
    /// Cannot occur for alpha in (0, 1); guarded anyway.
    #[error("singular tridiagonal system (pivot ~ 0 at row {row})")]
    SingularSystem { row: usize },
    #[error("expected-visit solve did not converge within the environment window")]
    TruncationNotConverged,
}

/// Error-free transforms for the compensated residual.
#[derive(Clone, Copy)]
struct TwoFloat {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> TwoFloat {
    let s = a + b;
    let bb = s - a;
    TwoFloat {
        hi: s,
        lo: (a - (s - bb)) + (b - bb),
    }
}

fn two_prod(a: f64, b: f64) -> TwoFloat {
    let p = a * b;
    TwoFloat {
        hi: p,
        lo: a.mul_add(b, -p),
    }
}

fn tf_add(x: TwoFloat, y: TwoFloat) -> TwoFloat {
    let s = two_sum(x.hi, y.hi);
    let t = two_sum(s.hi, s.lo + x.lo + y.lo);
    t
}

/// Thomas elimination for `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]`,
/// with iterative refinement against a compensated residual. The valley
/// systems have condition numbers of order `exp(depth)`, so a plain solve
/// loses digits exactly where the ground truth must be tightest; two
/// extended-residual refinement steps bring the forward error back to the
/// rounding level.
fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>, OracleError> {
    let mut x = thomas_sweep(sub, diag, sup, rhs)?;
    let n = diag.len();
    let mut residual = vec![0.0; n];
    for _ in 0..2 {
        for i in 0..n {
            let mut acc = two_sum(rhs[i], 0.0);
            acc = tf_add(acc, two_prod(-diag[i], x[i]));
            if i > 0 {
                acc = tf_add(acc, two_prod(-sub[i], x[i - 1]));
            }
            if i < n - 1 {
                acc = tf_add(acc, two_prod(-sup[i], x[i + 1]));
            }
            residual[i] = acc.hi + acc.lo;
        }
        let correction = thomas_sweep(sub, diag, sup, &residual)?;
        for (xi, ci) in x.iter_mut().zip(correction) {
            *xi += ci;
        }
    }
    Ok(x)
}

fn thomas_sweep(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>, OracleError> {
    let n = diag.len();
    debug_assert!(sub.len() == n && sup.len() == n && rhs.len() == n);
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot.abs() < 1e-300 {
        return Err(OracleError::SingularSystem { row: 0 });
    }
    c[0] = sup[0] / pivot;
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - sub[i] * c[i - 1];
        if pivot.abs() < 1e-300 {
            return Err(OracleError::SingularSystem { row: i });
        }
        c[i] = sup[i] / pivot;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / pivot;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c[i] * next;
    }
    Ok(x)
}

/// `P_x[T_b < T_a]` for every interior `x` in `(a, b)`, from the harmonic
/// system `h(a) = 0`, `h(b) = 1`, `h(x) = alpha_x h(x+1) + beta_x h(x-1)`.
pub fn solve_ruin(env: &Environment, a: i64, b: i64) -> Result<Vec<f64>, OracleError> {
    if b - a < 2 {
        return Err(OracleError::IntervalTooSmall { a, b });
    }
    let n = (b - a - 1) as usize;
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for (row, x) in (a + 1..b).enumerate() {
        diag[row] = 1.0;
        if row > 0 {
            sub[row] = -env.beta(x);
        }
        if row < n - 1 {
            sup[row] = -env.alpha(x);
        } else {
            rhs[row] = env.alpha(x); // h(b) = 1 folded in
        }
    }
    thomas(&sub, &diag, &sup, &rhs)
}

/// `E_x[T_a /\ T_b]` for every interior `x`, from
/// `t(a) = t(b) = 0`, `t(x) = 1 + alpha_x t(x+1) + beta_x t(x-1)`.
pub fn solve_expected_exit(env: &Environment, a: i64, b: i64) -> Result<Vec<f64>, OracleError> {
    if b - a < 2 {
        return Err(OracleError::IntervalTooSmall { a, b });
    }
    let n = (b - a - 1) as usize;
    let mut sub = vec![0.0; n];
    let diag = vec![1.0; n];
    let mut sup = vec![0.0; n];
    let rhs = vec![1.0; n];
    for (row, x) in (a + 1..b).enumerate() {
        if row > 0 {
            sub[row] = -env.beta(x);
        }
        if row < n - 1 {
            sup[row] = -env.alpha(x);
        }
    }
    thomas(&sub, &diag, &sup, &rhs)
}

/// Expected number of visits to each site of `[m - radius, m + radius]`
/// during one excursion from `m` back to `m` (the entry for `m` itself is
/// exactly 1, the return step).
///
/// The walk is watched on a larger interval with reflecting ends and an
/// absorbing site at `m`; reflection preserves the interior
/// detailed-balance ratios, so the per-excursion visit counts are those of
/// the full-lattice chain. The interval is widened until the values move by
/// less than `1e-12` relative, as a guard against that reasoning.
pub fn solve_expected_visits(
    env: &Environment,
    m: i64,
    radius: i64,
) -> Result<BTreeMap<i64, f64>, OracleError> {
    assert!(radius >= 1);
    let (lo, hi) = env.window();
    let mut half = (2 * radius + 16).min((m - lo).max(hi - m));
    let mut prev: Option<BTreeMap<i64, f64>> = None;
    loop {
        let a = (m - half).max(lo);
        let b = (m + half).min(hi);
        let vals = visits_on(env, m, radius, a, b)?;
        if let Some(ref p) = prev {
            let close = vals.iter().all(|(k, v)| {
                let q = p[k];
                (v - q).abs() <= 1e-12 * v.abs().max(1.0)
            });
            if close {
                return Ok(vals);
            }
        }
        if a == lo && b == hi {
            // cannot widen further; accept only if we already compared
            return match prev {
                Some(_) => Err(OracleError::TruncationNotConverged),
                None => Ok(vals),
            };
        }
        prev = Some(vals);
        half *= 2;
    }
}

fn visits_on(
    env: &Environment,
    m: i64,
    radius: i64,
    a: i64,
    b: i64,
) -> Result<BTreeMap<i64, f64>, OracleError> {
    let n = (b - a + 1) as usize;
    let at = |i: i64| (i - a) as usize;
    let mut out = BTreeMap::new();
    for x in m - radius..=m + radius {
        if x == m {
            out.insert(x, 1.0);
            continue;
        }
        if x < a || x > b {
            continue;
        }
        // g_y = expected visits to x before hitting m, starting from y
        let mut sub = vec![0.0; n];
        let diag = vec![1.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for y in a..=b {
            let row = at(y);
            if y == m {
                // absorbed: g_m = 0
                sub[row] = 0.0;
                sup[row] = 0.0;
                continue;
            }
            rhs[row] = if y == x { 1.0 } else { 0.0 };
            if y == a {
                sup[row] = -1.0; // reflect: step right with probability 1
            } else if y == b {
                sub[row] = -1.0;
            } else {
                sub[row] = -env.beta(y);
                sup[row] = -env.alpha(y);
            }
        }
        let g = thomas(&sub, &diag, &sup, &rhs)?;
        out.insert(x, env.alpha(m) * g[at(m + 1)] + env.beta(m) * g[at(m - 1)]);
    }
    Ok(out)
}
