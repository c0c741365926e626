//! Scale functions of the walk length `n`.
//!
//! `log_p` denotes the p-fold iterated natural logarithm. For a free
//! parameter `gamma > 0` the valley-depth threshold is
//! `Gamma_n = ln n + gamma * log_2 n`; the concentration window half-width is
//! `f_p(n) = floor((log_2 n * log_p n)^2)`; `R_p(n) = sqrt(log_{p+1} n / log_p n)`
//! controls the probability of bad environments; `g_1(n)` is the floor for
//! the per-visit escape rates near the valley bottom; `ell(n) = log_3 n / Ie`
//! is the radius on which the local-time law of large numbers extends to
//! neighbors of the bottom.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ScaleError {
    /// `log_p n <= 1`. Positivity would suffice for the definitions, but the
    /// stricter bound keeps `f_p >= 1` and `R_p` away from a zero divisor.
    #[error("n = {n} too small for p = {p}: log_p n = {value} <= 1")]
    NTooSmall { n: u64, p: u32, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scales {
    pub n: u64,
    pub p: u32,
    pub gamma: f64,
    /// Depth threshold `Gamma_n = ln n + gamma * log_2 n`.
    pub gamma_n: f64,
    /// Concentration half-width `f_p(n)`.
    pub f_p: i64,
    /// `R_p(n)`, the environment-probability rate.
    pub r_p: f64,
    /// `ln g_1(n)`; kept in log form since `g_1` overflows f64 for large `n`.
    pub g1_ln: f64,
    /// Neighbor radius `ell(n)` for the local-time LLN.
    pub ell: f64,
    /// Std deviation of the log-odds, carried along for window sizing.
    pub sigma: f64,
}

/// p-fold iterated natural log; NaN once an intermediate goes nonpositive.
pub fn iterated_ln(n: f64, p: u32) -> f64 {
    let mut x = n;
    for _ in 0..p {
        x = x.ln();
    }
    x
}

/// Compute every scale at once. `sigma` and `ie` come from the environment
/// distribution (they enter `g_1` and `ell`).
pub fn compute_scales(n: u64, p: u32, gamma: f64, sigma: f64, ie: f64) -> Result<Scales, ScaleError> {
    assert!(p >= 2, "p must be at least 2");
    assert!(gamma > 0.0, "gamma must be positive");
    let nf = n as f64;
    let log_p = iterated_ln(nf, p);
    if !(log_p > 1.0) {
        return Err(ScaleError::NTooSmall { n, p, value: log_p });
    }
    let ln_n = nf.ln();
    let log_2 = iterated_ln(nf, 2);
    let log_3 = iterated_ln(nf, 3);
    let log_p1 = log_p.ln();
    let f_p = (log_2 * log_p).powi(2).floor() as i64;
    Ok(Scales {
        n,
        p,
        gamma,
        gamma_n: ln_n + gamma * log_2,
        f_p,
        r_p: (log_p1 / log_p).sqrt(),
        g1_ln: 4.0 * 3f64.sqrt() * sigma * f_p as f64 * log_3.max(0.0).sqrt(),
        ell: log_3 / ie,
        sigma,
    })
}

impl Scales {
    /// `g_1(n)` itself; may overflow to infinity for very large `n`.
    pub fn g1(&self) -> f64 {
        self.g1_ln.exp()
    }

    /// `log_{p+1} n`, the rate appearing in the occupation bound.
    pub fn log_p1(&self) -> f64 {
        iterated_ln(self.n as f64, self.p + 1)
    }

    /// `log_2 n`.
    pub fn log_2(&self) -> f64 {
        iterated_ln(self.n as f64, 2)
    }

    /// Default half-width of the sampling window: the basic valley lives at
    /// the `(Gamma_n / sigma)^2` scale, with room to spare.
    pub fn default_window_radius(&self) -> i64 {
        (6.0 * (self.gamma_n / self.sigma).powi(2)).ceil() as i64
    }
}
