//! Random environments for the recurrent (Sinai) regime.
//!
//! A site `i` carries a right-step probability `alpha_i` drawn i.i.d. from a
//! distribution that must satisfy three hypotheses: the log-odds
//! `eps = ln((1 - alpha)/alpha)` is centered (`E[eps] = 0`, recurrence), has
//! positive variance (the walk is not simple), and the support stays inside
//! `[eta0, 1 - eta0]` for some `eta0 in (0, 1/2)` (uniform ellipticity).
//! `Ie = ln((1 - eta0)/eta0)` then bounds `|eps|`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seeding;

/// Tolerance for the centering hypothesis `E[eps] = 0`. Specs are exact
/// rationals in practice; this only absorbs rounding.
pub const MEAN_EPS_TOL: f64 = 1e-12;

/// Law of the right-step probability `alpha_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DistributionSpec {
    /// `{alpha, 1 - alpha}` with probability 1/2 each.
    TwoPointSymmetric { alpha: f64 },
    /// Uniform on `[lo, 1 - lo]`.
    UniformSymmetric { lo: f64 },
    /// Finite support: pairs `(alpha value, weight)`, weights summing to 1.
    FiniteSupport { atoms: Vec<(f64, f64)> },
}

/// Computed hypothesis quantities for a distribution spec.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    /// Largest `x` with support contained in `[x, 1 - x]`.
    pub eta0: f64,
    /// Variance of the log-odds `eps`.
    pub sigma2: f64,
    /// `ln((1 - eta0)/eta0)`, the a.s. bound on `|eps|`.
    pub ie: f64,
    /// Mean of `eps`; must vanish for recurrence.
    pub mean_eps: f64,
    /// True iff all three hypotheses hold.
    pub ok: bool,
}

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("malformed distribution spec: {0}")]
    MalformedSpec(String),
    #[error(
        "distribution violates hypotheses (eta0={eta0}, sigma2={sigma2}, mean_eps={mean_eps})",
        eta0 = .0.eta0, sigma2 = .0.sigma2, mean_eps = .0.mean_eps
    )]
    HypothesisViolated(HypothesisReport),
    #[error("invalid window [{lo}, {hi}]: must satisfy lo <= 0 <= hi")]
    InvalidWindow { lo: i64, hi: i64 },
    #[error("environment data inconsistent: {0}")]
    Inconsistent(String),
}

fn log_odds_of(alpha: f64) -> f64 {
    ((1.0 - alpha) / alpha).ln()
}

/// Check the hypotheses and report the derived quantities.
///
/// Returns `Err` only for malformed specs (values outside `(0,1)`, weights
/// not summing to 1); a well-formed spec that fails a hypothesis comes back
/// with `ok = false`.
pub fn validate_distribution(spec: &DistributionSpec) -> Result<HypothesisReport, EnvError> {
    let (eta0, mean_eps, sigma2) = match spec {
        DistributionSpec::TwoPointSymmetric { alpha } => {
            if !(0.0 < *alpha && *alpha < 1.0) {
                return Err(EnvError::MalformedSpec(format!(
                    "two-point value {alpha} outside (0,1)"
                )));
            }
            let (e1, e2) = (log_odds_of(*alpha), log_odds_of(1.0 - *alpha));
            let mean = 0.5 * (e1 + e2);
            let var = 0.5 * (e1 - mean).powi(2) + 0.5 * (e2 - mean).powi(2);
            (alpha.min(1.0 - alpha), mean, var)
        }
        DistributionSpec::UniformSymmetric { lo } => {
            if !(0.0 < *lo && *lo <= 0.5) {
                return Err(EnvError::MalformedSpec(format!(
                    "uniform-symmetric lower end {lo} outside (0, 1/2]"
                )));
            }
            if *lo == 0.5 {
                // point mass at 1/2
                (0.5, 0.0, 0.0)
            } else {
                let mean = simpson(*lo, 1.0 - *lo, log_odds_of) / (1.0 - 2.0 * *lo);
                let var =
                    simpson(*lo, 1.0 - *lo, |a| log_odds_of(a).powi(2)) / (1.0 - 2.0 * *lo)
                        - mean * mean;
                (*lo, mean, var)
            }
        }
        DistributionSpec::FiniteSupport { atoms } => {
            if atoms.is_empty() {
                return Err(EnvError::MalformedSpec("empty support".into()));
            }
            let mut total = 0.0;
            for &(a, w) in atoms {
                if !(0.0 < a && a < 1.0) {
                    return Err(EnvError::MalformedSpec(format!("value {a} outside (0,1)")));
                }
                if !(0.0..=1.0).contains(&w) {
                    return Err(EnvError::MalformedSpec(format!("weight {w} outside [0,1]")));
                }
                total += w;
            }
            if (total - 1.0).abs() > MEAN_EPS_TOL {
                return Err(EnvError::MalformedSpec(format!(
                    "weights sum to {total}, expected 1"
                )));
            }
            let mut eta0 = f64::INFINITY;
            let mut mean = 0.0;
            let mut second = 0.0;
            for &(a, w) in atoms.iter().filter(|&&(_, w)| w > 0.0) {
                eta0 = eta0.min(a.min(1.0 - a));
                let e = log_odds_of(a);
                mean += w * e;
                second += w * e * e;
            }
            (eta0, mean, (second - mean * mean).max(0.0))
        }
    };
    let ie = log_odds_of(eta0).abs();
    let ok = eta0 > 0.0 && eta0 < 0.5 && sigma2 > 0.0 && mean_eps.abs() <= MEAN_EPS_TOL;
    Ok(HypothesisReport {
        eta0,
        sigma2,
        ie,
        mean_eps,
        ok,
    })
}

/// Composite Simpson on [a, b]; the integrands here are smooth and bounded,
/// so 2^13 panels put the error well under 1e-13.
fn simpson(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let n = 1 << 13;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

/// A distribution spec that passed [`validate_distribution`] with `ok`.
/// Sampling is only offered through this type.
#[derive(Debug, Clone)]
pub struct ValidatedDistribution {
    spec: DistributionSpec,
    report: HypothesisReport,
}

impl ValidatedDistribution {
    pub fn new(spec: DistributionSpec) -> Result<Self, EnvError> {
        let report = validate_distribution(&spec)?;
        if !report.ok {
            return Err(EnvError::HypothesisViolated(report));
        }
        Ok(Self { spec, report })
    }

    pub fn spec(&self) -> &DistributionSpec {
        &self.spec
    }

    pub fn report(&self) -> &HypothesisReport {
        &self.report
    }

    pub fn eta0(&self) -> f64 {
        self.report.eta0
    }

    pub fn sigma(&self) -> f64 {
        self.report.sigma2.sqrt()
    }

    pub fn ie(&self) -> f64 {
        self.report.ie
    }

    /// Draw one alpha from 64 random bits.
    fn alpha_from_bits(&self, bits: u64) -> f64 {
        match &self.spec {
            DistributionSpec::TwoPointSymmetric { alpha } => {
                if bits >> 63 == 0 {
                    *alpha
                } else {
                    1.0 - *alpha
                }
            }
            DistributionSpec::UniformSymmetric { lo } => {
                lo + seeding::unit_f64(bits) * (1.0 - 2.0 * lo)
            }
            DistributionSpec::FiniteSupport { atoms } => {
                let u = seeding::unit_f64(bits);
                let mut acc = 0.0;
                for &(a, w) in atoms {
                    acc += w;
                    if u < acc {
                        return a;
                    }
                }
                atoms.last().expect("non-empty support").0
            }
        }
    }
}

/// A sampled window of right-step probabilities over `[lo, hi]` with
/// `lo <= 0 <= hi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub lo: i64,
    pub hi: i64,
    alpha: Vec<f64>,
    pub eta0: f64,
    pub sigma2: f64,
    /// Seed provenance; the window is reproducible from this string alone.
    pub seed: String,
}

impl Environment {
    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    pub fn contains(&self, i: i64) -> bool {
        self.lo <= i && i <= self.hi
    }

    #[inline]
    pub fn alpha(&self, i: i64) -> f64 {
        self.alpha[(i - self.lo) as usize]
    }

    #[inline]
    pub fn beta(&self, i: i64) -> f64 {
        1.0 - self.alpha(i)
    }

    /// `eps_i = ln(beta_i / alpha_i)`, the potential increment at `i`.
    #[inline]
    pub fn log_odds(&self, i: i64) -> f64 {
        log_odds_of(self.alpha(i))
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alpha
    }

    /// Build from explicit values, checking the ellipticity band.
    pub fn from_alphas(
        lo: i64,
        alpha: Vec<f64>,
        eta0: f64,
        sigma2: f64,
        seed: String,
    ) -> Result<Self, EnvError> {
        let hi = lo + alpha.len() as i64 - 1;
        if alpha.is_empty() || lo > 0 || hi < 0 {
            return Err(EnvError::InvalidWindow { lo, hi });
        }
        for (k, &a) in alpha.iter().enumerate() {
            if !(a >= eta0 - 1e-12 && a <= 1.0 - eta0 + 1e-12) {
                return Err(EnvError::Inconsistent(format!(
                    "alpha at {} = {} outside [{}, {}]",
                    lo + k as i64,
                    a,
                    eta0,
                    1.0 - eta0
                )));
            }
        }
        Ok(Self {
            lo,
            hi,
            alpha,
            eta0,
            sigma2,
            seed,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("environment serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, EnvError> {
        let env: Environment =
            serde_json::from_str(s).map_err(|e| EnvError::Inconsistent(e.to_string()))?;
        Environment::from_alphas(env.lo, env.alpha, env.eta0, env.sigma2, env.seed)
    }
}

/// Sample a window `[lo, hi]` of i.i.d. sites. The value at index `i` is a
/// pure function of `(seed, i)`, so re-sampling a wider window from the same
/// seed agrees with the old one site by site.
pub fn sample_environment(
    dist: &ValidatedDistribution,
    lo: i64,
    hi: i64,
    seed: u64,
) -> Result<Environment, EnvError> {
    if lo > 0 || hi < 0 || lo > hi {
        return Err(EnvError::InvalidWindow { lo, hi });
    }
    let site_seed = seeding::derive(seed, "env-sites", &[]);
    let alpha: Vec<f64> = (lo..=hi)
        .map(|i| dist.alpha_from_bits(seeding::counter_value(site_seed, i)))
        .collect();
    Ok(Environment {
        lo,
        hi,
        alpha,
        eta0: dist.eta0(),
        sigma2: dist.report.sigma2,
        seed: seed.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point() -> DistributionSpec {
        DistributionSpec::TwoPointSymmetric { alpha: 0.25 }
    }

    #[test]
    fn two_point_quarter_report() {
        let r = validate_distribution(&two_point()).unwrap();
        assert!(r.ok);
        assert_eq!(r.eta0, 0.25);
        assert!((r.ie - 3f64.ln()).abs() < 1e-15);
        assert!((r.sigma2 - 3f64.ln().powi(2)).abs() < 1e-12);
        assert!(r.mean_eps.abs() < 1e-15);
    }

    #[test]
    fn point_mass_fails_variance() {
        let r = validate_distribution(&DistributionSpec::FiniteSupport {
            atoms: vec![(0.5, 1.0)],
        })
        .unwrap();
        assert!(!r.ok);
        assert_eq!(r.sigma2, 0.0);
    }

    #[test]
    fn asymmetric_two_atom_fails_centering() {
        let r = validate_distribution(&DistributionSpec::FiniteSupport {
            atoms: vec![(0.2, 0.7), (0.8, 0.3)],
        })
        .unwrap();
        assert!(!r.ok);
        // 0.7 ln 4 + 0.3 ln(1/4) = 0.4 ln 4
        assert!((r.mean_eps - 0.4 * 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn uniform_symmetric_centered() {
        let r = validate_distribution(&DistributionSpec::UniformSymmetric { lo: 0.2 }).unwrap();
        assert!(r.ok, "{r:?}");
        assert_eq!(r.eta0, 0.2);
        assert!(r.mean_eps.abs() < 1e-13);
        assert!(r.sigma2 > 0.0);
    }

    #[test]
    fn malformed_specs_rejected() {
        assert!(matches!(
            validate_distribution(&DistributionSpec::TwoPointSymmetric { alpha: 1.2 }),
            Err(EnvError::MalformedSpec(_))
        ));
        assert!(matches!(
            validate_distribution(&DistributionSpec::FiniteSupport {
                atoms: vec![(0.3, 0.6), (0.7, 0.6)],
            }),
            Err(EnvError::MalformedSpec(_))
        ));
    }

    #[test]
    fn sampling_is_deterministic_and_in_band() {
        let vd = ValidatedDistribution::new(two_point()).unwrap();
        let a = sample_environment(&vd, -10, 10, 42).unwrap();
        let b = sample_environment(&vd, -10, 10, 42).unwrap();
        assert_eq!(a, b);
        for i in -10..=10 {
            let v = a.alpha(i);
            assert!(v == 0.25 || v == 0.75);
        }
    }

    #[test]
    fn windows_agree_on_overlap() {
        let vd = ValidatedDistribution::new(two_point()).unwrap();
        let small = sample_environment(&vd, -10, 10, 7).unwrap();
        let large = sample_environment(&vd, -20, 20, 7).unwrap();
        for i in -10..=10 {
            assert_eq!(small.alpha(i), large.alpha(i));
        }
    }

    #[test]
    fn invalid_window_rejected() {
        let vd = ValidatedDistribution::new(two_point()).unwrap();
        assert!(matches!(
            sample_environment(&vd, 1, 10, 0),
            Err(EnvError::InvalidWindow { .. })
        ));
        assert!(matches!(
            sample_environment(&vd, -10, -1, 0),
            Err(EnvError::InvalidWindow { .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let vd = ValidatedDistribution::new(two_point()).unwrap();
        let env = sample_environment(&vd, -5, 5, 3).unwrap();
        let back = Environment::from_json(&env.to_json()).unwrap();
        assert_eq!(env, back);
    }

    #[test]
    fn empirical_moments_match_hypotheses() {
        let vd = ValidatedDistribution::new(two_point()).unwrap();
        let n = 1_000_000i64;
        let env = sample_environment(&vd, -n / 2, n / 2, 123).unwrap();
        let eps: Vec<f64> = (-n / 2..=n / 2).map(|i| env.log_odds(i)).collect();
        let m = eps.iter().sum::<f64>() / eps.len() as f64;
        let v = eps.iter().map(|e| (e - m) * (e - m)).sum::<f64>() / eps.len() as f64;
        let sigma = vd.report().sigma2.sqrt();
        assert!(m.abs() < 4.0 * sigma / 1e3, "mean {m}");
        assert!((v - vd.report().sigma2).abs() < 0.05 * vd.report().sigma2, "var {v}");
    }
}
