//! Experiment configuration, parsed from JSON.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::environment::{validate_distribution, DistributionSpec};

#[derive(Debug, Error, PartialEq)]
#[error("invalid experiment config: {}", .0.join("; "))]
pub struct ConfigError(pub Vec<String>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Concentration,
    Radius,
    Lln,
    EnvStats,
    Favorites,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Concentration => "concentration",
            ExperimentKind::Radius => "radius",
            ExperimentKind::Lln => "lln",
            ExperimentKind::EnvStats => "env-stats",
            ExperimentKind::Favorites => "favorites",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "concentration" => Some(Self::Concentration),
            "radius" => Some(Self::Radius),
            "lln" => Some(Self::Lln),
            "env-stats" => Some(Self::EnvStats),
            "favorites" => Some(Self::Favorites),
            _ => None,
        }
    }
}

/// Neighborhood-size sequence `theta(n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaSpec {
    /// `(log_2 n)^2`
    #[default]
    Log2Sq,
    /// `log_2 n`
    Log2,
    Const(f64),
    /// One value per entry of the n-grid.
    Table(Vec<f64>),
}

impl ThetaSpec {
    pub fn value(&self, n: u64, grid_index: usize) -> f64 {
        let log2 = (n as f64).ln().ln();
        match self {
            ThetaSpec::Log2Sq => log2 * log2,
            ThetaSpec::Log2 => log2,
            ThetaSpec::Const(c) => *c,
            ThetaSpec::Table(t) => t[grid_index],
        }
    }
}

/// Which window the concentration driver accumulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ConcentrationWindow {
    /// Half-width `f_p(n)` around the localization point.
    #[default]
    HalfWidthFp,
    /// Half-width `theta(n)`.
    Theta,
}

/// Which sites the local-time LLN driver checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum LlnWindow {
    /// Only the localization point.
    Point,
    /// Radius `ell(n) = log_3 n / Ie` (0 at desk scales).
    #[default]
    Ell,
    Fixed(u64),
}

fn default_p() -> u32 {
    2
}
fn default_gamma() -> f64 {
    11.0
}
fn default_rho() -> f64 {
    1.0
}
fn default_environments() -> u64 {
    50
}
fn default_cap() -> u64 {
    1_000_000_000
}
fn default_distribution() -> DistributionSpec {
    DistributionSpec::TwoPointSymmetric { alpha: 0.25 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n_grid: Vec<u64>,
    #[serde(default = "default_p")]
    pub p: u32,
    /// Free parameter of the valley depth; 11 is the constraint under which
    /// the concentration and LLN statements hold.
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default)]
    pub theta: ThetaSpec,
    /// Walks per grid point.
    pub trials: u64,
    /// Distinct environments per grid point; trial `t` uses environment
    /// `t mod environments`.
    #[serde(default = "default_environments")]
    pub environments: u64,
    pub seed: u64,
    #[serde(default = "default_cap")]
    pub cap: u64,
    /// Ceiling constant for the window-occupation property; `None` uses the
    /// built-in calibrated default.
    #[serde(default)]
    pub c1: Option<f64>,
    #[serde(default = "default_distribution")]
    pub distribution: DistributionSpec,
    #[serde(default)]
    pub lln_window: LlnWindow,
    #[serde(default)]
    pub concentration_window: ConcentrationWindow,
}

impl ExperimentConfig {
    /// A minimal config; fields mirror the JSON schema defaults.
    pub fn new(n_grid: Vec<u64>, trials: u64, seed: u64) -> Self {
        ExperimentConfig {
            n_grid,
            p: default_p(),
            gamma: default_gamma(),
            rho: default_rho(),
            theta: ThetaSpec::default(),
            trials,
            environments: default_environments(),
            seed,
            cap: default_cap(),
            c1: None,
            distribution: default_distribution(),
            lln_window: LlnWindow::default(),
            concentration_window: ConcentrationWindow::default(),
        }
    }

    /// Exhaustive validation; every problem is listed, not just the first.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut errors = Vec::new();
        if self.n_grid.is_empty() {
            errors.push("n_grid must not be empty".to_string());
        }
        if self.trials == 0 {
            errors.push("trials must be at least 1".to_string());
        }
        if self.environments == 0 {
            errors.push("environments must be at least 1".to_string());
        }
        if self.cap == 0 {
            errors.push("cap must be at least 1".to_string());
        }
        if !(self.gamma > 0.0) {
            errors.push(format!("gamma must be positive, got {}", self.gamma));
        }
        if !(self.rho > 0.0) {
            errors.push(format!("rho must be positive, got {}", self.rho));
        }
        if self.p < 2 {
            errors.push(format!("p must be at least 2, got {}", self.p));
        }
        if let ThetaSpec::Table(t) = &self.theta {
            if t.len() != self.n_grid.len() {
                errors.push(format!(
                    "theta table has {} entries for an n-grid of {}",
                    t.len(),
                    self.n_grid.len()
                ));
            }
        }
        match validate_distribution(&self.distribution) {
            Err(e) => errors.push(format!("distribution: {e}")),
            Ok(report) if !report.ok => {
                errors.push(format!(
                    "distribution violates hypotheses (eta0={}, sigma2={}, mean_eps={})",
                    report.eta0, report.sigma2, report.mean_eps
                ));
            }
            Ok(_) => {}
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(ConfigError(errors))
        }
    }
}
