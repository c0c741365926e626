//! Experiment results: per-trial records, aggregates, failure accounting.
//!
//! Records are first-class: failed trials (no valley in budget, window
//! exits, capped runs) stay in the record list with their failure label
//! instead of being resampled away, and aggregates are recomputable from
//! the records alone.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub n: u64,
    pub trial: u64,
    pub env_seed: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mn: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wn_left: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wn_right: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub stats: BTreeMap<String, f64>,
}

impl TrialRecord {
    pub fn failed(n: u64, trial: u64, env_seed: String, label: &str) -> Self {
        TrialRecord {
            n,
            trial,
            env_seed,
            mn: None,
            wn_left: None,
            wn_right: None,
            failure: Some(label.to_string()),
            stats: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureCounts {
    pub no_valley: u64,
    pub window_exit: u64,
    pub capped: u64,
}

pub fn count_failures(records: &[TrialRecord]) -> FailureCounts {
    let mut counts = FailureCounts::default();
    for r in records {
        match r.failure.as_deref() {
            Some("no_valley") => counts.no_valley += 1,
            Some("window_exit") => counts.window_exit += 1,
            Some("capped") => counts.capped += 1,
            _ => {}
        }
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub version: String,
    pub kind: String,
    pub config: ExperimentConfig,
    pub records: Vec<TrialRecord>,
    pub aggregates: BTreeMap<String, f64>,
    pub failures: FailureCounts,
}

impl ExperimentResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    /// Per-trial CSV with a stable column order: fixed identity columns,
    /// then the union of statistic keys in sorted order.
    pub fn to_csv(&self) -> String {
        let mut stat_keys: Vec<String> = Vec::new();
        for r in &self.records {
            for k in r.stats.keys() {
                if !stat_keys.iter().any(|s| s == k) {
                    stat_keys.push(k.clone());
                }
            }
        }
        stat_keys.sort();
        let mut out = String::from("n,trial,env_seed,mn,wn_left,wn_right,failure");
        for k in &stat_keys {
            out.push(',');
            out.push_str(k);
        }
        out.push('\n');
        for r in &self.records {
            let opt_i = |v: Option<i64>| v.map(|x| x.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}",
                r.n,
                r.trial,
                r.env_seed,
                opt_i(r.mn),
                opt_i(r.wn_left),
                opt_i(r.wn_right),
                r.failure.clone().unwrap_or_default()
            ));
            for k in &stat_keys {
                out.push(',');
                if let Some(v) = r.stats.get(k) {
                    out.push_str(&v.to_string());
                }
            }
            out.push('\n');
        }
        out
    }
}
