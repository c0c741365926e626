//! The quenched Markov chain and its local times.
//!
//! From site `i` the walk steps to `i + 1` with probability `alpha_i` and to
//! `i - 1` otherwise. The local time `xi(k, n)` counts visits over times
//! `1..=n` (the starting point is not counted), which keeps the excursion
//! and geometric-law identities exact. Walks never leave the sampled
//! window: touching either end is a [`WalkError::WindowExit`] and the caller
//! decides whether to widen and retry (re-running the same stream on a wider
//! window reproduces the identical trajectory).

use std::collections::BTreeMap;

use rand_chacha::rand_core::RngCore;
use thiserror::Error;

use crate::environment::Environment;

#[derive(Debug, Error, PartialEq)]
pub enum WalkError {
    #[error("walk touched the window boundary at {position} on step {step}")]
    WindowExit { position: i64, step: u64 },
}

/// Per-site visit counts of one walk, dense over the visited range but with
/// a map-like interface.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTimeProfile {
    start: i64,
    steps: u64,
    final_position: i64,
    lo: i64,
    counts: Vec<u64>,
}

impl LocalTimeProfile {
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn final_position(&self) -> i64 {
        self.final_position
    }

    /// Visited range (min, max) over times `1..=n`.
    pub fn range(&self) -> (i64, i64) {
        (self.lo, self.lo + self.counts.len() as i64 - 1)
    }

    pub fn count(&self, site: i64) -> u64 {
        let (lo, hi) = self.range();
        if site < lo || site > hi {
            0
        } else {
            self.counts[(site - lo) as usize]
        }
    }

    /// `xi([a, b], n)`: total time spent in the window.
    pub fn count_in(&self, a: i64, b: i64) -> u64 {
        let (lo, hi) = self.range();
        let from = a.max(lo);
        let to = b.min(hi);
        if from > to {
            return 0;
        }
        self.counts[(from - lo) as usize..=(to - lo) as usize]
            .iter()
            .sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        let lo = self.lo;
        self.counts
            .iter()
            .enumerate()
            .map(move |(k, &c)| (lo + k as i64, c))
    }

    /// CSV with header `site,count`, one row per site in increasing order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("site,count\n");
        for (site, count) in self.iter() {
            out.push_str(&format!("{site},{count}\n"));
        }
        out
    }

    /// The metadata sidecar for the CSV export.
    pub fn metadata_json(&self, seed: &str) -> String {
        format!(
            "{{\"n\": {}, \"start\": {}, \"final\": {}, \"seed\": \"{}\"}}",
            self.steps, self.start, self.final_position, seed
        )
    }
}

#[inline]
fn step_thresholds(env: &Environment) -> Vec<u64> {
    // alpha as a u64 threshold: r < t  <=>  step right
    env.alphas()
        .iter()
        .map(|&a| (a * 18_446_744_073_709_551_616.0) as u64)
        .collect()
}

/// Run `n` steps from `start`, tallying local times.
pub fn run_walk(
    env: &Environment,
    start: i64,
    n: u64,
    rng: &mut impl RngCore,
) -> Result<LocalTimeProfile, WalkError> {
    assert!(n >= 1);
    let (lo, hi) = env.window();
    assert!(env.contains(start));
    let thresholds = step_thresholds(env);
    let mut counts = vec![0u64; (hi - lo + 1) as usize];
    let mut pos = start;
    let mut min = start;
    let mut max = start;
    for step in 1..=n {
        let idx = (pos - lo) as usize;
        pos += if rng.next_u64() < thresholds[idx] { 1 } else { -1 };
        if pos <= lo || pos >= hi {
            return Err(WalkError::WindowExit {
                position: pos,
                step,
            });
        }
        counts[(pos - lo) as usize] += 1;
        min = min.min(pos);
        max = max.max(pos);
    }
    let trimmed: Vec<u64> =
        counts[(min - lo) as usize..=(max - lo) as usize].to_vec();
    Ok(LocalTimeProfile {
        start,
        steps: n,
        final_position: pos,
        lo: min,
        counts: trimmed,
    })
}

/// First hitting time of `target` (first step count >= 1), or `Capped`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HittingResult {
    Hit(u64),
    Capped { cap: u64 },
}

pub fn hitting_time(
    env: &Environment,
    start: i64,
    target: i64,
    cap: u64,
    rng: &mut impl RngCore,
) -> Result<HittingResult, WalkError> {
    assert!(cap >= 1 && env.contains(start) && env.contains(target));
    let (lo, hi) = env.window();
    let thresholds = step_thresholds(env);
    let mut pos = start;
    for step in 1..=cap {
        let idx = (pos - lo) as usize;
        pos += if rng.next_u64() < thresholds[idx] { 1 } else { -1 };
        if pos == target {
            return Ok(HittingResult::Hit(step));
        }
        if pos <= lo || pos >= hi {
            return Err(WalkError::WindowExit {
                position: pos,
                step,
            });
        }
    }
    Ok(HittingResult::Capped { cap })
}

/// Visit counts over one return excursion to the marked site.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcursionSample {
    pub counts: BTreeMap<i64, u64>,
}

/// A batch of excursions from `m`; capped runs are counted separately and
/// never enter the samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcursionBatch {
    pub samples: Vec<ExcursionSample>,
    pub capped: u64,
}

pub fn sample_excursions(
    env: &Environment,
    m: i64,
    count: usize,
    cap: u64,
    rng: &mut impl RngCore,
) -> Result<ExcursionBatch, WalkError> {
    let (lo, hi) = env.window();
    assert!(env.contains(m));
    let thresholds = step_thresholds(env);
    let mut samples = Vec::with_capacity(count);
    let mut capped = 0u64;
    for _ in 0..count {
        let mut counts: BTreeMap<i64, u64> = BTreeMap::new();
        let mut pos = m;
        let mut done = false;
        for step in 1..=cap {
            let idx = (pos - lo) as usize;
            pos += if rng.next_u64() < thresholds[idx] { 1 } else { -1 };
            if pos <= lo || pos >= hi {
                return Err(WalkError::WindowExit {
                    position: pos,
                    step,
                });
            }
            *counts.entry(pos).or_insert(0) += 1;
            if pos == m {
                done = true;
                break;
            }
        }
        if done {
            samples.push(ExcursionSample { counts });
        } else {
            capped += 1;
        }
    }
    Ok(ExcursionBatch { samples, capped })
}

/// `xi(x, T_a /\ T_b)` for one run started at `x`; `None` when capped.
pub fn exit_local_time(
    env: &Environment,
    a: i64,
    x: i64,
    b: i64,
    cap: u64,
    rng: &mut impl RngCore,
) -> Result<Option<u64>, WalkError> {
    assert!(a < x && x < b && env.contains(a) && env.contains(b));
    let (lo, hi) = env.window();
    let thresholds = step_thresholds(env);
    let mut pos = x;
    let mut visits = 0u64;
    for step in 1..=cap {
        let idx = (pos - lo) as usize;
        pos += if rng.next_u64() < thresholds[idx] { 1 } else { -1 };
        if pos == x {
            visits += 1;
        }
        if pos == a || pos == b {
            return Ok(Some(visits));
        }
        if pos <= lo || pos >= hi {
            return Err(WalkError::WindowExit {
                position: pos,
                step,
            });
        }
    }
    Ok(None)
}

/// Concentration radius `Y_n`: the smallest `k >= 0` such that some window
/// `[x - k, x + k]` holds strictly more than half of the walk's time.
pub fn concentration_radius(profile: &LocalTimeProfile) -> i64 {
    let n = profile.steps();
    let (lo, hi) = profile.range();
    let width = (hi - lo + 1) as usize;
    let counts: Vec<u64> = (lo..=hi).map(|s| profile.count(s)).collect();
    for k in 0..width as i64 {
        // slide a (2k+1)-window; allow centers outside the visited range
        let mut sum: u64 = counts.iter().take((2 * k + 1).min(width as i64) as usize).sum();
        if 2 * sum > n {
            return k;
        }
        let mut left = 0usize;
        let mut right = (2 * k + 1) as usize; // first index beyond the window
        while right < width {
            sum += counts[right];
            sum -= counts[left];
            left += 1;
            right += 1;
            if 2 * sum > n {
                return k;
            }
        }
    }
    (width as i64 - 1).max(0)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FavoriteSites {
    /// Argmax set in increasing order.
    pub sites: Vec<i64>,
    /// The maximum local time.
    pub xi_star: u64,
}

pub fn favorite_sites(profile: &LocalTimeProfile) -> FavoriteSites {
    let xi_star = profile.iter().map(|(_, c)| c).max().unwrap_or(0);
    let sites = profile
        .iter()
        .filter(|&(_, c)| c == xi_star && c > 0)
        .map(|(s, _)| s)
        .collect();
    FavoriteSites { sites, xi_star }
}
