//! Valleys of the random potential and the basic valley around the origin.
//!
//! A triple `{M', m, M''}` is a valley when `S` attains its maximum over the
//! left half at `M'`, over the right half at `M''`, and its minimum over the
//! whole interval at `m`; its depth is the smaller boundary rise above
//! `S_m`. Refinement extracts the deepest internal drop (right side) or rise
//! (left side), splitting a valley into two sub-valleys. The basic valley is
//! the smallest valley that contains 0 with depth at least `Gamma_n`; its
//! bottom `m_n` is the localization point of the walk at time `n`, and its
//! boundary peaks satisfy an extra `gamma * log_2 n` clearance over the
//! ridge between 0 and `m_n` on the side the walk has to come from.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::environment::{sample_environment, Environment, ValidatedDistribution};
use crate::potential::{build_potential, tie_key, Potential};
use crate::scales::Scales;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Error, PartialEq)]
pub enum ValleyError {
    /// `S` never reaches the requested level on this side of 0; the caller
    /// may widen the window and retry.
    #[error("window too narrow: potential never reaches the threshold on the {0:?} side")]
    WindowTooNarrow(Side),
    /// Window expansion budget exhausted without a complete basic valley.
    #[error("no basic valley found within the window expansion budget")]
    NoValley,
    /// No ladder interval inside the window achieves the required rise.
    #[error("no qualifying ladder epoch within the window")]
    LadderNotFound,
}

/// A valley `{left, bottom, right}` with its depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Valley {
    pub left: i64,
    pub bottom: i64,
    pub right: i64,
    pub depth: f64,
}

impl Valley {
    fn new(pot: &Potential, left: i64, bottom: i64, right: i64) -> Self {
        let s_m = pot.value(bottom);
        let depth = (pot.value(left) - s_m).min(pot.value(right) - s_m);
        Valley {
            left,
            bottom,
            right,
            depth,
        }
    }

    /// Re-check the three defining extremum conditions from `S`.
    pub fn is_valley(&self, pot: &Potential) -> bool {
        self.left <= self.bottom
            && self.bottom <= self.right
            && pot.value(self.left) == pot.max_in(self.left, self.bottom)
            && pot.value(self.right) == pot.max_in(self.bottom, self.right)
            && pot.value(self.bottom) == pot.min_in(self.left, self.right)
    }

    fn contains_zero(&self) -> bool {
        self.left <= 0 && 0 <= self.right
    }
}

/// Outcome of one refinement: the extracted peak/trough pair and its drop
/// `S[peak] - S[trough]`. For right refinements `peak < trough`, for left
/// refinements `trough < peak`. A monotone side yields a zero-drop pair
/// adjacent to the bottom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refinement {
    pub peak: i64,
    pub trough: i64,
    pub drop: f64,
}

/// Maximum drawdown over `bottom <= peak < trough <= right`, ties broken by
/// smallest `|index|` (peak first, then trough), positive index preferred on
/// exact `|index|` ties.
pub fn refine_right(pot: &Potential, v: &Valley) -> Refinement {
    let mut run_peak = v.bottom;
    let mut run_max = pot.value(v.bottom);
    let mut best: Option<Refinement> = None;
    for t in v.bottom + 1..=v.right {
        let s_t = pot.value(t);
        let drop = run_max - s_t;
        if drop > 0.0 {
            let cand = Refinement {
                peak: run_peak,
                trough: t,
                drop,
            };
            if best.map_or(true, |b| better_pair(&cand, &b)) {
                best = Some(cand);
            }
        }
        if s_t > run_max || (s_t == run_max && tie_key(t) < tie_key(run_peak)) {
            run_max = s_t;
            run_peak = t;
        }
    }
    best.unwrap_or(Refinement {
        peak: v.bottom,
        trough: v.bottom + 1,
        drop: 0.0,
    })
}

/// Mirror of [`refine_right`]: maximum rise over
/// `left <= trough < peak <= bottom`.
pub fn refine_left(pot: &Potential, v: &Valley) -> Refinement {
    let mut run_trough = v.left;
    let mut run_min = pot.value(v.left);
    let mut best: Option<Refinement> = None;
    for t in v.left + 1..=v.bottom {
        let s_t = pot.value(t);
        let drop = s_t - run_min;
        if drop > 0.0 {
            let cand = Refinement {
                peak: t,
                trough: run_trough,
                drop,
            };
            if best.map_or(true, |b| better_pair(&cand, &b)) {
                best = Some(cand);
            }
        }
        if s_t < run_min || (s_t == run_min && tie_key(t) < tie_key(run_trough)) {
            run_min = s_t;
            run_trough = t;
        }
    }
    best.unwrap_or(Refinement {
        peak: v.bottom,
        trough: v.bottom - 1,
        drop: 0.0,
    })
}

fn better_pair(cand: &Refinement, best: &Refinement) -> bool {
    if cand.drop != best.drop {
        return cand.drop > best.drop;
    }
    (tie_key(cand.peak), tie_key(cand.trough)) < (tie_key(best.peak), tie_key(best.trough))
}

/// The widest natural valley around 0 at depth `gamma_n`: boundary points
/// are the closest indices on each side of 0 where `S` reaches `gamma_n`,
/// the bottom is the argmin between them (ties toward 0, then positive).
pub fn find_candidate_valley(pot: &Potential, gamma_n: f64) -> Result<Valley, ValleyError> {
    let (lo, hi) = pot.window();
    let left = (lo..=-1)
        .rev()
        .find(|&k| pot.value(k) >= gamma_n)
        .ok_or(ValleyError::WindowTooNarrow(Side::Left))?;
    let right = (1..=hi)
        .find(|&k| pot.value(k) >= gamma_n)
        .ok_or(ValleyError::WindowTooNarrow(Side::Right))?;
    let bottom = pot.argmin_in(left, right);
    Ok(Valley::new(pot, left, bottom, right))
}

/// Refinement descent: shrink the valley while some refinement product still
/// contains 0 with depth at least `gamma_n`. The refinement on the side not
/// containing 0 is attempted first; a refinement of the side containing 0 is
/// accepted too when its 0-containing product qualifies (this is what lets
/// the bottom jump to an earlier qualifying dip). Returns the terminal
/// valley and the descent trace.
pub(crate) fn descend(pot: &Potential, start: Valley, gamma_n: f64) -> (Valley, Vec<Valley>) {
    let mut v = start;
    let mut trace = Vec::new();
    loop {
        let mut next = None;
        for cand in refinement_products(pot, &v) {
            let strictly_inside =
                cand.left >= v.left && cand.right <= v.right && (cand.left, cand.right) != (v.left, v.right);
            if strictly_inside
                && cand.contains_zero()
                && cand.depth >= gamma_n
                && cand.is_valley(pot)
            {
                next = Some(cand);
                break;
            }
        }
        match next {
            Some(sv) => {
                trace.push(sv);
                v = sv;
            }
            None => return (v, trace),
        }
    }
}

/// Sub-valleys produced by one refinement of each side, ordered with the
/// side not containing 0 first.
fn refinement_products(pot: &Potential, v: &Valley) -> Vec<Valley> {
    let mut right_products = Vec::new();
    {
        let r = refine_right(pot, v);
        if r.drop > 0.0 {
            right_products.push(Valley::new(pot, v.left, v.bottom, r.peak));
            right_products.push(Valley::new(pot, r.peak, r.trough, v.right));
        }
    }
    let mut left_products = Vec::new();
    {
        let r = refine_left(pot, v);
        if r.drop > 0.0 {
            left_products.push(Valley::new(pot, r.peak, v.bottom, v.right));
            left_products.push(Valley::new(pot, v.left, r.trough, r.peak));
        }
    }
    if v.bottom >= 0 {
        // 0 sits in the left half; refine the right half first
        right_products.extend(left_products);
        right_products
    } else {
        left_products.extend(right_products);
        left_products
    }
}

/// The basic valley `{M_n', m_n, M_n}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasicValley {
    pub left_peak: i64,
    pub bottom: i64,
    pub right_peak: i64,
    pub gamma_n: f64,
    pub gamma: f64,
    pub refinement_count: u32,
}

impl BasicValley {
    pub fn window(&self) -> (i64, i64) {
        (self.left_peak, self.right_peak)
    }

    pub fn depth_left(&self, pot: &Potential) -> f64 {
        pot.value(self.left_peak) - pot.value(self.bottom)
    }

    pub fn depth_right(&self, pot: &Potential) -> f64 {
        pot.value(self.right_peak) - pot.value(self.bottom)
    }

    pub fn report(&self, pot: &Potential) -> ValleyReport {
        ValleyReport {
            left_peak: self.left_peak,
            bottom: self.bottom,
            right_peak: self.right_peak,
            gamma_n: self.gamma_n,
            depth_left: self.depth_left(pot),
            depth_right: self.depth_right(pot),
            refinements: self.refinement_count,
        }
    }
}

/// JSON report for a basic valley.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValleyReport {
    #[serde(rename = "Mn_prime")]
    pub left_peak: i64,
    #[serde(rename = "mn")]
    pub bottom: i64,
    #[serde(rename = "Mn")]
    pub right_peak: i64,
    #[serde(rename = "Gamma_n")]
    pub gamma_n: f64,
    pub depth_left: f64,
    pub depth_right: f64,
    pub refinements: u32,
}

/// Locate the basic valley: candidate around 0, refinement descent to the
/// terminal bottom, then the boundary peaks from the bottom by the
/// sign-split equations:
///
/// * `m_n > 0`: `M_n'` is the largest negative index with
///   `S - S_{m_n} >= Gamma_n` and `S - max(S over [0, m_n]) >= gamma log_2 n`;
///   `M_n` is the smallest index right of `m_n` with `S - S_{m_n} >= Gamma_n`.
/// * `m_n < 0`: mirror.
/// * `m_n = 0`: plain `Gamma_n` crossings on each side, no ridge clearance.
///
/// The peak searches stay inside the terminal valley, so `S_{m_n}` is the
/// minimum over `[M_n', M_n]` and the valley's occupation measure is sane.
/// When the ridge clearance cannot be met there — the terminal valley's own
/// peak sits too close to the ridge — the construction fails rather than
/// reaching across potential minima further out.
pub fn find_basic_valley(pot: &Potential, scales: &Scales) -> Result<BasicValley, ValleyError> {
    let candidate = find_candidate_valley(pot, scales.gamma_n)?;
    let (terminal, trace) = descend(pot, candidate, scales.gamma_n);
    let (left_peak, right_peak) = basic_peaks(pot, &terminal, scales)?;
    Ok(BasicValley {
        left_peak,
        bottom: terminal.bottom,
        right_peak,
        gamma_n: scales.gamma_n,
        gamma: scales.gamma,
        refinement_count: trace.len() as u32,
    })
}

fn basic_peaks(
    pot: &Potential,
    terminal: &Valley,
    scales: &Scales,
) -> Result<(i64, i64), ValleyError> {
    let bottom = terminal.bottom;
    let s_m = pot.value(bottom);
    let gamma_n = scales.gamma_n;
    let clearance = scales.gamma * scales.log_2();
    let deep = |l: i64| pot.value(l) - s_m >= gamma_n;
    let (left, right) = if bottom > 0 {
        let ridge = pot.max_in(0, bottom);
        let left = (terminal.left..=-1)
            .rev()
            .find(|&l| deep(l) && pot.value(l) - ridge >= clearance)
            .ok_or(ValleyError::NoValley)?;
        let right = (bottom + 1..=terminal.right)
            .find(|&l| deep(l))
            .expect("the terminal right peak reaches the threshold");
        (left, right)
    } else if bottom < 0 {
        let ridge = pot.max_in(bottom, 0);
        let left = (terminal.left..bottom)
            .rev()
            .find(|&l| deep(l))
            .expect("the terminal left peak reaches the threshold");
        let right = (1..=terminal.right)
            .find(|&l| deep(l) && pot.value(l) - ridge >= clearance)
            .ok_or(ValleyError::NoValley)?;
        (left, right)
    } else {
        let left = (terminal.left..=-1)
            .rev()
            .find(|&l| deep(l))
            .expect("the terminal left peak reaches the threshold");
        let right = (1..=terminal.right)
            .find(|&l| deep(l))
            .expect("the terminal right peak reaches the threshold");
        (left, right)
    };
    Ok((left, right))
}

/// Sample an environment around 0 and locate its basic valley, doubling the
/// window (same seed, so the overlap is unchanged) up to three times when
/// the potential has not yet reached the threshold.
pub fn find_basic_valley_sampled(
    dist: &ValidatedDistribution,
    seed: u64,
    scales: &Scales,
) -> Result<(Environment, Potential, BasicValley), ValleyError> {
    let mut radius = scales.default_window_radius();
    for attempt in 0..=3 {
        let env = sample_environment(dist, -radius, radius, seed)
            .expect("policy window always contains 0");
        let pot = build_potential(&env);
        match find_basic_valley(&pot, scales) {
            Ok(bv) => return Ok((env, pot, bv)),
            Err(ValleyError::WindowTooNarrow(_)) if attempt < 3 => radius *= 2,
            Err(_) => break,
        }
    }
    Err(ValleyError::NoValley)
}

/// Ladder epochs of the positive side: `u_0 = 0` and `u_{i+1}` is the first
/// index after `u_i` where `S` drops strictly below `S_{u_i}`.
pub fn ladder_epochs(pot: &Potential, limit: i64) -> Vec<i64> {
    assert!(pot.contains(limit) && limit >= 0);
    let mut epochs = vec![0i64];
    let mut level = pot.value(0);
    for m in 1..=limit {
        if pot.value(m) < level {
            epochs.push(m);
            level = pot.value(m);
        }
    }
    epochs
}

/// Characterize `m_n` through ladder epochs (positive-bottom regime): the
/// first `u_l` whose ladder interval contains a rise of at least `gamma_n`
/// above `S_{u_l}`. Must agree with [`find_basic_valley`] whenever the
/// latter succeeds with a positive bottom.
pub fn locate_mn_via_ladder(pot: &Potential, gamma_n: f64) -> Result<i64, ValleyError> {
    let (_, hi) = pot.window();
    let epochs = ladder_epochs(pot, hi);
    for (i, &u) in epochs.iter().enumerate() {
        let end = epochs.get(i + 1).copied().unwrap_or(hi);
        if pot.max_in(u, end) - pot.value(u) >= gamma_n {
            return Ok(u);
        }
    }
    Err(ValleyError::LadderNotFound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::DistributionSpec;
    use crate::scales::compute_scales;

    const LN3: f64 = 1.0986122886681098;

    /// 19-site staircase: S / ln 3 = 6,5,4,3,2,1,2,1,0,-1,-2,-3,-2,-1,0,1,2,3,4
    /// on [-8, 10].
    fn staircase() -> Potential {
        let levels: [i64; 19] = [6, 5, 4, 3, 2, 1, 2, 1, 0, -1, -2, -3, -2, -1, 0, 1, 2, 3, 4];
        Potential::from_values(-8, levels.iter().map(|&k| k as f64 * LN3).collect())
    }

    fn flat(radius: i64) -> Potential {
        Potential::from_values(-radius, vec![0.0; (2 * radius + 1) as usize])
    }

    fn sampled_potential(seed: u64, radius: i64) -> Potential {
        let vd =
            ValidatedDistribution::new(DistributionSpec::TwoPointSymmetric { alpha: 0.25 })
                .unwrap();
        build_potential(&sample_environment(&vd, -radius, radius, seed).unwrap())
    }

    #[test]
    fn candidate_on_staircase() {
        let pot = staircase();
        let v = find_candidate_valley(&pot, 4.0).unwrap();
        assert_eq!((v.left, v.bottom, v.right), (-6, 3, 10));
        // exhaustive re-check of the three defining conditions
        assert!(v.is_valley(&pot));
        assert_eq!(
            (-8..0).rev().find(|&k| pot.value(k) >= 4.0),
            Some(v.left)
        );
        assert_eq!((1..=10).find(|&k| pot.value(k) >= 4.0), Some(v.right));
        for k in v.left..=v.right {
            assert!(pot.value(k) >= pot.value(v.bottom));
        }
    }

    #[test]
    fn candidate_flat_window_too_narrow() {
        assert_eq!(
            find_candidate_valley(&flat(50), 0.5),
            Err(ValleyError::WindowTooNarrow(Side::Left))
        );
    }

    #[test]
    fn candidate_tie_breaks_to_positive_minimum() {
        // symmetric W shape with equal minima at -2 and 2
        let vals = vec![5.0, -1.0, 0.5, 0.0, 0.5, -1.0, 5.0];
        let pot = Potential::from_values(-3, vals);
        let v = find_candidate_valley(&pot, 4.0).unwrap();
        assert_eq!(v.bottom, 2);
    }

    #[test]
    fn refine_right_matches_brute_force() {
        // S = 0, 2, -1, 3 on 0..=3; valley (0, 0, 3)
        let mut vals = vec![0.0, 2.0, -1.0, 3.0];
        let pot = Potential::from_values(0, vals.clone());
        let v = Valley::new(&pot, 0, 0, 3);
        let r = refine_right(&pot, &v);
        assert_eq!((r.peak, r.trough, r.drop), (1, 2, 3.0));

        // brute force over all ordered pairs
        let mut best = (f64::NEG_INFINITY, 0i64, 0i64);
        for p in 0..=3i64 {
            for t in p + 1..=3 {
                let d = vals[p as usize] - vals[t as usize];
                if d > best.0 {
                    best = (d, p, t);
                }
            }
        }
        assert_eq!((best.1, best.2, best.0), (r.peak, r.trough, r.drop));

        // strictly increasing side: zero-drop degenerate pair
        vals = vec![0.0, 1.0, 2.0, 3.0];
        let pot = Potential::from_values(0, vals);
        let v = Valley::new(&pot, 0, 0, 3);
        let r = refine_right(&pot, &v);
        assert_eq!((r.peak, r.trough, r.drop), (0, 1, 0.0));
    }

    #[test]
    fn refine_left_mirrors_refine_right() {
        let vals = vec![0.0, 2.0, -1.0, 3.0];
        let mirrored: Vec<f64> = vals.iter().rev().cloned().collect();
        let pot = Potential::from_values(0, vals);
        let pot_m = Potential::from_values(-3, mirrored);
        let v = Valley::new(&pot, 0, 0, 3);
        let v_m = Valley::new(&pot_m, -3, 0, 0);
        let r = refine_right(&pot, &v);
        let l = refine_left(&pot_m, &v_m);
        assert_eq!((l.peak, l.trough, l.drop), (-r.peak, -r.trough, r.drop));
    }

    #[test]
    fn basic_valley_on_staircase() {
        // n = 48, gamma = 0.1: Gamma_n = ln 48 + 0.1 ln ln 48 ~ 4.007
        let pot = staircase();
        let scales = compute_scales(48, 2, 0.1, LN3, LN3).unwrap();
        assert!((scales.gamma_n - 4.0066).abs() < 1e-3);
        let bv = find_basic_valley(&pot, &scales).unwrap();
        assert_eq!(bv.bottom, 3);
        // suprema/infima of the sign-split equations, checked by hand:
        // S_{-1} = ln 3 >= Gamma_n + S_3 - ... : S_{-1} - S_3 = 4 ln 3 = 4.39
        assert_eq!(bv.left_peak, -1);
        assert_eq!(bv.right_peak, 7);
        // one admissible refinement: the rise at -3 -> -2 splits off
        // {-2, 3, 10}, still containing 0 at depth 5 ln 3
        assert_eq!(bv.refinement_count, 1);
        assert!(bv.depth_left(&pot) >= scales.gamma_n);
        assert!(bv.depth_right(&pot) >= scales.gamma_n);
    }

    #[test]
    fn single_deep_valley_needs_no_refinement() {
        // V shape, no internal structure
        let radius = 40i64;
        let vals: Vec<f64> = (-radius..=radius).map(|k| k.abs() as f64 * 0.5).collect();
        let pot = Potential::from_values(-radius, vals);
        let scales = compute_scales(1000, 2, 0.5, 1.0, 1.0).unwrap();
        let bv = find_basic_valley(&pot, &scales).unwrap();
        assert_eq!(bv.bottom, 0);
        assert_eq!(bv.refinement_count, 0);
        // bottom at the origin: both peaks are the plain crossings
        let want = (scales.gamma_n / 0.5).ceil() as i64;
        assert_eq!(bv.right_peak, want);
        assert_eq!(bv.left_peak, -want);
    }

    #[test]
    fn ladder_epoch_sequences() {
        let inc = Potential::from_values(0, (0..20).map(|k| k as f64).collect());
        assert_eq!(ladder_epochs(&inc, 19), vec![0]);
        let dec = Potential::from_values(0, (0..20).map(|k| -k as f64).collect());
        assert_eq!(ladder_epochs(&dec, 19), (0..20).collect::<Vec<_>>());
        assert_eq!(ladder_epochs(&staircase(), 10), vec![0, 1, 2, 3]);
    }

    #[test]
    fn ladder_locate_matches_examples() {
        let pot = staircase();
        assert_eq!(locate_mn_via_ladder(&pot, 4.0), Ok(3));
        let inc = Potential::from_values(0, (0..20).map(|k| k as f64).collect());
        assert_eq!(locate_mn_via_ladder(&inc, 5.0), Ok(0));
        assert_eq!(
            locate_mn_via_ladder(&flat(30), 1.0),
            Err(ValleyError::LadderNotFound)
        );
    }

    #[test]
    fn ladder_agrees_with_basic_valley_bottom() {
        let vd =
            ValidatedDistribution::new(DistributionSpec::TwoPointSymmetric { alpha: 0.25 })
                .unwrap();
        let scales = compute_scales(1_000_000, 2, 1.0, vd.sigma(), vd.ie()).unwrap();
        let mut positives = 0;
        let mut seed = 0u64;
        while positives < 100 {
            seed += 1;
            if let Ok((_, pot, bv)) = find_basic_valley_sampled(&vd, seed, &scales) {
                if bv.bottom > 0 {
                    positives += 1;
                    assert_eq!(
                        locate_mn_via_ladder(&pot, scales.gamma_n),
                        Ok(bv.bottom),
                        "seed {seed}"
                    );
                }
            }
        }
    }

    #[test]
    fn basic_valley_invariants_on_samples() {
        let vd =
            ValidatedDistribution::new(DistributionSpec::TwoPointSymmetric { alpha: 0.25 })
                .unwrap();
        let scales = compute_scales(100_000, 2, 1.0, vd.sigma(), vd.ie()).unwrap();
        let clearance = scales.gamma * scales.log_2();
        for seed in 0..200 {
            let Ok((_, pot, bv)) = find_basic_valley_sampled(&vd, seed, &scales) else {
                continue;
            };
            assert!(bv.left_peak < bv.bottom && bv.bottom < bv.right_peak);
            assert!(bv.left_peak <= 0 && 0 <= bv.right_peak);
            assert!(bv.depth_left(&pot) >= scales.gamma_n);
            assert!(bv.depth_right(&pot) >= scales.gamma_n);
            // the bottom really is the lowest point of the valley window
            assert_eq!(
                pot.min_in(bv.left_peak, bv.right_peak),
                pot.value(bv.bottom)
            );
            if bv.bottom > 0 {
                let ridge = pot.max_in(0, bv.bottom);
                assert!(pot.value(bv.left_peak) - ridge >= clearance);
            } else if bv.bottom < 0 {
                let ridge = pot.max_in(bv.bottom, 0);
                assert!(pot.value(bv.right_peak) - ridge >= clearance);
            }
        }
    }

    #[test]
    fn descent_strictly_shrinks_and_moves_bottom_only_on_zero_side() {
        let vd =
            ValidatedDistribution::new(DistributionSpec::TwoPointSymmetric { alpha: 0.25 })
                .unwrap();
        let scales = compute_scales(1_000_000, 2, 1.0, vd.sigma(), vd.ie()).unwrap();
        let mut refined_seen = 0;
        for seed in 0..400 {
            let pot = sampled_potential(seed, scales.default_window_radius());
            let Ok(candidate) = find_candidate_valley(&pot, scales.gamma_n) else {
                continue;
            };
            let (_, trace) = descend(&pot, candidate, scales.gamma_n);
            let mut prev = candidate;
            for v in trace {
                assert!(v.left >= prev.left && v.right <= prev.right);
                assert!((v.left, v.right) != (prev.left, prev.right));
                if v.bottom != prev.bottom {
                    // the bottom can only move through a refinement of the
                    // side containing 0
                    assert!(
                        (prev.bottom >= 0 && v.right <= prev.bottom)
                            || (prev.bottom <= 0 && v.left >= prev.bottom),
                        "bottom moved across a non-zero-side refinement"
                    );
                }
                refined_seen += 1;
                prev = v;
            }
        }
        assert!(refined_seen > 0, "no refinement exercised by the sample");
    }

    #[test]
    fn valley_report_serializes_with_pinned_keys() {
        let pot = staircase();
        let scales = compute_scales(48, 2, 0.1, LN3, LN3).unwrap();
        let bv = find_basic_valley(&pot, &scales).unwrap();
        let json = serde_json::to_value(bv.report(&pot)).unwrap();
        for key in [
            "Mn_prime",
            "mn",
            "Mn",
            "Gamma_n",
            "depth_left",
            "depth_right",
            "refinements",
        ] {
            assert!(json.get(key).is_some(), "missing key {key}");
        }
    }
}
