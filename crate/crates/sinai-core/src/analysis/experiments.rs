//! The experiment drivers.
//!
//! Every driver follows the same scheme: per grid point `n`, sample
//! `environments` independent environments (seeded from the master seed and
//! the environment index), locate each basic valley under the window policy,
//! then fan `trials` walks out to a worker pool. Trial `t` uses environment
//! `t mod environments` and the ChaCha stream with index `t`, so results are
//! independent of worker count and scheduling. Failures (no valley within
//! the window budget, window exits after retries) become labeled records.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::environment::{sample_environment, Environment, ValidatedDistribution};
use crate::exact::{expected_occupation, occupation_profile};
use crate::potential::Potential;
use crate::scales::{compute_scales, Scales};
use crate::seeding;
use crate::valleys::{find_basic_valley_sampled, BasicValley};
use crate::walk::{concentration_radius, favorite_sites, run_walk, LocalTimeProfile, WalkError};

use super::config::{ConcentrationWindow, ConfigError, ExperimentConfig, ExperimentKind, LlnWindow};
use super::result::{count_failures, ExperimentResult, TrialRecord, SCHEMA_VERSION};
use super::stats::{bootstrap_ci, mean, median};

/// One sampled environment with its valley and the exact quantities shared
/// by all trials on it.
struct Prepared {
    env: Environment,
    pot: Potential,
    valley: BasicValley,
    env_seed: u64,
    /// `E_m[xi(W_n, T_m)]` at the bottom.
    occ_wn: f64,
    /// `(k, E_k[xi(W_n, T_k)])` for the neighbor sites a driver needs.
    neighbor_occ: Vec<(i64, f64)>,
}

fn prepare(
    vd: &ValidatedDistribution,
    env_seed: u64,
    scales: &Scales,
    neighbor_radius: i64,
) -> Result<Prepared, String> {
    let (env, pot, valley) =
        find_basic_valley_sampled(vd, env_seed, scales).map_err(|_| "no_valley".to_string())?;
    let (wl, wr) = valley.window();
    let m = valley.bottom;
    let occ_wn = expected_occupation(&pot, &env, wl, wr, m);
    let neighbor_occ = (m - neighbor_radius..=m + neighbor_radius)
        .filter(|&k| wl <= k && k <= wr)
        .map(|k| (k, expected_occupation(&pot, &env, wl, wr, k)))
        .collect();
    Ok(Prepared {
        env,
        pot,
        valley,
        env_seed,
        occ_wn,
        neighbor_occ,
    })
}

/// Run the walk, widening the window (same seed, unchanged overlap, so the
/// trajectory replays identically up to the old exit point) on exits.
fn walk_with_retry(
    vd: &ValidatedDistribution,
    prep: &Prepared,
    steps: u64,
    walk_seed: u64,
    trial: u64,
) -> Result<LocalTimeProfile, WalkError> {
    let mut last = WalkError::WindowExit {
        position: 0,
        step: 0,
    };
    for attempt in 0..=3u32 {
        let wider;
        let env = if attempt == 0 {
            &prep.env
        } else {
            let (lo, hi) = prep.env.window();
            let radius = hi.max(-lo) << attempt;
            wider = sample_environment(vd, -radius, radius, prep.env_seed)
                .expect("widened window still contains 0");
            &wider
        };
        let mut rng = seeding::trial_rng(walk_seed, trial);
        match run_walk(env, 0, steps, &mut rng) {
            Ok(profile) => return Ok(profile),
            Err(e) => last = e,
        }
    }
    Err(last)
}

pub fn run_experiment(
    kind: ExperimentKind,
    cfg: &ExperimentConfig,
    workers: usize,
) -> Result<ExperimentResult, ConfigError> {
    cfg.validate()?;
    let vd = ValidatedDistribution::new(cfg.distribution.clone())
        .expect("distribution already validated");

    let mut scale_errors = Vec::new();
    let mut scales_per_n = Vec::new();
    for &n in &cfg.n_grid {
        match compute_scales(n, cfg.p, cfg.gamma, vd.sigma(), vd.ie()) {
            Ok(s) => scales_per_n.push(s),
            Err(e) => scale_errors.push(e.to_string()),
        }
    }
    if !scale_errors.is_empty() {
        return Err(ConfigError(scale_errors));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| ConfigError(vec![format!("worker pool: {e}")]))?;

    let mut records: Vec<TrialRecord> = Vec::new();
    for (gi, &n) in cfg.n_grid.iter().enumerate() {
        let scales = &scales_per_n[gi];
        let theta = cfg.theta.value(n, gi);
        let neighbor_radius = match kind {
            ExperimentKind::Lln => match &cfg.lln_window {
                LlnWindow::Point => 0,
                LlnWindow::Ell => scales.ell.floor().max(0.0) as i64,
                LlnWindow::Fixed(k) => *k as i64,
            },
            ExperimentKind::Favorites => theta.floor().max(0.0) as i64,
            _ => 0,
        };

        let prepared: Vec<Result<Prepared, String>> = pool.install(|| {
            (0..cfg.environments)
                .into_par_iter()
                .map(|e| {
                    let env_seed = seeding::derive(cfg.seed, "env", &[n, e]);
                    prepare(&vd, env_seed, scales, neighbor_radius)
                })
                .collect()
        });

        if kind == ExperimentKind::EnvStats {
            for e in 0..cfg.environments {
                let env_seed = seeding::derive(cfg.seed, "env", &[n, e]);
                let record = match &prepared[e as usize] {
                    Err(label) => TrialRecord::failed(n, e, env_seed.to_string(), label),
                    Ok(prep) => env_stats_record(n, e, scales, prep),
                };
                records.push(record);
            }
            continue;
        }

        let walk_seed = seeding::derive(cfg.seed, "walk", &[n]);
        let recs: Vec<TrialRecord> = pool.install(|| {
            (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let e = (t % cfg.environments) as usize;
                    let env_seed = seeding::derive(cfg.seed, "env", &[n, t % cfg.environments]);
                    match &prepared[e] {
                        Err(label) => TrialRecord::failed(n, t, env_seed.to_string(), label),
                        Ok(prep) => match walk_with_retry(&vd, prep, n, walk_seed, t) {
                            Err(_) => {
                                TrialRecord::failed(n, t, env_seed.to_string(), "window_exit")
                            }
                            Ok(profile) => {
                                walk_record(kind, cfg, n, scales, theta, prep, t, &profile)
                            }
                        },
                    }
                })
                .collect()
        });
        records.extend(recs);
    }

    let aggregates = aggregate(kind, cfg, &records);
    let failures = count_failures(&records);
    Ok(ExperimentResult {
        version: SCHEMA_VERSION.to_string(),
        kind: kind.as_str().to_string(),
        config: cfg.clone(),
        records,
        aggregates,
        failures,
    })
}

fn base_record(n: u64, trial: u64, prep: &Prepared) -> TrialRecord {
    let (wl, wr) = prep.valley.window();
    TrialRecord {
        n,
        trial,
        env_seed: prep.env_seed.to_string(),
        mn: Some(prep.valley.bottom),
        wn_left: Some(wl),
        wn_right: Some(wr),
        failure: None,
        stats: BTreeMap::new(),
    }
}

fn walk_record(
    kind: ExperimentKind,
    cfg: &ExperimentConfig,
    n: u64,
    scales: &Scales,
    theta: f64,
    prep: &Prepared,
    trial: u64,
    profile: &LocalTimeProfile,
) -> TrialRecord {
    let mut rec = base_record(n, trial, prep);
    let m = prep.valley.bottom;
    let (wl, wr) = prep.valley.window();
    let nf = n as f64;
    match kind {
        ExperimentKind::Concentration => {
            let (half_width, event_floor) = match cfg.concentration_window {
                ConcentrationWindow::HalfWidthFp => (
                    scales.f_p,
                    1.0 - (scales.f_p as f64).powf(-cfg.rho / 2.0),
                ),
                ConcentrationWindow::Theta => {
                    (theta.floor().max(0.0) as i64, 1.0 - theta.powf(-cfg.rho))
                }
            };
            let ratio = profile.count_in(m - half_width, m + half_width) as f64 / nf;
            let (vlo, vhi) = profile.range();
            rec.stats.insert("ratio".into(), ratio);
            rec.stats
                .insert("event".into(), f64::from(ratio >= event_floor));
            rec.stats
                .insert("final_dist".into(), (profile.final_position() - m).abs() as f64);
            rec.stats
                .insert("stayed".into(), f64::from(vlo >= wl && vhi <= wr));
            rec.stats.insert(
                "d_center".into(),
                (profile.count(m) as f64 / nf - 1.0 / prep.occ_wn).abs(),
            );
        }
        ExperimentKind::Radius => {
            let y = concentration_radius(profile);
            rec.stats.insert("y_n".into(), y as f64);
            rec.stats.insert("event".into(), f64::from(y as f64 <= theta));
            rec.stats.insert("theta".into(), theta);
        }
        ExperimentKind::Lln => {
            let tol = scales.log_2().powi(-2);
            let mut d_center = f64::NAN;
            let mut d_max = f64::NEG_INFINITY;
            for &(k, occ) in &prep.neighbor_occ {
                let d = (profile.count(k) as f64 / nf - 1.0 / occ).abs();
                if k == m {
                    d_center = d;
                }
                d_max = d_max.max(d);
            }
            rec.stats.insert("d_center".into(), d_center);
            rec.stats.insert("d_max".into(), d_max);
            rec.stats.insert("event".into(), f64::from(d_max <= tol));
            rec.stats
                .insert("xi_center_ratio".into(), profile.count(m) as f64 / nf);
        }
        ExperimentKind::Favorites => {
            let fav = favorite_sites(profile);
            let contained = fav
                .sites
                .iter()
                .all(|&s| (s - m).abs() <= scales.f_p);
            let best_density = prep
                .neighbor_occ
                .iter()
                .map(|&(_, occ)| 1.0 / occ)
                .fold(f64::NEG_INFINITY, f64::max);
            let xi_star_ratio = fav.xi_star as f64 / nf;
            rec.stats.insert("xi_star_ratio".into(), xi_star_ratio);
            rec.stats
                .insert("containment".into(), f64::from(contained));
            rec.stats
                .insert("delta".into(), (xi_star_ratio - best_density).abs());
            rec.stats.insert("fav_count".into(), fav.sites.len() as f64);
        }
        ExperimentKind::EnvStats => unreachable!("env-stats takes no walks"),
    }
    rec
}

fn env_stats_record(n: u64, trial: u64, scales: &Scales, prep: &Prepared) -> TrialRecord {
    let mut rec = base_record(n, trial, prep);
    let m = prep.valley.bottom;
    let (wl, wr) = prep.valley.window();
    let profile = occupation_profile(&prep.pot, &prep.env, wl, wr, m);
    let outside: f64 = (wl..=wr)
        .zip(profile.iter())
        .filter(|&(k, _)| (k - m).abs() > scales.f_p)
        .map(|(_, v)| v)
        .sum();
    let fbar_ceiling = 2.0 / (prep.env.eta0 * (scales.f_p as f64 + 1.0));
    rec.stats.insert("occupation".into(), prep.occ_wn);
    rec.stats.insert("fbar_occupation".into(), outside);
    rec.stats
        .insert("fbar_event".into(), f64::from(outside > fbar_ceiling));

    // ladder-tail statistics of the positive side
    let v0 = prep.pot.first_drop_to(0.0);
    for r in [16i64, 64, 256] {
        let exceeded = v0.map_or(true, |t| t > r);
        rec.stats
            .insert(format!("v0_gt_{r}"), f64::from(exceeded));
    }
    // race between a drop and a rise of Gamma_n / 2
    let level = scales.gamma_n / 2.0;
    let drop = prep.pot.first_drop_to(level);
    let rise = prep.pot.first_rise_to(level);
    let race = match (drop, rise) {
        (Some(d), Some(u)) => d < u,
        (Some(_), None) => true,
        _ => false,
    };
    rec.stats.insert("v_race".into(), f64::from(race));
    rec
}

/// Recompute every aggregate from the records; drivers call this, and the
/// recomputability test calls it again on the serialized result.
pub fn aggregate(
    kind: ExperimentKind,
    cfg: &ExperimentConfig,
    records: &[TrialRecord],
) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for &n in &cfg.n_grid {
        let at_n: Vec<&TrialRecord> = records.iter().filter(|r| r.n == n).collect();
        let values = |key: &str| -> Vec<f64> {
            at_n.iter()
                .filter_map(|r| r.stats.get(key).copied())
                .collect()
        };
        let put = |out: &mut BTreeMap<String, f64>, name: &str, v: f64| {
            out.insert(format!("n{n}/{name}"), v);
        };
        let failed = at_n.iter().filter(|r| r.failure.is_some()).count() as f64;
        if !at_n.is_empty() {
            put(&mut out, "freq_failed", failed / at_n.len() as f64);
        }
        let boot_seed = seeding::derive(cfg.seed, "bootstrap", &[n]);
        match kind {
            ExperimentKind::Concentration => {
                let ratios = values("ratio");
                put(&mut out, "median_ratio", median(&ratios));
                let (lo, hi) = bootstrap_ci(&ratios, median, 1000, boot_seed);
                put(&mut out, "median_ratio_ci_lo", lo);
                put(&mut out, "median_ratio_ci_hi", hi);
                put(&mut out, "freq_event", mean(&values("event")));
                put(&mut out, "freq_stayed", mean(&values("stayed")));
                put(&mut out, "median_final_dist", median(&values("final_dist")));
                put(&mut out, "median_d_center", median(&values("d_center")));
            }
            ExperimentKind::Radius => {
                put(&mut out, "median_y", median(&values("y_n")));
                let events = values("event");
                put(&mut out, "freq_event", mean(&events));
                let (lo, hi) = bootstrap_ci(&events, mean, 1000, boot_seed);
                put(&mut out, "freq_event_ci_lo", lo);
                put(&mut out, "freq_event_ci_hi", hi);
            }
            ExperimentKind::Lln => {
                let d = values("d_center");
                put(&mut out, "median_d_center", median(&d));
                let (lo, hi) = bootstrap_ci(&d, median, 1000, boot_seed);
                put(&mut out, "median_d_center_ci_lo", lo);
                put(&mut out, "median_d_center_ci_hi", hi);
                put(&mut out, "freq_event", mean(&values("event")));
                put(
                    &mut out,
                    "median_xi_center_ratio",
                    median(&values("xi_center_ratio")),
                );
            }
            ExperimentKind::EnvStats => {
                let occ = values("occupation");
                put(&mut out, "mean_occupation", mean(&occ));
                let (lo, hi) = bootstrap_ci(&occ, mean, 1000, boot_seed);
                put(&mut out, "mean_occupation_ci_lo", lo);
                put(&mut out, "mean_occupation_ci_hi", hi);
                put(&mut out, "freq_fbar_event", mean(&values("fbar_event")));
                for r in [16i64, 64, 256] {
                    put(
                        &mut out,
                        &format!("freq_v0_gt_{r}"),
                        mean(&values(&format!("v0_gt_{r}"))),
                    );
                }
                put(&mut out, "freq_v_race", mean(&values("v_race")));
                // Wald bound for the race: (a + Ie)/(2a + Ie) at a = Gamma_n/2
                if let Ok(report) = crate::environment::validate_distribution(&cfg.distribution)
                {
                    if let Ok(scales) =
                        compute_scales(n, cfg.p, cfg.gamma, report.sigma2.sqrt(), report.ie)
                    {
                        let a = scales.gamma_n / 2.0;
                        put(
                            &mut out,
                            "v_race_bound",
                            (a + report.ie) / (2.0 * a + report.ie),
                        );
                    }
                }
            }
            ExperimentKind::Favorites => {
                put(&mut out, "freq_containment", mean(&values("containment")));
                put(&mut out, "median_delta", median(&values("delta")));
                put(
                    &mut out,
                    "median_xi_star_ratio",
                    median(&values("xi_star_ratio")),
                );
            }
        }
    }
    out
}

pub fn run_concentration(
    cfg: &ExperimentConfig,
    workers: usize,
) -> Result<ExperimentResult, ConfigError> {
    run_experiment(ExperimentKind::Concentration, cfg, workers)
}

pub fn run_concentration_radius(
    cfg: &ExperimentConfig,
    workers: usize,
) -> Result<ExperimentResult, ConfigError> {
    run_experiment(ExperimentKind::Radius, cfg, workers)
}

pub fn run_local_time_lln(
    cfg: &ExperimentConfig,
    workers: usize,
) -> Result<ExperimentResult, ConfigError> {
    run_experiment(ExperimentKind::Lln, cfg, workers)
}

pub fn run_env_statistics(
    cfg: &ExperimentConfig,
    workers: usize,
) -> Result<ExperimentResult, ConfigError> {
    run_experiment(ExperimentKind::EnvStats, cfg, workers)
}

pub fn run_favorites(
    cfg: &ExperimentConfig,
    workers: usize,
) -> Result<ExperimentResult, ConfigError> {
    run_experiment(ExperimentKind::Favorites, cfg, workers)
}
