//! `sinai` — generate environments, inspect potentials and valleys, run
//! walks, evaluate the exact formulas, check good environments, and drive
//! the statistical experiments.
//!
//! Exit codes: 0 ok, 1 I/O, 2 validation (bad flags, malformed files,
//! violated hypotheses), 3 domain failure (no valley in the window, walk
//! left the window, ...).
//!
//! `--seed` and `--workers` may also come from `SINAI_SEED` / `SINAI_WORKERS`;
//! explicit flags win.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sinai_core::analysis::{
    check_good_environment, run_experiment, ExperimentConfig, ExperimentKind,
};
use sinai_core::environment::{
    sample_environment, DistributionSpec, EnvError, Environment, ValidatedDistribution,
};
use sinai_core::exact::{
    expected_exit_time, expected_local_time, geometric_parameter, ruin_probabilities,
    IntervalQuery,
};
use sinai_core::potential::build_potential;
use sinai_core::scales::compute_scales;
use sinai_core::seeding;
use sinai_core::valleys::find_basic_valley;
use sinai_core::walk::run_walk;

mod pilot;

#[derive(Parser)]
#[command(name = "sinai", about = "Random walks in random environment: simulation and exact formulas", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample an environment window from a distribution spec file.
    Env(EnvArgs),
    /// Locate the basic valley of an environment file.
    Valley(ValleyArgs),
    /// Run one walk and export its local-time profile.
    Walk(WalkArgs),
    /// Evaluate a closed-form quenched quantity.
    Exact(ExactArgs),
    /// Evaluate the good-environment property list.
    Goodenv(GoodenvArgs),
    /// Run a statistical experiment from a config file.
    Experiment(ExperimentArgs),
    /// Recompute the calibration constants used by the acceptance suite.
    Pilot(PilotArgs),
}

#[derive(Args)]
struct EnvArgs {
    /// JSON file with the distribution spec, e.g.
    /// {"kind": "two-point-symmetric", "alpha": 0.25}
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    lo: i64,
    #[arg(long, allow_negative_numbers = true)]
    hi: i64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ValleyArgs {
    #[arg(long)]
    env: PathBuf,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 2)]
    p: u32,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
}

#[derive(Args)]
struct WalkArgs {
    #[arg(long)]
    env: PathBuf,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    start: i64,
    #[arg(long)]
    steps: u64,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path; a `.meta.json` sidecar is written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExactArgs {
    #[arg(long)]
    env: PathBuf,
    #[command(subcommand)]
    what: ExactOp,
}

#[derive(Subcommand)]
enum ExactOp {
    /// Exit probabilities from x on (a, b).
    Ruin(QueryArgs),
    /// Expected exit time from x out of (a, b).
    Exit(QueryArgs),
    /// Geometric parameter of the local time at x before exiting (a, b).
    Geometric(QueryArgs),
    /// Expected local time at `site` over one excursion from `from`.
    LocalTime {
        #[arg(long, allow_negative_numbers = true)]
        from: i64,
        #[arg(long, allow_negative_numbers = true)]
        site: i64,
    },
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long, allow_negative_numbers = true)]
    a: i64,
    #[arg(long, allow_negative_numbers = true)]
    x: i64,
    #[arg(long, allow_negative_numbers = true)]
    b: i64,
}

#[derive(Args)]
struct GoodenvArgs {
    #[arg(long)]
    env: PathBuf,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 2)]
    p: u32,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Ceiling constant for the window-occupation property.
    #[arg(long)]
    c1: Option<f64>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// concentration | radius | lln | env-stats | favorites
    #[arg(long)]
    kind: String,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Overrides the config seed (and SINAI_SEED).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct PilotArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum CliError {
    Io(String),
    Validation(String),
    Domain(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Domain(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Io(m) | CliError::Validation(m) | CliError::Domain(m) => m,
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)
                .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        }
    }
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_environment(path: &Path) -> Result<Environment, CliError> {
    let text = read_file(path)?;
    Environment::from_json(&text).map_err(|e| CliError::Validation(e.to_string()))
}

fn seed_from(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("SINAI_SEED") {
        Ok(v) => v
            .parse()
            .map_err(|_| CliError::Validation(format!("SINAI_SEED={v} is not a u64"))),
        Err(_) => Ok(0),
    }
}

fn workers_from(flag: Option<usize>) -> Result<usize, CliError> {
    if let Some(w) = flag {
        return Ok(w.max(1));
    }
    match std::env::var("SINAI_WORKERS") {
        Ok(v) => v
            .parse::<usize>()
            .map(|w| w.max(1))
            .map_err(|_| CliError::Validation(format!("SINAI_WORKERS={v} is not a number"))),
        Err(_) => Ok(4),
    }
}

fn cmd_env(args: EnvArgs) -> Result<(), CliError> {
    let text = read_file(&args.spec)?;
    let spec: DistributionSpec = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("spec {}: {e}", args.spec.display())))?;
    let vd = ValidatedDistribution::new(spec).map_err(|e| match &e {
        EnvError::HypothesisViolated(report) => {
            let json = serde_json::to_string_pretty(report).unwrap_or_default();
            eprintln!("{json}");
            CliError::Validation(e.to_string())
        }
        _ => CliError::Validation(e.to_string()),
    })?;
    let seed = seed_from(args.seed)?;
    let env = sample_environment(&vd, args.lo, args.hi, seed)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    write_file(&args.out, &env.to_json())?;
    println!(
        "wrote {} ({} sites, eta0={}, seed={})",
        args.out.display(),
        args.hi - args.lo + 1,
        env.eta0,
        env.seed
    );
    Ok(())
}

fn cmd_valley(args: ValleyArgs) -> Result<(), CliError> {
    let env = load_environment(&args.env)?;
    let pot = build_potential(&env);
    let sigma = env.sigma2.sqrt();
    let ie = ((1.0 - env.eta0) / env.eta0).ln();
    let scales = compute_scales(args.n, args.p, args.gamma, sigma, ie)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let bv = find_basic_valley(&pot, &scales).map_err(|e| {
        CliError::Domain(format!(
            "{e}; window [{}, {}], depth threshold {:.3}",
            env.lo, env.hi, scales.gamma_n
        ))
    })?;
    let report = bv.report(&pot);
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    Ok(())
}

fn cmd_walk(args: WalkArgs) -> Result<(), CliError> {
    let env = load_environment(&args.env)?;
    if args.steps == 0 {
        return Err(CliError::Validation("steps must be at least 1".into()));
    }
    if !env.contains(args.start) {
        return Err(CliError::Validation(format!(
            "start {} outside window [{}, {}]",
            args.start, env.lo, env.hi
        )));
    }
    let seed = seed_from(args.seed)?;
    let mut rng = seeding::trial_rng(seed, 0);
    let profile = run_walk(&env, args.start, args.steps, &mut rng)
        .map_err(|e| CliError::Domain(e.to_string()))?;
    write_file(&args.out, &profile.to_csv())?;
    let meta_path = args.out.with_extension("meta.json");
    write_file(&meta_path, &profile.metadata_json(&seed.to_string()))?;
    println!(
        "wrote {} and {} (final position {})",
        args.out.display(),
        meta_path.display(),
        profile.final_position()
    );
    Ok(())
}

fn cmd_exact(args: ExactArgs) -> Result<(), CliError> {
    let env = load_environment(&args.env)?;
    let pot = build_potential(&env);
    let query = |q: &QueryArgs| {
        IntervalQuery::new(q.a, q.x, q.b).map_err(|e| CliError::Validation(e.to_string()))
    };
    let out = match &args.what {
        ExactOp::Ruin(q) => {
            let r = ruin_probabilities(&pot, query(q)?);
            format!(
                "{{\"p_a_before_b\": {}, \"p_b_before_a\": {}}}",
                r.p_a_before_b, r.p_b_before_a
            )
        }
        ExactOp::Exit(q) => {
            let t = expected_exit_time(&pot, &env, query(q)?);
            format!("{{\"expected_exit_time\": {t}}}")
        }
        ExactOp::Geometric(q) => {
            let p = geometric_parameter(&pot, &env, query(q)?);
            format!("{{\"geometric_parameter\": {p}}}")
        }
        ExactOp::LocalTime { from, site } => {
            if from == site || !env.contains(*from) || !env.contains(*site) {
                return Err(CliError::Validation(format!(
                    "need two distinct sites inside [{}, {}]",
                    env.lo, env.hi
                )));
            }
            let v = expected_local_time(&pot, &env, *from, *site);
            format!("{{\"expected_local_time\": {v}}}")
        }
    };
    println!("{out}");
    Ok(())
}

fn cmd_goodenv(args: GoodenvArgs) -> Result<(), CliError> {
    let env = load_environment(&args.env)?;
    let pot = build_potential(&env);
    let c1 = args.c1.unwrap_or(sinai_core::analysis::goodenv::DEFAULT_C1);
    let report = check_good_environment(&env, &pot, args.n, args.p, args.gamma, c1)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> Result<(), CliError> {
    let kind = ExperimentKind::parse(&args.kind).ok_or_else(|| {
        CliError::Validation(format!(
            "unknown experiment kind {:?}; expected concentration, radius, lln, env-stats or favorites",
            args.kind
        ))
    })?;
    let text = read_file(&args.config)?;
    let mut cfg: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("config {}: {e}", args.config.display())))?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    } else if let Ok(v) = std::env::var("SINAI_SEED") {
        cfg.seed = v
            .parse()
            .map_err(|_| CliError::Validation(format!("SINAI_SEED={v} is not a u64")))?;
    }
    let workers = workers_from(args.workers)?;
    let result =
        run_experiment(kind, &cfg, workers).map_err(|e| CliError::Validation(e.to_string()))?;
    let json_path = args.out_dir.join(format!("{}.json", kind.as_str()));
    let csv_path = args.out_dir.join(format!("{}.csv", kind.as_str()));
    write_file(&json_path, &result.to_json())?;
    write_file(&csv_path, &result.to_csv())?;
    println!(
        "wrote {} and {} ({} records, failures: {} no-valley / {} window-exit / {} capped)",
        json_path.display(),
        csv_path.display(),
        result.records.len(),
        result.failures.no_valley,
        result.failures.window_exit,
        result.failures.capped
    );
    for (key, value) in &result.aggregates {
        println!("  {key} = {value}");
    }
    Ok(())
}

fn cmd_pilot(args: PilotArgs) -> Result<(), CliError> {
    let report = pilot::run(args.seed);
    match &args.out {
        Some(path) => write_file(path, &report)?,
        None => println!("{report}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Env(a) => cmd_env(a),
        Command::Valley(a) => cmd_valley(a),
        Command::Walk(a) => cmd_walk(a),
        Command::Exact(a) => cmd_exact(a),
        Command::Goodenv(a) => cmd_goodenv(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Pilot(a) => cmd_pilot(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
