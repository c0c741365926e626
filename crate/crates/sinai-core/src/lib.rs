//! Sinai's random walk in random environment, end to end.
//!
//! The crate covers the full pipeline used when studying the recurrent
//! (Sinai) regime of one-dimensional RWRE at finite size:
//!
//! * [`environment`] — site-wise transition laws satisfying the recurrence
//!   and ellipticity hypotheses, sampled reproducibly from seeds;
//! * [`potential`] — the random potential `S` built from the log-odds of the
//!   environment, plus its stopping times;
//! * [`scales`] — the slowly varying scale functions (depth threshold,
//!   concentration half-width, ...) everything else is parameterized by;
//! * [`valleys`] — valley detection, refinement, the basic valley around the
//!   origin and the ladder-epoch characterization of its bottom;
//! * [`exact`] — closed-form quenched hitting probabilities, exit times and
//!   occupation measures, evaluated in overflow-safe form;
//! * [`oracle`] — independent linear-system solvers used as ground truth for
//!   everything in [`exact`];
//! * [`walk`] — the quenched Markov chain itself with local-time recording;
//! * [`analysis`] — the good-environment checker and the statistical
//!   experiment drivers, all deterministic in (seed, worker count).

pub mod analysis;
pub mod environment;
pub mod exact;
pub mod oracle;
pub mod potential;
pub mod scales;
pub mod seeding;
pub mod valleys;
pub mod walk;

pub use environment::{
    sample_environment, validate_distribution, DistributionSpec, EnvError, Environment,
    HypothesisReport, ValidatedDistribution,
};
pub use potential::{build_potential, Potential};
pub use scales::{compute_scales, ScaleError, Scales};
pub use valleys::{BasicValley, Valley, ValleyError, ValleyReport};
pub use walk::{HittingResult, LocalTimeProfile, WalkError};
