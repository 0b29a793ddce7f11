//! Monte Carlo harness: estimation, fits, analyses and sweeps.
//!
//! The harness turns the decoder into numbers. Its estimation layer
//! ([`estimate_p`], [`estimate_p_stratified`]) samples noise, decodes,
//! and reports failure rates with Wilson intervals, stopping on a
//! failure target so accuracy is uniform across parameter points. On
//! top of it sit the analyses: threshold location from curve crossings
//! ([`threshold_scan`]), the break-even lattice size ([`find_l_star`]),
//! stretched-exponential scaling fits ([`fit_beta`], [`fit_alpha`]) and
//! the paired standard-vs-shortcut comparison ([`compare_variants`]).
//! [`run_sweep`] drives whole parameter grids deterministically and
//! resumably.
//!
//! Everything follows one seeding discipline: each consumer derives a
//! private [`RandomStream`](crate::noise::RandomStream) per trial, so
//! results depend only on seeds and parameters — never on thread count
//! or scheduling.

mod analysis;
mod estimate;
mod fit;
mod record;
mod sweep;

pub use analysis::{
    compare_variants, find_l_star, threshold_scan, Crossing, LStarResult, RatioRecord,
    ThresholdEstimate,
};
pub use estimate::{estimate_p, estimate_p_stratified};
pub use fit::{bootstrap_alpha, fit_alpha, fit_beta, AlphaFit, BetaFit, DEFAULT_BETA, DEFAULT_C};
pub use record::{wilson_interval, EstimateRecord, CSV_HEADER, RECORD_SCHEMA, WILSON_Z};
pub use sweep::{run_sweep, RunSpec, SweepNoise, SweepReport, RUN_SPEC_SCHEMA};
