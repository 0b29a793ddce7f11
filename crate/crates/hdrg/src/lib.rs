//! Simulation and decoding of the planar code's bit-flip sector.
//!
//! The crate is organised around a hard-decision decoder that pairs
//! syndrome defects ("anyons") by growing a search distance ring by ring:
//!
//! * [`geometry`] — lattice layout, error patterns, syndromes and the
//!   homology check that decides whether a residual operator is a logical
//!   error.
//! * [`noise`] — deterministic, splittable random streams, iid and
//!   spatially correlated bit-flip noise, and hierarchical cluster
//!   patterns engineered to defeat the plain decoder.
//! * [`decoder`] — the ring-growing decoder in its two metrics: the plain
//!   (static-distance) variant and the shortcut variant that contracts
//!   distances through previously annihilated pairs.
//! * [`oracle`] — exact small-lattice ground truth: exhaustive failure
//!   rates and minimum-weight failure searches used to validate the
//!   Monte Carlo machinery.
//! * [`harness`] — failure-rate estimation, weight-stratified rare-event
//!   estimation, scaling fits, threshold scans, variant comparisons and
//!   resumable parameter sweeps.
//!
//! Every sampling entry point is driven by a [`noise::RandomStream`], so
//! all results are bit-reproducible for a given master seed regardless of
//! thread count.

pub mod decoder;
pub mod geometry;
pub mod harness;
pub mod noise;
pub mod oracle;

pub use decoder::{
    decode, decode_ring_scan, init_table, shortcut_update, DecodeResult, DecoderConfig,
    DistanceTable, Metric, Pairing,
};
pub use geometry::{
    build_geometry, is_logical_failure, node_distance, syndrome_of, CodeGeometry, ErrorPattern,
    Node, Qubit, Syndrome,
};
pub use harness::{
    bootstrap_alpha, compare_variants, estimate_p, estimate_p_stratified, find_l_star, fit_alpha,
    fit_beta, run_sweep, threshold_scan, wilson_interval, AlphaFit, BetaFit, Crossing,
    EstimateRecord, LStarResult, RatioRecord, RunSpec, SweepNoise, SweepReport, ThresholdEstimate,
};
pub use noise::{
    cantor_pattern, cantor_width, derive_stream, sample_correlated, sample_iid,
    uniform_cluster_width, CantorSpec, NoiseModel, RandomStream,
};
pub use oracle::{
    decode_fails, exact_failure_counts, exact_failure_rate, failure_rate_from_counts,
    min_weight_failure, ml_min_weight, oracle_report, OracleReport,
};

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Lattices below distance 2 have no interior and are rejected.
    #[error("lattice size L={0} is not supported; need L >= 2")]
    InvalidLatticeSize(usize),
    /// A qubit id outside the lattice was supplied.
    #[error("qubit id {id} out of range: lattice has {num_qubits} qubits")]
    QubitOutOfRange { id: usize, num_qubits: usize },
    /// No physical chain joins the left and right boundary nodes.
    #[error("the two boundary nodes cannot be joined by a physical chain")]
    VirtualPair,
    /// A homology check was asked about a pattern that still flags checks.
    #[error("pattern has a nonempty syndrome; the residual check needs a fully corrected pattern")]
    NontrivialSyndrome,
    /// A probability parameter was outside `[0, 1]`.
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    /// The lattice cannot host an adversarial cluster of this level.
    #[error("lattice L={l} is too small to host a level-{level} cluster")]
    LatticeTooSmall { level: usize, l: usize },
    /// The adversarial cluster fits but the decoder corrects it anyway.
    #[error(
        "the level-{level} cluster is corrected by the standard decoder on L={l}; \
         match the cluster level to the lattice size"
    )]
    ClusterIneffective { level: usize, l: usize },
    /// The adversarial cluster does not fit in the requested position.
    #[error("level-{level} cluster (width {width}) does not fit at row {row}, column {col} on L={l}")]
    ClusterOutOfBounds {
        level: usize,
        width: usize,
        row: usize,
        col: usize,
        l: usize,
    },
    /// The decoder exceeded its search-distance safety bound.
    #[error("search distance k={k} exceeded the safety bound {bound}")]
    SearchBoundExceeded { k: usize, bound: usize },
    /// An internal invariant of the decoder was violated.
    #[error("internal decoder invariant violated: {0}")]
    Internal(&'static str),
    /// Exhaustive enumeration was requested for a state space that is too big.
    #[error("exact enumeration refused: {num_qubits} qubits exceeds the {limit}-qubit limit")]
    TooLargeForEnumeration { num_qubits: usize, limit: usize },
    /// A scaling fit received a failure rate it cannot transform.
    #[error("cannot fit point (L={l}, rate={rate}): rates must lie strictly between 0 and 1")]
    UnfittablePoint { l: f64, rate: f64 },
    /// A scaling fit received too few points.
    #[error("need at least {needed} points for this fit, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    /// Failure-rate curves never cross on the sampled grid.
    #[error("failure-rate curves of adjacent sizes do not cross on the sampled grid")]
    NoCrossing,
    /// Weight-stratified estimation only makes sense for iid noise.
    #[error("weight-stratified estimation supports only the iid noise model")]
    UnsupportedModel,
    /// A run specification failed validation.
    #[error("invalid run spec: {0}")]
    InvalidSpec(String),
    /// Persisting or reading results failed.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    /// A results file could not be parsed.
    #[error("malformed record: {0}")]
    MalformedRecord(#[from] serde_json::Error),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
