//! Result records and their serial formats.
//!
//! Every estimation op in the harness produces an [`EstimateRecord`]: one
//! (lattice, noise, variant) point with its sample counts, failure rate
//! and Wilson 95% interval. Records serialize to JSON (one object per
//! line in results files) and to a fixed-column CSV for plotting.

use serde::{Deserialize, Serialize};

use crate::decoder::Metric;
use crate::noise::NoiseModel;

/// Record format version stamped into every record.
pub const RECORD_SCHEMA: &str = "estimate-record/1";

/// Normal quantile for two-sided 95% coverage, frozen so intervals are
/// bit-reproducible.
pub const WILSON_Z: f64 = 1.959963984540054;

/// Fixed CSV column order for exported records.
pub const CSV_HEADER: &str = "L,p,p_prime,q,variant,n,failures,P,ci_lo,ci_hi,seed";

/// One estimated failure rate at a single parameter point.
///
/// `rate` is the estimator's point value. For direct Monte Carlo runs it
/// equals `failures / samples`; for the weight-stratified estimator it
/// is a binomially weighted combination, so the raw counts are kept for
/// bookkeeping but do not reproduce `rate` by division.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    /// Record format version.
    pub schema: String,
    /// Lattice size.
    pub l: usize,
    /// Flip probability of the iid model, when that model was used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Primary flip probability of the correlated model, when used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_prime: Option<f64>,
    /// Recruitment probability of the correlated model, when used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    /// Decoder variant.
    pub variant: Metric,
    /// Number of decoded samples.
    pub samples: u64,
    /// Number of logical failures observed.
    pub failures: u64,
    /// Estimated logical failure rate.
    pub rate: f64,
    /// Lower end of the 95% interval.
    pub ci_lo: f64,
    /// Upper end of the 95% interval.
    pub ci_hi: f64,
    /// True when sampling stopped at the sample cap before reaching the
    /// failure target; the estimate is then low-statistics.
    pub capped: bool,
    /// Identifier of the randomness source that produced the record:
    /// the master seed for sweep points, the stream fingerprint for
    /// direct estimation calls.
    pub seed: u64,
    /// Wall-clock duration of the estimation, when measured. Excluded
    /// from equality-of-reruns comparisons.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl EstimateRecord {
    /// Reconstructs the noise model the record was estimated under.
    pub fn model(&self) -> Option<NoiseModel> {
        match (self.p, self.p_prime, self.q) {
            (Some(p), None, None) => Some(NoiseModel::Iid { p }),
            (None, Some(p_prime), Some(q)) => Some(NoiseModel::Correlated { p_prime, q }),
            _ => None,
        }
    }

    /// The record rendered as one CSV row in [`CSV_HEADER`] order.
    /// Absent noise parameters become empty cells.
    pub fn to_csv_row(&self) -> String {
        fn opt(v: Option<f64>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.l,
            opt(self.p),
            opt(self.p_prime),
            opt(self.q),
            self.variant,
            self.samples,
            self.failures,
            self.rate,
            self.ci_lo,
            self.ci_hi,
            self.seed
        )
    }

    /// The identity of the parameter point, used to match completed
    /// records when resuming a sweep. Probabilities compare by their
    /// exact bit patterns.
    pub(crate) fn resume_key(&self) -> PointKey {
        point_key(self.l, self.variant, self.p, self.p_prime, self.q)
    }
}

/// A parameter point identity: lattice, variant, and exact noise bits.
pub(crate) type PointKey = (usize, Metric, Option<u64>, Option<u64>, Option<u64>);

pub(crate) fn point_key(
    l: usize,
    variant: Metric,
    p: Option<f64>,
    p_prime: Option<f64>,
    q: Option<f64>,
) -> PointKey {
    (
        l,
        variant,
        p.map(f64::to_bits),
        p_prime.map(f64::to_bits),
        q.map(f64::to_bits),
    )
}

/// Wilson score 95% interval for `failures` out of `samples`.
///
/// Behaves sensibly at the edges: zero samples give the vacuous `[0, 1]`,
/// zero failures give a lower end of exactly 0, and all-failures give an
/// upper end of exactly 1.
pub fn wilson_interval(failures: u64, samples: u64) -> (f64, f64) {
    if samples == 0 {
        return (0.0, 1.0);
    }
    let n = samples as f64;
    let p_hat = failures as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let center = (p_hat + z2 / (2.0 * n)) / denom;
    let half = WILSON_Z * (p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // At the edges `center - half` is 0 (or `center + half` is 1) only
    // up to rounding; pin them so edge records compare exactly.
    let lo = if failures == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if failures == samples {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}
