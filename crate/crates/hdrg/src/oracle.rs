//! Exhaustive ground truth on small lattices.
//!
//! Monte Carlo results are only as trustworthy as the machinery that
//! produces them, so this module computes reference answers the slow,
//! undeniable way:
//!
//! * [`exact_failure_rate`] — the decoder's failure probability under
//!   independent noise, summed over *all* `2^Q` error patterns. The
//!   enumeration walks patterns in Gray-code order so each step toggles
//!   one qubit, and groups patterns by syndrome so each distinct
//!   syndrome is decoded once. The per-weight failing-pattern counts
//!   ([`exact_failure_counts`]) are exact integers, making the rate a
//!   27-term polynomial in `p` rather than a 67-million-term float sum.
//! * [`min_weight_failure`] — the smallest number of flips that makes
//!   *this* decoder fail, with a canonical witness (first failing
//!   pattern in weight-then-lexicographic order).
//! * [`ml_min_weight`] — the smallest number of flips at which *any*
//!   decoder must fail: the first weight where some syndrome is
//!   reachable from both logical classes at that weight or less. A
//!   decoder sees only the syndrome, so whichever class it bets on, the
//!   other pattern defeats it.
//!
//! The last two quantities bound each other: the ring-growing decoder
//! cannot need more flips to fail than the optimal bound, so
//! `min_weight_failure <= ml_min_weight` always holds and
//! [`oracle_report`] checks it.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::decoder::{decode, DecoderConfig, Metric};
use crate::geometry::{left_crossing_parity, syndrome_of, CodeGeometry, ErrorPattern, Qubit, Syndrome};
use crate::{Error, Result};

/// Largest qubit count the `2^Q` enumeration accepts (L = 4).
pub const ENUMERATION_LIMIT: usize = 26;

fn enumeration_guard(geom: &CodeGeometry) -> Result<()> {
    if geom.num_qubits() > ENUMERATION_LIMIT {
        return Err(Error::TooLargeForEnumeration {
            num_qubits: geom.num_qubits(),
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(())
}

/// Whether the decoder turns `pattern` into a logical failure.
///
/// Uses the parity identity: the residual `error XOR correction` always
/// has a trivial syndrome, and its left-boundary crossing parity is the
/// XOR of the two patterns' parities.
pub fn decode_fails(
    geom: &CodeGeometry,
    config: &DecoderConfig,
    pattern: &ErrorPattern,
) -> Result<bool> {
    let result = decode(geom, &syndrome_of(geom, pattern), config)?;
    Ok(left_crossing_parity(geom, pattern) != left_crossing_parity(geom, &result.correction))
}

fn decoded_left_parity(
    geom: &CodeGeometry,
    config: &DecoderConfig,
    syndrome_bits: u64,
) -> Result<bool> {
    let mut anyons = Vec::new();
    let mut bits = syndrome_bits;
    while bits != 0 {
        let id = bits.trailing_zeros() as usize;
        bits &= bits - 1;
        anyons.push(geom.plaquette_coords(id));
    }
    // Plaquette ids are row-major, so ascending bit order is node order.
    let syndrome = Syndrome { anyons };
    let result = decode(geom, &syndrome, config)?;
    Ok(left_crossing_parity(geom, &result.correction))
}

/// Counts, for every weight `w`, how many of the `C(Q, w)` weight-`w`
/// error patterns the decoder converts into a logical failure.
///
/// These integer counts determine the exact failure rate for *every*
/// `p` at once via [`failure_rate_from_counts`]. Requires
/// `Q <= `[`ENUMERATION_LIMIT`].
pub fn exact_failure_counts(geom: &CodeGeometry, config: &DecoderConfig) -> Result<Vec<u64>> {
    enumeration_guard(geom)?;
    let q = geom.num_qubits();
    let mut plaquette_mask = vec![0u64; q];
    let mut is_left = vec![false; q];
    for id in 0..q {
        let (a, b) = geom.qubit_plaquette_ids(id);
        plaquette_mask[id] = (1u64 << a) | b.map_or(0, |b| 1u64 << b);
        is_left[id] = matches!(geom.qubit(id), Qubit::LeftBoundary { .. });
    }
    // Left-crossing parity of the decoder's correction, per syndrome;
    // 2 marks "not decoded yet". The empty syndrome decodes to nothing.
    let mut correction_parity = vec![2u8; 1usize << geom.num_plaquettes()];
    correction_parity[0] = 0;
    let mut counts = vec![0u64; q + 1];
    // Gray-code walk: pattern i is gray(i) = i ^ (i >> 1), and
    // consecutive patterns differ in bit trailing_zeros(i), so the
    // syndrome, weight and crossing parity update in O(1) per pattern.
    let mut pattern_bits: u64 = 0;
    let mut syndrome_bits: u64 = 0;
    let mut weight = 0usize;
    let mut error_parity = false;
    for i in 1..(1u64 << q) {
        let b = i.trailing_zeros() as usize;
        pattern_bits ^= 1u64 << b;
        if (pattern_bits >> b) & 1 == 1 {
            weight += 1;
        } else {
            weight -= 1;
        }
        syndrome_bits ^= plaquette_mask[b];
        if is_left[b] {
            error_parity = !error_parity;
        }
        let mut parity = correction_parity[syndrome_bits as usize];
        if parity == 2 {
            parity = decoded_left_parity(geom, config, syndrome_bits)? as u8;
            correction_parity[syndrome_bits as usize] = parity;
        }
        if error_parity != (parity == 1) {
            counts[weight] += 1;
        }
    }
    Ok(counts)
}

/// Failure rate at flip probability `p` from per-weight failing counts:
/// the binomially weighted polynomial `sum_w counts[w] p^w (1-p)^(Q-w)`,
/// accumulated with compensated summation.
pub fn failure_rate_from_counts(counts: &[u64], num_qubits: usize, p: f64) -> f64 {
    debug_assert_eq!(counts.len(), num_qubits + 1);
    let mut sum = 0.0f64;
    let mut compensation = 0.0f64;
    for (w, &count) in counts.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let term =
            count as f64 * p.powi(w as i32) * (1.0 - p).powi((num_qubits - w) as i32);
        let y = term - compensation;
        let t = sum + y;
        compensation = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Exact decoder failure probability under independent noise, by full
/// enumeration. Requires `Q <= `[`ENUMERATION_LIMIT`].
pub fn exact_failure_rate(geom: &CodeGeometry, p: f64, config: &DecoderConfig) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    let counts = exact_failure_counts(geom, config)?;
    Ok(failure_rate_from_counts(&counts, geom.num_qubits(), p))
}

/// Advances `idx` to the next lexicographic `w`-combination of `0..n`;
/// returns false when exhausted.
pub(crate) fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let w = idx.len();
    let mut i = w;
    while i > 0 {
        i -= 1;
        if idx[i] != i + n - w {
            idx[i] += 1;
            for j in i + 1..w {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Finds the smallest weight `w <= w_max` at which some pattern defeats
/// the decoder, together with the canonical witness: the first failing
/// pattern when weights are scanned in increasing order and, within a
/// weight, qubit-id combinations lexicographically.
///
/// The caller is responsible for keeping `C(Q, w_max)` enumerable.
pub fn min_weight_failure(
    geom: &CodeGeometry,
    config: &DecoderConfig,
    w_max: usize,
) -> Result<Option<(usize, ErrorPattern)>> {
    let q = geom.num_qubits();
    for w in 1..=w_max.min(q) {
        let mut idx: Vec<usize> = (0..w).collect();
        loop {
            let pattern = ErrorPattern::from_qubit_ids(q, &idx)?;
            if decode_fails(geom, config, &pattern)? {
                return Ok(Some((w, pattern)));
            }
            if !next_combination(&mut idx, q) {
                break;
            }
        }
    }
    Ok(None)
}

/// Finds the smallest weight at which *any* decoder must fail, up to
/// `w_max`.
///
/// A decoder maps syndromes to corrections, so when two patterns of
/// weights `w1 <= w2` share a syndrome but lie in opposite logical
/// classes, any decoder fails on at least one of them; `w2` flips then
/// suffice to beat it. The scan enumerates patterns by increasing
/// weight and reports the first weight that completes such a pair.
pub fn ml_min_weight(geom: &CodeGeometry, w_max: usize) -> Result<Option<usize>> {
    let q = geom.num_qubits();
    let mut class_minima: HashMap<Vec<(usize, usize)>, [Option<usize>; 2]> = HashMap::new();
    // The empty pattern: trivial syndrome, trivial class, weight 0.
    class_minima.insert(Vec::new(), [Some(0), None]);
    for w in 1..=w_max.min(q) {
        let mut idx: Vec<usize> = (0..w).collect();
        loop {
            let pattern = ErrorPattern::from_qubit_ids(q, &idx)?;
            let class = left_crossing_parity(geom, &pattern) as usize;
            let entry = class_minima
                .entry(syndrome_of(geom, &pattern).anyons)
                .or_default();
            if entry[class].is_none() {
                entry[class] = Some(w);
                if entry[1 - class].is_some() {
                    // The partner class was reached at some weight <= w,
                    // so w completes the earliest possible pair.
                    return Ok(Some(w));
                }
            }
            if !next_combination(&mut idx, q) {
                break;
            }
        }
    }
    Ok(None)
}

/// Everything the small-lattice ground truth knows about one decoder
/// configuration, bundled for serialization and regression fixtures.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleReport {
    /// Report format version.
    pub schema: String,
    /// Lattice size.
    pub l: usize,
    /// Decoder variant the report describes.
    pub variant: Metric,
    /// Flip probability used for `exact_rate`.
    pub p: f64,
    /// Exact failure probability at `p`.
    pub exact_rate: f64,
    /// Failing-pattern count per weight, `0..=Q`.
    pub failing_counts: Vec<u64>,
    /// Smallest weight defeating this decoder, if `<= searched_up_to`.
    pub decoder_min_weight: Option<usize>,
    /// Canonical witness for `decoder_min_weight`, as qubit ids.
    pub decoder_witness: Option<Vec<usize>>,
    /// Smallest weight defeating any decoder, if `<= searched_up_to`.
    pub optimal_min_weight: Option<usize>,
    /// Weight cap used for the two minimum-weight searches.
    pub searched_up_to: usize,
}

/// Report schema identifier.
pub const ORACLE_SCHEMA: &str = "oracle-report/1";

/// Runs the full small-lattice ground truth: exact enumeration plus
/// both minimum-weight searches, with the cross-checks between them.
pub fn oracle_report(
    geom: &CodeGeometry,
    p: f64,
    config: &DecoderConfig,
    w_max: usize,
) -> Result<OracleReport> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    let counts = exact_failure_counts(geom, config)?;
    let exact_rate = failure_rate_from_counts(&counts, geom.num_qubits(), p);
    let min_weight = min_weight_failure(geom, config, w_max)?;
    let optimal = ml_min_weight(geom, w_max)?;
    // The enumeration and the lexicographic search must agree on the
    // smallest failing weight wherever both looked.
    let smallest_from_counts = counts.iter().position(|&c| c > 0);
    let consistent = match (smallest_from_counts, &min_weight) {
        (Some(w), Some((found, _))) => *found == w,
        (Some(w), None) => w > w_max,
        (None, None) => true,
        (None, Some(_)) => false,
    };
    if !consistent {
        return Err(Error::Internal(
            "minimum-weight search disagrees with exhaustive enumeration",
        ));
    }
    if let (Some((decoder_w, _)), Some(optimal_w)) = (&min_weight, optimal) {
        if *decoder_w > optimal_w {
            return Err(Error::Internal(
                "decoder minimum failing weight exceeds the optimal-decoder bound",
            ));
        }
    }
    let (decoder_min_weight, decoder_witness) = match min_weight {
        Some((w, pattern)) => (Some(w), Some(pattern.qubit_ids())),
        None => (None, None),
    };
    Ok(OracleReport {
        schema: ORACLE_SCHEMA.to_string(),
        l: geom.l(),
        variant: config.metric,
        p,
        exact_rate,
        failing_counts: counts,
        decoder_min_weight,
        decoder_witness,
        optimal_min_weight: optimal,
        searched_up_to: w_max,
    })
}
