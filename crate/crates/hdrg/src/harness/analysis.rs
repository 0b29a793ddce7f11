//! Derived analyses over estimation records: threshold location,
//! break-even lattice size, and the standard-vs-shortcut comparison.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoder::{decode, DecoderConfig};
use crate::geometry::{build_geometry, left_crossing_parity, syndrome_of, CodeGeometry};
use crate::harness::estimate::estimate_p;
use crate::harness::record::{wilson_interval, EstimateRecord, WILSON_Z};
use crate::noise::{NoiseModel, RandomStream};
use crate::{Error, Result};

/// One crossing of adjacent-size failure-rate curves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    /// Smaller lattice of the pair.
    pub l_low: usize,
    /// Larger lattice of the pair.
    pub l_high: usize,
    /// Error rate where the two curves cross.
    pub p: f64,
}

/// Threshold estimate assembled from all pairwise curve crossings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    /// Median of the crossing locations.
    pub median: f64,
    /// Smallest crossing found.
    pub lo: f64,
    /// Largest crossing found.
    pub hi: f64,
    /// Every crossing, by lattice pair.
    pub crossings: Vec<Crossing>,
}

/// Locates the error threshold from a grid of records over lattice
/// sizes and error rates.
///
/// Below threshold the failure rate falls with lattice size; above it,
/// it grows. For each adjacent pair of sizes the scan follows
/// `ln P(L_high) - ln P(L_low)` along the error-rate axis and records a
/// crossing wherever the difference changes sign (linearly interpolated
/// in the rate) or touches zero. The estimate is the median crossing,
/// with the full spread retained.
///
/// Records may carry iid `p` or correlated `p_prime` as the scanned
/// axis. Grid points where either curve has a zero rate carry no
/// log-difference and are skipped.
pub fn threshold_scan(records: &[EstimateRecord]) -> Result<ThresholdEstimate> {
    // curves[l] = sorted (rate-parameter bits, failure rate)
    let mut curves: std::collections::BTreeMap<usize, std::collections::BTreeMap<u64, f64>> =
        std::collections::BTreeMap::new();
    for r in records {
        let x = r.p.or(r.p_prime).ok_or_else(|| {
            Error::InvalidSpec("threshold records carry no error-rate parameter".into())
        })?;
        curves.entry(r.l).or_default().insert(x.to_bits(), r.rate);
    }
    if curves.len() < 2 {
        return Err(Error::InvalidSpec(
            "threshold scan needs at least two lattice sizes".into(),
        ));
    }
    let sizes: Vec<usize> = curves.keys().copied().collect();
    let mut crossings = Vec::new();
    for pair in sizes.windows(2) {
        let (l_low, l_high) = (pair[0], pair[1]);
        let low = &curves[&l_low];
        let high = &curves[&l_high];
        // Shared error-rate axis, in increasing order, log-transformable
        // on both curves.
        let axis: Vec<(f64, f64)> = low
            .iter()
            .filter_map(|(&bits, &p_low)| {
                let p_high = *high.get(&bits)?;
                if p_low > 0.0 && p_high > 0.0 {
                    Some((f64::from_bits(bits), (p_high.ln() - p_low.ln())))
                } else {
                    None
                }
            })
            .collect();
        if axis.len() < 3 {
            return Err(Error::InvalidSpec(format!(
                "threshold scan needs at least three usable error rates shared \
                 by L={l_low} and L={l_high}"
            )));
        }
        for window in axis.windows(2) {
            let ((x0, d0), (x1, d1)) = (window[0], window[1]);
            if d0 == 0.0 {
                crossings.push(Crossing {
                    l_low,
                    l_high,
                    p: x0,
                });
            } else if d0.signum() != d1.signum() && d1 != 0.0 {
                crossings.push(Crossing {
                    l_low,
                    l_high,
                    p: x0 + (x1 - x0) * (-d0) / (d1 - d0),
                });
            }
        }
        if let Some(&(x_last, d_last)) = axis.last() {
            if d_last == 0.0 {
                crossings.push(Crossing {
                    l_low,
                    l_high,
                    p: x_last,
                });
            }
        }
    }
    if crossings.is_empty() {
        return Err(Error::NoCrossing);
    }
    let mut locations: Vec<f64> = crossings.iter().map(|c| c.p).collect();
    locations.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite crossings"));
    let median = if locations.len() % 2 == 1 {
        locations[locations.len() / 2]
    } else {
        let mid = locations.len() / 2;
        0.5 * (locations[mid - 1] + locations[mid])
    };
    Ok(ThresholdEstimate {
        median,
        lo: locations[0],
        hi: *locations.last().expect("nonempty"),
        crossings,
    })
}

/// Result of a break-even lattice search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LStarResult {
    /// Smallest lattice whose failure rate beats break-even, if any in
    /// range.
    pub l_star: Option<usize>,
    /// The break-even rate the estimates were compared against.
    pub break_even: f64,
    /// Every point estimated during the search, smallest lattice first.
    pub records: Vec<EstimateRecord>,
}

/// Finds the smallest lattice size in `l_min..=l_max` whose *point
/// estimate* of the failure rate drops below the break-even rate of a
/// single unencoded spin under the same model (flip probability `p` for
/// iid noise, primary probability `p'` for correlated noise — a lone
/// spin has no neighbour to recruit from).
///
/// The search estimates sizes in increasing order, stops at the first
/// win, and returns all examined records so stricter interval-based
/// rules can be applied afterwards. Lattice `l` draws from
/// `stream.child(l)`.
pub fn find_l_star(
    l_min: usize,
    l_max: usize,
    model: &NoiseModel,
    config: &DecoderConfig,
    target_failures: u64,
    cap: u64,
    stream: &RandomStream,
) -> Result<LStarResult> {
    model.validate()?;
    if l_min < 2 || l_min > l_max {
        return Err(Error::InvalidSpec(
            "break-even search needs 2 <= l_min <= l_max".into(),
        ));
    }
    let break_even = model.break_even_rate();
    let mut records = Vec::new();
    let mut l_star = None;
    for l in l_min..=l_max {
        let geom = build_geometry(l)?;
        let record = estimate_p(
            &geom,
            model,
            config,
            target_failures,
            cap,
            &stream.child(l as u64),
        )?;
        let won = record.rate < break_even;
        records.push(record);
        if won {
            l_star = Some(l);
            break;
        }
    }
    Ok(LStarResult {
        l_star,
        break_even,
        records,
    })
}

/// One lattice's paired standard-vs-shortcut comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRecord {
    /// Lattice size.
    pub l: usize,
    /// Number of paired samples (each decoded by both variants).
    pub samples: u64,
    /// Failures of the standard metric.
    pub standard_failures: u64,
    /// Failures of the shortcut metric.
    pub shortcut_failures: u64,
    /// Standard-metric failure rate.
    pub standard_rate: f64,
    /// Shortcut-metric failure rate.
    pub shortcut_rate: f64,
    /// Rate ratio standard/shortcut; absent when the denominator saw no
    /// failures.
    pub ratio: Option<f64>,
    /// Lower 95% bound on the ratio. For a zero denominator this is the
    /// conservative bound from the denominator's Wilson upper limit.
    pub ratio_lo: Option<f64>,
    /// Upper 95% bound on the ratio; absent for a zero denominator.
    pub ratio_hi: Option<f64>,
    /// True when the sample cap cut the run short of the failure target.
    pub capped: bool,
    /// True when a zero failure count forced bound-only reporting.
    pub flagged: bool,
    /// Fingerprint of the random stream for this lattice.
    pub seed: u64,
}

/// Runs paired trials of two decoder configurations on identical errors
/// until both have at least `target_failures` failures or `cap` samples.
pub(crate) fn paired_counts(
    geom: &CodeGeometry,
    model: &NoiseModel,
    config_a: &DecoderConfig,
    config_b: &DecoderConfig,
    target_failures: u64,
    cap: u64,
    stream: &RandomStream,
) -> Result<(u64, u64, u64, bool)> {
    const CHUNK_START: u64 = 256;
    const CHUNK_MAX: u64 = 65536;
    let mut samples = 0u64;
    let mut fails_a = 0u64;
    let mut fails_b = 0u64;
    let mut chunk = CHUNK_START;
    'outer: while fails_a.min(fails_b) < target_failures && samples < cap {
        let size = chunk.min(cap - samples);
        let outcomes: Vec<Result<(bool, bool)>> = (samples..samples + size)
            .into_par_iter()
            .map(|t| {
                let mut rng = stream.child(t).rng();
                let error = model.sample(geom, &mut rng);
                let syndrome = syndrome_of(geom, &error);
                let error_parity = left_crossing_parity(geom, &error);
                let a = decode(geom, &syndrome, config_a)?;
                let b = decode(geom, &syndrome, config_b)?;
                Ok((
                    error_parity != left_crossing_parity(geom, &a.correction),
                    error_parity != left_crossing_parity(geom, &b.correction),
                ))
            })
            .collect();
        for outcome in outcomes {
            let (a, b) = outcome?;
            samples += 1;
            fails_a += a as u64;
            fails_b += b as u64;
            if fails_a.min(fails_b) >= target_failures {
                break 'outer;
            }
        }
        chunk = (chunk * 2).min(CHUNK_MAX);
    }
    Ok((
        samples,
        fails_a,
        fails_b,
        fails_a.min(fails_b) < target_failures,
    ))
}

/// Compares the two decoder metrics on identical noise at each lattice
/// size, returning per-size failure-rate ratios with 95% intervals.
///
/// Pairing each sampled error through both decoders removes the shared
/// sampling noise from the ratio. Sampling stops once the *rarer*
/// variant has `target_failures` failures (or at `cap`). The interval
/// is the standard log-ratio (Katz) construction; a denominator with
/// zero failures yields a flagged record with only a conservative lower
/// bound, computed from the denominator's Wilson upper limit. Lattice
/// `l` draws from `stream.child(l)`.
pub fn compare_variants(
    l_values: &[usize],
    model: &NoiseModel,
    target_failures: u64,
    cap: u64,
    stream: &RandomStream,
) -> Result<Vec<RatioRecord>> {
    model.validate()?;
    if target_failures == 0 || cap == 0 {
        return Err(Error::InvalidSpec(
            "comparison needs a positive failure target and sample cap".into(),
        ));
    }
    let mut out = Vec::with_capacity(l_values.len());
    for &l in l_values {
        let geom = build_geometry(l)?;
        let child = stream.child(l as u64);
        let (samples, std_f, short_f, capped) = paired_counts(
            &geom,
            model,
            &DecoderConfig::standard(),
            &DecoderConfig::shortcut(),
            target_failures,
            cap,
            &child,
        )?;
        let n = samples as f64;
        let (ratio, ratio_lo, ratio_hi, flagged) = if std_f > 0 && short_f > 0 {
            let ratio = std_f as f64 / short_f as f64;
            // Log-ratio variance for paired binomial counts.
            let var = (1.0 / std_f as f64 - 1.0 / n) + (1.0 / short_f as f64 - 1.0 / n);
            let half = WILSON_Z * var.max(0.0).sqrt();
            (
                Some(ratio),
                Some(ratio * (-half).exp()),
                Some(ratio * half.exp()),
                false,
            )
        } else if short_f == 0 && std_f > 0 {
            // Denominator never failed: bound it by its Wilson upper
            // limit to lower-bound the ratio.
            let denominator_upper = wilson_interval(0, samples).1;
            (
                None,
                Some((std_f as f64 / n) / denominator_upper),
                None,
                true,
            )
        } else {
            (None, None, None, true)
        };
        out.push(RatioRecord {
            l,
            samples,
            standard_failures: std_f,
            shortcut_failures: short_f,
            standard_rate: std_f as f64 / n,
            shortcut_rate: short_f as f64 / n,
            ratio,
            ratio_lo,
            ratio_hi,
            capped,
            flagged,
            seed: child.fingerprint(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::Metric;
    use crate::harness::record::RECORD_SCHEMA;
    use crate::noise::derive_stream;

    fn record(l: usize, p: f64, rate: f64) -> EstimateRecord {
        EstimateRecord {
            schema: RECORD_SCHEMA.to_string(),
            l,
            p: Some(p),
            p_prime: None,
            q: None,
            variant: Metric::Standard,
            samples: 1000,
            failures: (rate * 1000.0) as u64,
            rate,
            ci_lo: rate * 0.9,
            ci_hi: (rate * 1.1).min(1.0),
            capped: false,
            seed: 0,
            wall_time_s: None,
        }
    }

    /// Records whose log-rate curves are straight lines crossing at
    /// exactly `p_c`, steeper for larger lattices.
    fn synthetic_grid(sizes: &[usize], ps: &[f64], p_c: f64) -> Vec<EstimateRecord> {
        let mut out = Vec::new();
        for &l in sizes {
            for &p in ps {
                let ln_rate = -2.0 + (l as f64) * (p - p_c);
                out.push(record(l, p, ln_rate.exp()));
            }
        }
        out
    }

    #[test]
    fn test_threshold_scan_finds_constructed_crossing() {
        let records = synthetic_grid(&[8, 16, 24], &[0.05, 0.06, 0.07, 0.08, 0.09], 0.07);
        let estimate = threshold_scan(&records).unwrap();
        assert!((estimate.median - 0.07).abs() < 1e-12);
        assert!((estimate.lo - 0.07).abs() < 1e-12);
        assert!((estimate.hi - 0.07).abs() < 1e-12);
        assert_eq!(estimate.crossings.len(), 2); // (8,16) and (16,24)
    }

    #[test]
    fn test_threshold_scan_interpolates_between_grid_points() {
        // Crossing at 0.0725 sits strictly between the 0.07 and 0.08
        // grid lines.
        let records = synthetic_grid(&[8, 16], &[0.06, 0.07, 0.08, 0.09], 0.0725);
        let estimate = threshold_scan(&records).unwrap();
        assert!((estimate.median - 0.0725).abs() < 1e-12);
    }

    #[test]
    fn test_threshold_scan_reports_spread_across_pairs() {
        // Two lattice pairs with slightly different crossing points.
        let mut records = synthetic_grid(&[8, 16], &[0.05, 0.07, 0.09], 0.068);
        records.extend(synthetic_grid(&[16, 24], &[0.05, 0.07, 0.09], 0.072).into_iter().filter(|r| r.l == 24));
        // The 16-curve from the first grid pairs with the 24-curve of
        // the second; its crossing with 24 differs from 0.068.
        let estimate = threshold_scan(&records).unwrap();
        assert!(estimate.lo <= estimate.median && estimate.median <= estimate.hi);
        assert!(estimate.hi > estimate.lo);
    }

    #[test]
    fn test_threshold_scan_errors_without_crossing() {
        // Curves ordered the same way everywhere: no threshold in range.
        let records = synthetic_grid(&[8, 16], &[0.01, 0.02, 0.03], 0.07);
        assert!(matches!(threshold_scan(&records), Err(Error::NoCrossing)));
    }

    #[test]
    fn test_threshold_scan_validates_grid_shape() {
        let records = synthetic_grid(&[8], &[0.05, 0.06, 0.07], 0.06);
        assert!(matches!(
            threshold_scan(&records),
            Err(Error::InvalidSpec(_))
        ));
        let sparse = synthetic_grid(&[8, 16], &[0.05, 0.06], 0.055);
        assert!(matches!(threshold_scan(&sparse), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn test_l_star_search_small_lattices() {
        // At p = 0.03, far below threshold, a small lattice already
        // beats the unencoded break-even rate.
        let result = find_l_star(
            2,
            6,
            &NoiseModel::Iid { p: 0.03 },
            &DecoderConfig::standard(),
            60,
            200_000,
            &derive_stream(41, &[]),
        )
        .unwrap();
        let l_star = result.l_star.expect("break-even within range");
        assert!((3..=5).contains(&l_star), "l_star = {l_star}");
        assert_eq!(result.break_even, 0.03);
        // The search stops at the first win and keeps every record.
        assert_eq!(result.records.len(), l_star - 1);
        assert!(result.records.last().unwrap().rate < 0.03);
    }

    #[test]
    fn test_l_star_absent_above_threshold() {
        // Above threshold the failure rate only grows with size; the
        // unencoded spin is never beaten.
        let result = find_l_star(
            2,
            6,
            &NoiseModel::Iid { p: 0.12 },
            &DecoderConfig::standard(),
            60,
            50_000,
            &derive_stream(43, &[]),
        )
        .unwrap();
        assert_eq!(result.l_star, None);
        assert_eq!(result.records.len(), 5);
    }

    #[test]
    fn test_paired_identical_configs_give_ratio_one() {
        let geom = build_geometry(5).unwrap();
        let config = DecoderConfig::standard();
        let (samples, a, b, capped) = paired_counts(
            &geom,
            &NoiseModel::Iid { p: 0.08 },
            &config,
            &config,
            40,
            100_000,
            &derive_stream(47, &[]),
        )
        .unwrap();
        assert!(!capped);
        assert_eq!(a, b, "identical configs must fail identically");
        assert_eq!(a, 40);
        assert!(samples > 40);
    }

    #[test]
    fn test_compare_variants_shapes_and_bounds() {
        let records = compare_variants(
            &[4, 6],
            &NoiseModel::Iid { p: 0.06 },
            30,
            200_000,
            &derive_stream(53, &[]),
        )
        .unwrap();
        assert_eq!(records.len(), 2);
        for r in &records {
            assert!(!r.capped);
            assert!(r.standard_failures >= 30 && r.shortcut_failures >= 30);
            let ratio = r.ratio.expect("both sides saw failures");
            assert!((ratio - r.standard_rate / r.shortcut_rate).abs() < 1e-12);
            assert!(r.ratio_lo.unwrap() <= ratio && ratio <= r.ratio_hi.unwrap());
            assert!(!r.flagged);
        }
    }

    #[test]
    fn test_compare_flags_zero_denominator() {
        // p = 0 produces no failures on either side; the record must be
        // flagged with no ratio at all.
        let records = compare_variants(
            &[3],
            &NoiseModel::Iid { p: 0.0 },
            5,
            300,
            &derive_stream(59, &[]),
        )
        .unwrap();
        assert_eq!(records.len(), 1);
        let r = &records[0];
        assert!(r.capped && r.flagged);
        assert_eq!(r.ratio, None);
        assert_eq!(r.ratio_lo, None);
    }
}
