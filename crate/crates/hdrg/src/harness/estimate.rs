//! Failure-rate estimation: direct Monte Carlo with negative-binomial
//! stopping, and weight-stratified rare-event estimation.
//!
//! The direct estimator samples until a target number of logical
//! failures has occurred (or a sample cap is hit), so relative accuracy
//! is uniform across parameter points regardless of how rare failures
//! are. Trials run in parallel chunks, but the stopping point is decided
//! by a serial scan over each chunk's outcomes in trial order — the
//! recorded sample count is therefore *exactly* the trial index at which
//! the target was reached, independent of thread count and scheduling.
//!
//! The stratified estimator rewrites the iid failure rate as
//! `P = sum_w Binom(Q, w, p) * rho_w`, where `rho_w` is the failure
//! fraction among weight-`w` patterns. Small strata are enumerated
//! exhaustively (their contribution is exact); large ones are sampled
//! uniformly. Because `rho_w` barely depends on `p`, modest per-stratum
//! budgets resolve rates far below anything direct sampling could reach.

use std::time::Instant;

use rayon::prelude::*;

use crate::decoder::{decode, DecoderConfig};
use crate::geometry::{left_crossing_parity, syndrome_of, CodeGeometry, ErrorPattern};
use crate::harness::record::{wilson_interval, EstimateRecord, RECORD_SCHEMA, WILSON_Z};
use crate::noise::{NoiseModel, RandomStream};
use crate::oracle::next_combination;
use crate::{Error, Result};

/// First parallel chunk size; chunks double up to [`CHUNK_MAX`] so short
/// runs stay cheap and long runs amortize scheduling overhead.
const CHUNK_START: u64 = 256;
const CHUNK_MAX: u64 = 65536;

/// Whether decoding `error` produces a logical failure.
///
/// Equivalent to forming the residual `error XOR correction` and testing
/// its homology class, via the parity identity for the left-boundary cut.
pub(crate) fn logical_failure_of(
    geom: &CodeGeometry,
    config: &DecoderConfig,
    error: &ErrorPattern,
) -> Result<bool> {
    let result = decode(geom, &syndrome_of(geom, error), config)?;
    Ok(left_crossing_parity(geom, error) != left_crossing_parity(geom, &result.correction))
}

/// Runs `trial(0), trial(1), ...` until `target_failures` failures have
/// occurred or `cap` trials have run. Returns `(samples, failures,
/// capped)` with the exact stopping sample count.
pub(crate) fn run_counting<F>(target_failures: u64, cap: u64, trial: F) -> Result<(u64, u64, bool)>
where
    F: Fn(u64) -> Result<bool> + Sync,
{
    let mut samples = 0u64;
    let mut failures = 0u64;
    let mut chunk = CHUNK_START;
    'outer: while failures < target_failures && samples < cap {
        let size = chunk.min(cap - samples);
        let outcomes: Vec<Result<bool>> =
            (samples..samples + size).into_par_iter().map(&trial).collect();
        for outcome in outcomes {
            samples += 1;
            if outcome? {
                failures += 1;
                if failures == target_failures {
                    break 'outer;
                }
            }
        }
        chunk = (chunk * 2).min(CHUNK_MAX);
    }
    Ok((samples, failures, failures < target_failures))
}

/// Estimates one parameter point with caller-supplied per-trial streams;
/// shared by [`estimate_p`] and the sweep runner.
pub(crate) fn estimate_noise_point<S>(
    geom: &CodeGeometry,
    model: &NoiseModel,
    config: &DecoderConfig,
    target_failures: u64,
    cap: u64,
    trial_stream: &S,
    seed: u64,
) -> Result<EstimateRecord>
where
    S: Fn(u64) -> RandomStream + Sync,
{
    model.validate()?;
    if target_failures == 0 {
        return Err(Error::InvalidSpec(
            "target failure count must be at least 1".into(),
        ));
    }
    if cap == 0 {
        return Err(Error::InvalidSpec("sample cap must be positive".into()));
    }
    let start = Instant::now();
    let (samples, failures, capped) = run_counting(target_failures, cap, |t| {
        let mut rng = trial_stream(t).rng();
        let error = model.sample(geom, &mut rng);
        logical_failure_of(geom, config, &error)
    })?;
    let rate = failures as f64 / samples as f64;
    let (ci_lo, ci_hi) = wilson_interval(failures, samples);
    let (p, p_prime, q) = match *model {
        NoiseModel::Iid { p } => (Some(p), None, None),
        NoiseModel::Correlated { p_prime, q } => (None, Some(p_prime), Some(q)),
    };
    Ok(EstimateRecord {
        schema: RECORD_SCHEMA.to_string(),
        l: geom.l(),
        p,
        p_prime,
        q,
        variant: config.metric,
        samples,
        failures,
        rate,
        ci_lo,
        ci_hi,
        capped,
        seed,
        wall_time_s: Some(start.elapsed().as_secs_f64()),
    })
}

/// Estimates the logical failure rate by direct Monte Carlo, sampling
/// until `target_failures` failures or `cap` samples.
///
/// Trial `t` draws its error from `stream.child(t)`, making the result
/// a pure function of the stream key. If the cap is reached first, the
/// record is flagged `capped` and carries a one-sided interval (the
/// Wilson interval at zero failures has a zero lower end).
pub fn estimate_p(
    geom: &CodeGeometry,
    model: &NoiseModel,
    config: &DecoderConfig,
    target_failures: u64,
    cap: u64,
    stream: &RandomStream,
) -> Result<EstimateRecord> {
    estimate_noise_point(
        geom,
        model,
        config,
        target_failures,
        cap,
        &|t| stream.child(t),
        stream.fingerprint(),
    )
}

/// `C(n, k)` with saturation, used only to decide whether a stratum is
/// small enough to enumerate exhaustively.
fn comb_saturating(n: usize, k: usize) -> u128 {
    let k = k.min(n - k.min(n));
    let mut c: u128 = 1;
    for i in 0..k {
        c = match c.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    c
}

/// Draws a uniform `k`-subset of `0..n` by Floyd's algorithm into `out`.
fn sample_subset(rng: &mut impl rand::Rng, n: usize, k: usize, out: &mut Vec<usize>) {
    out.clear();
    for j in (n - k)..n {
        let t = rng.random_range(0..=j);
        if out.contains(&t) {
            out.push(j);
        } else {
            out.push(t);
        }
    }
}

/// Estimates the iid logical failure rate by weight stratification.
///
/// `P = sum_w Binom(Q, w, p) * rho_w`. Weights are scanned up to the
/// smallest cutoff whose remaining binomial tail is below `delta`; the
/// tail mass is added to the upper interval end rather than estimated.
/// A stratum with `C(Q, w) <= budget` patterns is enumerated
/// exhaustively and contributes exactly; otherwise `budget` uniform
/// weight-`w` patterns are decoded (stratum `w` draws from
/// `stream.child(w)`), contributing a Gaussian variance term — except
/// when no failure is seen, in which case the stratum's Wilson upper
/// bound is added to the upper interval end instead.
///
/// The record's `rate` is the stratified combination; `samples` and
/// `failures` count raw decodes for bookkeeping and do **not** satisfy
/// `rate = failures / samples`.
///
/// Correlated noise has no weight decomposition here; passing it fails
/// with [`Error::UnsupportedModel`].
pub fn estimate_p_stratified(
    geom: &CodeGeometry,
    model: &NoiseModel,
    config: &DecoderConfig,
    budget: u64,
    delta: f64,
    stream: &RandomStream,
) -> Result<EstimateRecord> {
    let p = match *model {
        NoiseModel::Iid { p } => p,
        NoiseModel::Correlated { .. } => return Err(Error::UnsupportedModel),
    };
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    if budget == 0 {
        return Err(Error::InvalidSpec("stratum budget must be positive".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidSpec(
            "tail tolerance must lie strictly between 0 and 1".into(),
        ));
    }
    let start = Instant::now();
    let q_n = geom.num_qubits();
    // Binomial weights by upward recurrence; exactly p = 1 would poison
    // the recurrence with 0 * inf, so it gets the degenerate pmf.
    let mut pmf = vec![0.0f64; q_n + 1];
    if p == 1.0 {
        pmf[q_n] = 1.0;
    } else {
        pmf[0] = (1.0 - p).powi(q_n as i32);
        for w in 0..q_n {
            pmf[w + 1] = pmf[w] * ((q_n - w) as f64 / (w + 1) as f64) * (p / (1.0 - p));
        }
    }
    let mut cutoff = q_n;
    let mut cumulative = 0.0f64;
    for (w, &mass) in pmf.iter().enumerate() {
        cumulative += mass;
        if cumulative >= 1.0 - delta {
            cutoff = w;
            break;
        }
    }
    let tail = (1.0 - pmf[..=cutoff].iter().sum::<f64>()).max(0.0);

    let mut rate = 0.0f64;
    let mut variance = 0.0f64;
    let mut zero_stratum_upper = 0.0f64;
    let mut samples = 0u64;
    let mut failures = 0u64;
    for (w, &mass) in pmf.iter().enumerate().take(cutoff + 1) {
        if mass == 0.0 {
            continue;
        }
        if comb_saturating(q_n, w) <= budget as u128 {
            // Exhaustive stratum: exact failure fraction, no variance.
            let mut total = 0u64;
            let mut failed = 0u64;
            if w == 0 {
                total = 1;
                // The empty pattern decodes to nothing; never a failure.
            } else {
                let mut idx: Vec<usize> = (0..w).collect();
                loop {
                    let pattern = ErrorPattern::from_qubit_ids(q_n, &idx)?;
                    total += 1;
                    if logical_failure_of(geom, config, &pattern)? {
                        failed += 1;
                    }
                    if !next_combination(&mut idx, q_n) {
                        break;
                    }
                }
            }
            rate += mass * failed as f64 / total as f64;
            samples += total;
            failures += failed;
        } else {
            let stratum = stream.child(w as u64);
            let outcomes: Vec<Result<bool>> = (0..budget)
                .into_par_iter()
                .map(|i| {
                    let mut rng = stratum.child(i).rng();
                    let mut ids = Vec::with_capacity(w);
                    sample_subset(&mut rng, q_n, w, &mut ids);
                    let pattern = ErrorPattern::from_qubit_ids(q_n, &ids)?;
                    logical_failure_of(geom, config, &pattern)
                })
                .collect();
            let mut failed = 0u64;
            for outcome in outcomes {
                if outcome? {
                    failed += 1;
                }
            }
            let fraction = failed as f64 / budget as f64;
            rate += mass * fraction;
            samples += budget;
            failures += failed;
            if failed == 0 {
                zero_stratum_upper += mass * wilson_interval(0, budget).1;
            } else {
                variance += mass * mass * fraction * (1.0 - fraction) / budget as f64;
            }
        }
    }
    let sigma = variance.sqrt();
    let ci_lo = (rate - WILSON_Z * sigma).max(0.0);
    let ci_hi = (rate + WILSON_Z * sigma + zero_stratum_upper + tail).min(1.0);
    Ok(EstimateRecord {
        schema: RECORD_SCHEMA.to_string(),
        l: geom.l(),
        p: Some(p),
        p_prime: None,
        q: None,
        variant: config.metric,
        samples,
        failures,
        rate,
        ci_lo,
        ci_hi,
        capped: false,
        seed: stream.fingerprint(),
        wall_time_s: Some(start.elapsed().as_secs_f64()),
    })
}
