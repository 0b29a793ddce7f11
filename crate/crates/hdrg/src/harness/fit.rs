//! Scaling fits for sub-threshold failure rates.
//!
//! Below threshold the failure rate follows a stretched exponential
//! `P ~ exp(-alpha(p) * (c L)^beta)`. Two least-squares fits extract its
//! parameters from estimation records at a fixed error rate:
//!
//! * [`fit_beta`] — the stretch exponent, from the slope of
//!   `ln(-ln P)` against `ln L`. The self-similar cluster hierarchy
//!   predicts `beta = log_3 2 ~ 0.63`, not the naive `beta = 1`.
//! * [`fit_alpha`] — the decay coefficient at fixed `beta`, from the
//!   slope of `ln P` against `(c L)^beta`, with a free intercept since
//!   the prefactor is unspecified.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::harness::record::EstimateRecord;
use crate::noise::RandomStream;
use crate::{Error, Result};

/// The cluster-hierarchy prediction for the stretch exponent,
/// `log_3 2`.
pub const DEFAULT_BETA: f64 = 0.630_929_753_571_457_4;

/// Conservative rescaling constant `c` relating lattice size to the
/// failure-forcing cluster extent.
pub const DEFAULT_C: f64 = 0.25;

/// Result of a stretch-exponent fit at one error rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaFit {
    /// Error rate shared by the fitted records.
    pub p: f64,
    /// Fitted stretch exponent (slope of `ln(-ln P)` vs `ln L`).
    pub beta: f64,
    /// Fitted intercept in the transformed coordinates.
    pub intercept: f64,
    /// Coefficient of determination of the linear fit.
    pub r_squared: f64,
    /// Number of (L, P) points entering the fit.
    pub points: usize,
}

/// Result of a decay-coefficient fit at one error rate and fixed
/// exponent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaFit {
    /// Error rate shared by the fitted records.
    pub p: f64,
    /// Fitted decay coefficient (negated slope of `ln P` vs `(cL)^beta`).
    pub alpha: f64,
    /// Fitted free intercept.
    pub intercept: f64,
    /// Coefficient of determination of the linear fit.
    pub r_squared: f64,
    /// Stretch exponent held fixed during the fit.
    pub beta: f64,
    /// Rescaling constant held fixed during the fit.
    pub c: f64,
    /// Number of (L, P) points entering the fit.
    pub points: usize,
}

/// Ordinary least squares on `(x, y)` pairs: `(slope, intercept, r2)`.
/// `None` when all `x` coincide (no slope is identifiable).
fn ols(points: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = points.iter().map(|(_, y)| y).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|(x, _)| (x - mean_x) * (x - mean_x)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points
        .iter()
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = points
        .iter()
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    let ss_tot: f64 = points.iter().map(|(_, y)| (y - mean_y) * (y - mean_y)).sum();
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Some((slope, intercept, r_squared))
}

/// Checks the records share one error rate and transformable rates;
/// returns that rate and `(L, P)` pairs sorted by `L`.
fn fit_points(records: &[EstimateRecord], needed: usize) -> Result<(f64, Vec<(usize, f64)>)> {
    if records.len() < needed {
        return Err(Error::TooFewPoints {
            needed,
            got: records.len(),
        });
    }
    let rate_of = |r: &EstimateRecord| r.p.or(r.p_prime);
    let p = rate_of(&records[0]).ok_or_else(|| {
        Error::InvalidSpec("fit records carry no error-rate parameter".into())
    })?;
    for r in records {
        if rate_of(r).map(f64::to_bits) != Some(p.to_bits()) {
            return Err(Error::InvalidSpec(
                "fit records must share a single error rate".into(),
            ));
        }
        if !(r.rate > 0.0 && r.rate < 1.0) {
            return Err(Error::UnfittablePoint {
                l: r.l as f64,
                rate: r.rate,
            });
        }
    }
    let mut points: Vec<(usize, f64)> = records.iter().map(|r| (r.l, r.rate)).collect();
    points.sort_unstable_by_key(|&(l, _)| l);
    Ok((p, points))
}

/// Fits the stretch exponent from at least three records at one error
/// rate: least squares of `ln(-ln P)` against `ln L`.
///
/// Rates of exactly 0 or 1 cannot be transformed and fail with
/// [`Error::UnfittablePoint`].
pub fn fit_beta(records: &[EstimateRecord]) -> Result<BetaFit> {
    let (p, points) = fit_points(records, 3)?;
    let xy: Vec<(f64, f64)> = points
        .iter()
        .map(|&(l, rate)| ((l as f64).ln(), (-rate.ln()).ln()))
        .collect();
    let (beta, intercept, r_squared) = ols(&xy).ok_or_else(|| {
        Error::InvalidSpec("stretch-exponent fit needs at least two distinct L".into())
    })?;
    Ok(BetaFit {
        p,
        beta,
        intercept,
        r_squared,
        points: records.len(),
    })
}

/// Fits the decay coefficient at fixed exponent `beta` and rescaling
/// `c`: least squares of `ln P` against `(c L)^beta`, `alpha` being the
/// negated slope. The intercept is free because the stretched
/// exponential carries an unspecified prefactor.
pub fn fit_alpha(records: &[EstimateRecord], beta: f64, c: f64) -> Result<AlphaFit> {
    let (p, points) = fit_points(records, 2)?;
    let xy: Vec<(f64, f64)> = points
        .iter()
        .map(|&(l, rate)| ((c * l as f64).powf(beta), rate.ln()))
        .collect();
    let (slope, intercept, r_squared) = ols(&xy).ok_or_else(|| {
        Error::InvalidSpec("decay-coefficient fit needs at least two distinct L".into())
    })?;
    Ok(AlphaFit {
        p,
        alpha: -slope,
        intercept,
        r_squared,
        beta,
        c,
        points: records.len(),
    })
}

/// Parametric bootstrap interval for the decay coefficient.
///
/// Each replicate redraws every record's failure count from a normal
/// approximation of its sampling distribution, refits, and the 2.5th
/// and 97.5th percentiles of the replicated coefficients are returned.
pub fn bootstrap_alpha(
    records: &[EstimateRecord],
    beta: f64,
    c: f64,
    replicates: usize,
    stream: &RandomStream,
) -> Result<(f64, f64)> {
    if replicates < 2 {
        return Err(Error::InvalidSpec(
            "bootstrap needs at least two replicates".into(),
        ));
    }
    // Validate once up front so every replicate starts from fittable data.
    fit_alpha(records, beta, c)?;
    let mut alphas = Vec::with_capacity(replicates);
    let mut rng = stream.rng();
    for _ in 0..replicates {
        let resampled: Vec<EstimateRecord> = records
            .iter()
            .map(|r| {
                let n = r.samples.max(1) as f64;
                let sigma = (r.rate * (1.0 - r.rate) / n).sqrt();
                // Box-Muller standard normal from two uniforms.
                let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
                let u2: f64 = rng.random_range(0.0..1.0);
                let z = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
                let mut out = r.clone();
                out.rate = (r.rate + z * sigma).clamp(0.5 / n, 1.0 - 0.5 / n);
                out
            })
            .collect();
        alphas.push(fit_alpha(&resampled, beta, c)?.alpha);
    }
    alphas.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite fit results"));
    let pick = |q: f64| alphas[((alphas.len() - 1) as f64 * q).round() as usize];
    Ok((pick(0.025), pick(0.975)))
}
