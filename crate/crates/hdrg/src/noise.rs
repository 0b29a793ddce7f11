//! Noise models, reproducible random streams and adversarial clusters.
//!
//! Three kinds of error pattern are produced here:
//!
//! * **Independent flips** ([`sample_iid`]) — every qubit flips with the
//!   same probability `p`.
//! * **Spatially correlated flips** ([`sample_correlated`]) — primary
//!   flips occur with probability `p'` per qubit, and each primary
//!   recruits, with probability `q`, one uniformly chosen qubit sharing
//!   a plaquette with it. The expected number of flips per qubit is
//!   `p' * (1 + q)`, but the flips now come in adjacent pairs, which
//!   changes how often they chain into long error strings.
//! * **Hierarchical clusters** ([`cantor_pattern`]) — deterministic
//!   rows of flips built by recursive doubling, with gaps tuned so a
//!   decoder whose node distances never change pairs its way outwards
//!   scale by scale and finally pushes the outermost defects into
//!   opposite boundaries: a logical error from only `2^level` flips.
//!   The construction checks itself by decoding its own output.
//!
//! Randomness is organised as a tree of [`RandomStream`]s keyed by
//! SHA-256: a master seed plus a context path (lattice index, parameter
//! index, trial index, ...) names a stream, and equal names give
//! bit-identical generators. Trials can therefore be distributed over
//! any number of threads, resumed, or re-run in isolation without
//! perturbing any other trial's randomness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::decoder::{decode, DecoderConfig};
use crate::geometry::{is_logical_failure, syndrome_of, CodeGeometry, ErrorPattern, Qubit};
use crate::{Error, Result};

/// A named, reproducible source of randomness.
///
/// A stream is a 32-byte key. The generator it yields
/// ([`RandomStream::rng`]) depends only on the key, and child streams
/// ([`RandomStream::child`]) are derived by hashing, so distinct indices
/// give statistically independent generators. Streams are cheap to copy
/// and hand out to worker threads.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomStream {
    key: [u8; 32],
}

/// Domain separators so a stream key can never collide with a child key.
const STREAM_DOMAIN: &[u8] = b"planar-hdrg/stream/v1";
const CHILD_DOMAIN: &[u8] = b"planar-hdrg/child/v1";

fn digest_to_key(hasher: Sha256) -> [u8; 32] {
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(digest.as_slice());
    key
}

/// Derives the stream named by a master seed and a context path.
///
/// The context is a sequence of indices (for example `[l_index,
/// p_index]`) that identifies one cell of a parameter sweep; trials
/// within the cell are then addressed with [`RandomStream::child`].
pub fn derive_stream(master_seed: u64, context: &[u64]) -> RandomStream {
    let mut hasher = Sha256::new();
    hasher.update(STREAM_DOMAIN);
    hasher.update(master_seed.to_le_bytes());
    for &part in context {
        hasher.update(part.to_le_bytes());
    }
    RandomStream {
        key: digest_to_key(hasher),
    }
}

impl RandomStream {
    /// Wraps an explicit 32-byte key.
    pub fn from_key(key: [u8; 32]) -> Self {
        RandomStream { key }
    }

    /// The stream's key.
    pub fn key(&self) -> &[u8; 32] {
        &self.key
    }

    /// A short identifier for the stream (the first eight key bytes),
    /// used to stamp result records with their randomness source.
    pub fn fingerprint(&self) -> u64 {
        u64::from_le_bytes(self.key[..8].try_into().expect("key has 32 bytes"))
    }

    /// The child stream at `index`, independent of every other child.
    pub fn child(&self, index: u64) -> RandomStream {
        let mut hasher = Sha256::new();
        hasher.update(CHILD_DOMAIN);
        hasher.update(self.key);
        hasher.update(index.to_le_bytes());
        RandomStream {
            key: digest_to_key(hasher),
        }
    }

    /// A fresh generator positioned at the start of the stream.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::from_seed(self.key)
    }
}

/// The stochastic error models.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum NoiseModel {
    /// Independent flips with probability `p` per qubit.
    Iid { p: f64 },
    /// Primary flips with probability `p_prime`; each recruits one
    /// plaquette-sharing neighbour with probability `q`.
    Correlated { p_prime: f64, q: f64 },
}

impl NoiseModel {
    /// Checks that all probabilities lie in `[0, 1]`.
    pub fn validate(&self) -> Result<()> {
        let check = |v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidProbability(v))
            }
        };
        match *self {
            NoiseModel::Iid { p } => check(p),
            NoiseModel::Correlated { p_prime, q } => {
                check(p_prime)?;
                check(q)
            }
        }
    }

    /// Mean number of flips per qubit (before cancellations): `p` for
    /// independent noise, `p' * (1 + q)` for correlated noise. Matching
    /// this quantity makes the two models comparable.
    pub fn effective_rate(&self) -> f64 {
        match *self {
            NoiseModel::Iid { p } => p,
            NoiseModel::Correlated { p_prime, q } => p_prime * (1.0 + q),
        }
    }

    /// Error rate of a single unencoded spin under this model: `p`, or
    /// `p'` for the correlated model (a lone spin has no neighbour to
    /// recruit from). Encoding breaks even once the logical failure
    /// rate drops below this.
    pub fn break_even_rate(&self) -> f64 {
        match *self {
            NoiseModel::Iid { p } => p,
            NoiseModel::Correlated { p_prime, .. } => p_prime,
        }
    }

    /// Draws one error pattern from this model.
    pub fn sample(&self, geom: &CodeGeometry, rng: &mut impl Rng) -> ErrorPattern {
        match *self {
            NoiseModel::Iid { p } => sample_iid(geom, p, rng),
            NoiseModel::Correlated { p_prime, q } => sample_correlated(geom, p_prime, q, rng),
        }
    }
}

/// Visits each index of `0..n` that an independent Bernoulli(`p`) draw
/// selects, skipping over the gaps geometrically so the cost scales
/// with the number of hits, not with `n`.
fn bernoulli_indices(n: usize, p: f64, rng: &mut impl Rng, mut visit: impl FnMut(usize)) {
    if p <= 0.0 || n == 0 {
        return;
    }
    if p >= 1.0 {
        for i in 0..n {
            visit(i);
        }
        return;
    }
    // If U is uniform on [0,1), floor(ln(1-U) / ln(1-p)) is the number
    // of misses before the next hit.
    let denom = (-p).ln_1p();
    let mut i = 0usize;
    while i < n {
        let u: f64 = rng.random();
        let gap = ((-u).ln_1p() / denom).floor();
        if gap >= (n - i) as f64 {
            break;
        }
        i += gap as usize;
        visit(i);
        i += 1;
    }
}

/// Samples independent bit-flip noise: every qubit flips with
/// probability `p`. Values outside `[0, 1]` are clamped.
pub fn sample_iid(geom: &CodeGeometry, p: f64, rng: &mut impl Rng) -> ErrorPattern {
    let mut pattern = geom.empty_pattern();
    bernoulli_indices(geom.num_qubits(), p, rng, |i| pattern.toggle(i));
    pattern
}

/// Samples spatially correlated bit-flip noise.
///
/// Primary flips hit each qubit independently with probability
/// `p_prime`; each primary then recruits, with probability `q`, one
/// secondary flip on a uniformly chosen qubit that shares a plaquette
/// with it. Secondaries are XORed in, so a secondary landing on an
/// already flipped qubit cancels it — exactly as two physical flips
/// would.
pub fn sample_correlated(
    geom: &CodeGeometry,
    p_prime: f64,
    q: f64,
    rng: &mut impl Rng,
) -> ErrorPattern {
    let mut pattern = geom.empty_pattern();
    let mut primaries = Vec::new();
    bernoulli_indices(geom.num_qubits(), p_prime, rng, |i| {
        pattern.toggle(i);
        primaries.push(i);
    });
    for &primary in &primaries {
        let u: f64 = rng.random();
        if u < q {
            let neighbors = geom.co_plaquette_neighbors(primary);
            let pick = neighbors[rng.random_range(0..neighbors.len())];
            pattern.toggle(pick);
        }
    }
    pattern
}

/// Width of the level-`n` hierarchical cluster: `(3^n + 1) / 2`, i.e.
/// the ladder 1, 2, 5, 14, 41, ... The cluster's defects sit `width`
/// columns apart when the decoder has resolved all inner structure.
///
/// Panics for levels whose width overflows `usize`; [`cantor_pattern`]
/// reports such levels as [`Error::LatticeTooSmall`] instead.
pub fn cantor_width(level: usize) -> usize {
    checked_cantor_width(level).expect("cluster width overflows usize")
}

fn checked_cantor_width(level: usize) -> Option<usize> {
    let exponent = u32::try_from(level).ok()?;
    let pow = 3usize.checked_pow(exponent)?;
    Some(pow / 2 + 1)
}

/// Width of a level-`n` cluster built from blocks of `m` flips instead
/// of single flips: `(2m - 1)^n`. Larger blocks push the decoder's
/// effective distance down without changing the recursion depth.
///
/// Panics if the width overflows `usize`.
pub fn uniform_cluster_width(m: usize, n: usize) -> usize {
    assert!(m >= 1, "block size must be at least 1");
    let base = 2 * m - 1;
    let exponent = u32::try_from(n).expect("cluster width overflows usize");
    base.checked_pow(exponent)
        .expect("cluster width overflows usize")
}

/// Placement of a hierarchical adversarial cluster.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CantorSpec {
    /// Recursion depth; the pattern has `2^level` flips.
    pub level: usize,
    /// Plaquette row the flips live in.
    pub row: usize,
    /// Leftmost flip column; `None` centres the cluster.
    pub col: Option<usize>,
}

fn collect_cluster_cols(level: usize, col: usize, out: &mut Vec<usize>) {
    if level == 0 {
        out.push(col);
    } else {
        let half_width = cantor_width(level - 1);
        collect_cluster_cols(level - 1, col, out);
        collect_cluster_cols(level - 1, col + 2 * half_width - 1, out);
    }
}

/// Builds the level-`n` hierarchical cluster: `2^n` flips on horizontal
/// qubits of one row, arranged so that each scale of the recursion
/// leaves two defects `(3^s + 1) / 2` columns apart once the decoder
/// has paired everything closer.
///
/// The base case is a single flip; level `n` is two copies of level
/// `n - 1` whose defect intervals just touch. The finished cluster
/// leaves defects `width` columns apart with `width - 1` flip-free
/// columns between groups, so a decoder with static distances always
/// finds a boundary cheaper than the far defect and converts the
/// cluster into a logical error.
///
/// For `level >= 1` the pattern is validated by decoding it with the
/// standard metric and checking that a logical failure really occurs;
/// placements the decoder handles are rejected as
/// [`Error::ClusterIneffective`]. A level-0 cluster is a single flip,
/// which every decoder corrects, so it is exempt.
pub fn cantor_pattern(geom: &CodeGeometry, spec: &CantorSpec) -> Result<ErrorPattern> {
    let l = geom.l();
    let too_small = Error::LatticeTooSmall {
        level: spec.level,
        l,
    };
    let width = match checked_cantor_width(spec.level) {
        Some(width) => width,
        None => return Err(too_small),
    };
    let col = match spec.col {
        Some(col) => col,
        // Centre the defect interval [col, col + width] in 0..=l-2.
        None if l > width => (l - 1 - width) / 2,
        None => return Err(too_small),
    };
    // The defects land on plaquette columns col and col + width, so the
    // whole interval must fit on the plaquette grid.
    if col + width > l - 2 || spec.row >= geom.plaquette_rows() {
        return Err(if spec.col.is_some() || spec.row >= geom.plaquette_rows() {
            Error::ClusterOutOfBounds {
                level: spec.level,
                width,
                row: spec.row,
                col,
                l,
            }
        } else {
            too_small
        });
    }
    let mut cols = Vec::with_capacity(1 << spec.level.min(24));
    collect_cluster_cols(spec.level, col, &mut cols);
    let ids: Vec<usize> = cols
        .iter()
        .map(|&c| {
            geom.qubit_id(Qubit::Horizontal {
                row: spec.row,
                col: c,
            })
        })
        .collect();
    let pattern = ErrorPattern::from_qubit_ids(geom.num_qubits(), &ids)?;
    if spec.level >= 1 {
        let result = decode(geom, &syndrome_of(geom, &pattern), &DecoderConfig::standard())?;
        let mut residual = pattern.clone();
        residual ^= &result.correction;
        if !is_logical_failure(geom, &residual)? {
            return Err(Error::ClusterIneffective {
                level: spec.level,
                l,
            });
        }
    }
    Ok(pattern)
}
