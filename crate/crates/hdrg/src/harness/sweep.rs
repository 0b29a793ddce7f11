//! Resumable parameter sweeps over a lattice-size x error-rate grid.
//!
//! A sweep is described by a serializable [`RunSpec`] and produces one
//! [`EstimateRecord`] per grid point. Three properties make long runs
//! safe to interrupt:
//!
//! * **Determinism** — trial `t` of grid point `(li, pi)` draws from
//!   `derive_stream(master_seed, [li, pi, t])`, so every record is a
//!   pure function of the [`RunSpec`], independent of thread count.
//! * **Persistence** — each completed record is appended to a JSON-lines
//!   file and flushed before the next point starts.
//! * **Resumption** — on restart, records already present in the output
//!   file are adopted instead of recomputed, matched by lattice,
//!   variant and exact noise-parameter bits. A torn trailing line (from
//!   a kill mid-write) is skipped with a warning and recomputed.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::decoder::{DecoderConfig, Metric};
use crate::geometry::build_geometry;
use crate::harness::estimate::estimate_noise_point;
use crate::harness::record::{point_key, EstimateRecord, PointKey, RECORD_SCHEMA};
use crate::noise::{derive_stream, NoiseModel};
use crate::{Error, Result};

/// Spec format version.
pub const RUN_SPEC_SCHEMA: &str = "run-spec/1";

fn default_schema() -> String {
    RUN_SPEC_SCHEMA.to_string()
}

fn default_target_failures() -> u64 {
    1000
}

fn default_max_samples() -> u64 {
    10_000_000
}

/// The error-rate axis of a sweep: one probability list for iid noise,
/// or one primary-probability list with a fixed recruitment `q` for
/// correlated noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepNoise {
    /// Independent flips at each probability in `p_values`.
    Iid {
        /// Flip probabilities to scan.
        p_values: Vec<f64>,
    },
    /// Correlated flips: primaries at each value in `p_prime_values`,
    /// each recruiting a neighbour with probability `q`.
    Correlated {
        /// Primary flip probabilities to scan.
        p_prime_values: Vec<f64>,
        /// Neighbour recruitment probability, shared by the scan.
        q: f64,
    },
}

impl SweepNoise {
    /// The noise models along the error-rate axis, in grid order.
    pub fn models(&self) -> Vec<NoiseModel> {
        match self {
            SweepNoise::Iid { p_values } => {
                p_values.iter().map(|&p| NoiseModel::Iid { p }).collect()
            }
            SweepNoise::Correlated { p_prime_values, q } => p_prime_values
                .iter()
                .map(|&p_prime| NoiseModel::Correlated { p_prime, q: *q })
                .collect(),
        }
    }
}

/// A complete sweep description; serializable as the `sweep` config
/// file format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    /// Spec format version.
    #[serde(default = "default_schema")]
    pub schema: String,
    /// Lattice sizes to scan, outer grid axis.
    pub l_values: Vec<usize>,
    /// Error-rate axis.
    #[serde(flatten)]
    pub noise: SweepNoise,
    /// Decoder variant for every point.
    #[serde(default)]
    pub variant: Metric,
    /// Per-point failure target.
    #[serde(default = "default_target_failures")]
    pub target_failures: u64,
    /// Per-point sample cap.
    #[serde(default = "default_max_samples")]
    pub max_samples: u64,
    /// Master seed; all randomness derives from it.
    pub seed: u64,
    /// Worker threads for this sweep; `None` uses the global default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl RunSpec {
    /// Validates ranges before any sampling starts.
    pub fn validate(&self) -> Result<()> {
        if self.l_values.is_empty() {
            return Err(Error::InvalidSpec("l_values must not be empty".into()));
        }
        if let Some(&l) = self.l_values.iter().find(|&&l| l < 2) {
            return Err(Error::InvalidSpec(format!(
                "lattice size {l} is below the minimum of 2"
            )));
        }
        let models = self.noise.models();
        if models.is_empty() {
            return Err(Error::InvalidSpec(
                "the error-rate axis must not be empty".into(),
            ));
        }
        for model in &models {
            model.validate()?;
        }
        if self.target_failures == 0 {
            return Err(Error::InvalidSpec(
                "target_failures must be at least 1".into(),
            ));
        }
        if self.max_samples == 0 {
            return Err(Error::InvalidSpec("max_samples must be positive".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidSpec(
                "threads, when given, must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of a sweep: the full record grid plus resumption bookkeeping.
#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    /// One record per grid point, in grid order (lattice outer,
    /// error rate inner), including adopted ones.
    pub records: Vec<EstimateRecord>,
    /// How many records were adopted from the output file instead of
    /// being recomputed.
    pub resumed: usize,
    /// Non-fatal problems encountered (unreadable result lines,
    /// write failures).
    pub warnings: Vec<String>,
}

/// Reads records already persisted at `path`. Returns the records by
/// point key plus the byte length of the file's intact prefix — the end
/// of the last complete line. An interrupted run can leave a torn final
/// line; it is reported as a warning, and the caller truncates the file
/// back to the intact prefix so fresh records never get glued onto the
/// fragment.
fn load_existing(
    path: &Path,
    warnings: &mut Vec<String>,
) -> Result<(std::collections::HashMap<PointKey, EstimateRecord>, u64)> {
    let mut existing = std::collections::HashMap::new();
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok((existing, 0)),
        Err(e) => return Err(e.into()),
    };
    let mut reader = BufReader::new(file);
    let mut line = String::new();
    let mut intact: u64 = 0;
    let mut position: u64 = 0;
    let mut number = 0usize;
    loop {
        line.clear();
        let bytes = reader.read_line(&mut line)?;
        if bytes == 0 {
            break;
        }
        position += bytes as u64;
        number += 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            intact = position;
            continue;
        }
        match serde_json::from_str::<EstimateRecord>(trimmed) {
            Ok(record) if record.schema == RECORD_SCHEMA => {
                existing.insert(record.resume_key(), record);
                intact = position;
            }
            Ok(record) => {
                warnings.push(format!(
                    "{}:{}: unknown record schema {:?}; recomputing that point",
                    path.display(),
                    number,
                    record.schema
                ));
                intact = position;
            }
            // Typically a line torn by an interrupted write. Unless
            // complete lines follow it, `intact` stays put and the
            // fragment is dropped before appending resumes.
            Err(e) => warnings.push(format!(
                "{}:{}: unreadable record ({e}); recomputing that point",
                path.display(),
                number
            )),
        }
    }
    Ok((existing, intact))
}

/// Runs every grid point of `spec`, appending each fresh record to
/// `out` (JSON lines) when given, and adopting records already present
/// there.
///
/// Failures to *write* individual records are collected as warnings —
/// the sweep itself continues and the report still carries every
/// record. Failing to open or read `out` is fatal, since resumption
/// would silently recompute everything.
pub fn run_sweep(spec: &RunSpec, out: Option<&Path>) -> Result<SweepReport> {
    spec.validate()?;
    let mut warnings = Vec::new();
    let (mut existing, intact) = match out {
        Some(path) => load_existing(path, &mut warnings)?,
        None => Default::default(),
    };
    let mut sink = match out {
        Some(path) => {
            let mut file = OpenOptions::new()
                .create(true)
                .write(true)
                .truncate(false)
                .open(path)?;
            // Drop any torn tail so appended lines start on a boundary.
            file.set_len(intact)?;
            file.seek(SeekFrom::End(0))?;
            Some(file)
        }
        None => None,
    };
    let pool = match spec.threads {
        Some(n) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidSpec(format!("cannot build thread pool: {e}")))?,
        ),
        None => None,
    };
    let models = spec.noise.models();
    let mut records = Vec::with_capacity(spec.l_values.len() * models.len());
    let mut resumed = 0usize;
    for (li, &l) in spec.l_values.iter().enumerate() {
        let geom = build_geometry(l)?;
        let config = DecoderConfig::with_metric(spec.variant);
        for (pi, model) in models.iter().enumerate() {
            let (p, p_prime, q) = match *model {
                NoiseModel::Iid { p } => (Some(p), None, None),
                NoiseModel::Correlated { p_prime, q } => (None, Some(p_prime), Some(q)),
            };
            if let Some(record) = existing.remove(&point_key(l, spec.variant, p, p_prime, q)) {
                records.push(record);
                resumed += 1;
                continue;
            }
            let seed = spec.seed;
            let (li, pi) = (li as u64, pi as u64);
            let compute = || {
                estimate_noise_point(
                    &geom,
                    model,
                    &config,
                    spec.target_failures,
                    spec.max_samples,
                    &|t| derive_stream(seed, &[li, pi, t]),
                    seed,
                )
            };
            let record = match &pool {
                Some(pool) => pool.install(compute),
                None => compute(),
            }?;
            if let Some(sink) = &mut sink {
                let line = serde_json::to_string(&record)?;
                if let Err(e) = writeln!(sink, "{line}").and_then(|_| sink.flush()) {
                    warnings.push(format!(
                        "could not persist record for L={l} point {pi}: {e}"
                    ));
                }
            }
            records.push(record);
        }
    }
    Ok(SweepReport {
        records,
        resumed,
        warnings,
    })
}
