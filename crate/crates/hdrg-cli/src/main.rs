//! Command-line surface for the planar-code decoder and its harness.
//!
//! The binary is a thin dispatcher: every subcommand parses and
//! validates its flags, calls one library entry point, and prints a
//! machine-parseable payload (JSON by default, CSV where a flat table
//! exists) to stdout or `--out`. Human-facing diagnostics go to stderr
//! only. Exit codes: 0 success, 1 usage error, 2 runtime error.
//!
//! Reproducibility contract: every command that samples takes `--seed`
//! and derives all randomness from it, so identical invocations print
//! identical bytes; wall-clock fields are omitted from payloads.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use hdrg::noise::derive_stream;
use hdrg::{
    bootstrap_alpha, build_geometry, cantor_pattern, compare_variants, decode, estimate_p,
    estimate_p_stratified, find_l_star, fit_alpha, fit_beta, is_logical_failure, oracle_report,
    run_sweep, syndrome_of, threshold_scan, AlphaFit, BetaFit, CantorSpec, CodeGeometry,
    DecoderConfig, ErrorPattern, EstimateRecord, Metric, NoiseModel, Pairing, Qubit, RunSpec,
};

/// Planar-code decoder, Monte Carlo harness and exact oracles.
#[derive(Parser, Debug)]
#[command(name = "hdrg", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decode one error pattern and print the full pairing trace.
    Decode(DecodeArgs),
    /// Estimate a logical failure rate at one parameter point.
    Sample(SampleArgs),
    /// Run a resumable estimation sweep described by a JSON config file.
    Sweep(SweepArgs),
    /// Find the smallest lattice beating the unencoded error rate.
    Lstar(LstarArgs),
    /// Fit scaling laws to a results file.
    #[command(subcommand)]
    Fit(FitCommand),
    /// Estimate the threshold from curve crossings in a results file.
    Threshold(ThresholdArgs),
    /// Generate a hierarchical cluster pattern and decode it both ways.
    Adversarial(AdversarialArgs),
    /// Exact small-lattice ground truth: enumeration and minimum weights.
    Oracle(OracleArgs),
    /// Paired comparison of the two decoder metrics.
    Compare(CompareArgs),
}

/// Noise-model selection shared by the sampling commands: exactly one of
/// `--p` (independent flips) or `--p-prime` with `--q` (correlated
/// flips) must be given.
#[derive(Args, Clone, Debug)]
struct NoiseArgs {
    /// Flip probability of the independent-noise model.
    #[arg(long)]
    p: Option<f64>,
    /// Primary flip probability of the correlated model (needs --q).
    #[arg(long)]
    p_prime: Option<f64>,
    /// Neighbour-recruitment probability of the correlated model.
    #[arg(long)]
    q: Option<f64>,
}

impl NoiseArgs {
    fn model(&self) -> Result<NoiseModel, CliError> {
        let model = match (self.p, self.p_prime, self.q) {
            (Some(p), None, None) => NoiseModel::Iid { p },
            (None, Some(p_prime), Some(q)) => NoiseModel::Correlated { p_prime, q },
            (None, Some(_), None) => {
                return Err(CliError::Usage("--p-prime needs --q".into()));
            }
            (None, None, Some(_)) => {
                return Err(CliError::Usage("--q needs --p-prime".into()));
            }
            _ => {
                return Err(CliError::Usage(
                    "give exactly one noise model: --p, or --p-prime with --q".into(),
                ));
            }
        };
        model
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(model)
    }
}

/// Output destination and format shared by all commands.
#[derive(Args, Clone, Debug)]
struct OutputArgs {
    /// Write the payload to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Payload format.
    #[arg(long, value_parser = ["json", "csv"], default_value = "json")]
    format: String,
}

impl OutputArgs {
    fn csv(&self) -> bool {
        self.format == "csv"
    }

    /// Writes `payload` (newline-terminated) to the chosen destination.
    fn emit(&self, payload: &str) -> Result<(), CliError> {
        let text = if payload.ends_with('\n') {
            payload.to_string()
        } else {
            format!("{payload}\n")
        };
        match &self.out {
            None => {
                print!("{text}");
                Ok(())
            }
            Some(path) => std::fs::write(path, text)
                .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display()))),
        }
    }

    fn emit_json<T: Serialize>(&self, value: &T) -> Result<(), CliError> {
        let json = serde_json::to_string(value)
            .map_err(|e| CliError::Runtime(format!("serializing payload: {e}")))?;
        self.emit(&json)
    }
}

#[derive(Args, Debug)]
struct DecodeArgs {
    /// Lattice size.
    #[arg(long = "L")]
    l: usize,
    /// Decoder variant.
    #[arg(long, default_value = "standard")]
    variant: Metric,
    /// Adversarial pattern source, written `cantor:LEVEL`.
    #[arg(long)]
    pattern: Option<String>,
    /// Row for --pattern placement.
    #[arg(long, default_value_t = 0)]
    row: usize,
    /// Leftmost column for --pattern placement; centered when absent.
    #[arg(long)]
    col: Option<usize>,
    /// Explicit comma-separated qubit ids to flip.
    #[arg(long, value_delimiter = ',')]
    qubits: Option<Vec<usize>>,
    /// Sample the pattern from independent noise at this rate instead.
    #[arg(long)]
    p: Option<f64>,
    /// Master seed for --p sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct SampleArgs {
    /// Lattice size.
    #[arg(long = "L")]
    l: usize,
    #[command(flatten)]
    noise: NoiseArgs,
    /// Decoder variant.
    #[arg(long, default_value = "standard")]
    variant: Metric,
    /// Stop after this many observed failures.
    #[arg(long, default_value_t = 1000)]
    target_failures: u64,
    /// Hard cap on decoded samples.
    #[arg(long, default_value_t = 10_000_000)]
    max_samples: u64,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use the weight-stratified rare-event estimator (independent
    /// noise only).
    #[arg(long)]
    stratified: bool,
    /// Per-weight sampling budget for --stratified.
    #[arg(long, default_value_t = 20_000)]
    budget: u64,
    /// Neglected binomial tail mass for --stratified.
    #[arg(long, default_value_t = 1e-12)]
    tail_delta: f64,
    /// Worker threads; defaults to one per core.
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// JSON sweep description (lattice and noise grids, variant,
    /// stopping rule, seed).
    #[arg(long)]
    config: PathBuf,
    /// Results journal, JSON-lines; existing records are adopted,
    /// making interrupted sweeps resumable.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; overrides the config's hint.
    #[arg(long)]
    threads: Option<usize>,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Stdout payload: a run summary (json) or the full record table
    /// (csv).
    #[arg(long, value_parser = ["json", "csv"], default_value = "json")]
    format: String,
}

#[derive(Args, Debug)]
struct LstarArgs {
    /// Smallest lattice to try.
    #[arg(long, default_value_t = 2)]
    l_min: usize,
    /// Largest lattice to try.
    #[arg(long = "l-max")]
    l_max: usize,
    /// Independent-noise rates to scan (repeat or comma-separate).
    #[arg(long, value_delimiter = ',')]
    p: Vec<f64>,
    /// Correlated primary rates to scan (needs --q).
    #[arg(long, value_delimiter = ',')]
    p_prime: Vec<f64>,
    /// Neighbour-recruitment probability for --p-prime.
    #[arg(long)]
    q: Option<f64>,
    /// Decoder variant.
    #[arg(long, default_value = "standard")]
    variant: Metric,
    /// Per-lattice failure target.
    #[arg(long, default_value_t = 1000)]
    target_failures: u64,
    /// Per-lattice sample cap.
    #[arg(long, default_value_t = 10_000_000)]
    max_samples: u64,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; defaults to one per core.
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Subcommand, Debug)]
enum FitCommand {
    /// Stretch exponent from sizes at one error rate.
    Beta(FitBetaArgs),
    /// Decay coefficient at fixed stretch exponent, per error rate.
    Alpha(FitAlphaArgs),
}

#[derive(Args, Debug)]
struct FitBetaArgs {
    /// Results file (JSON-lines of estimate records).
    #[arg(long = "in")]
    input: PathBuf,
    /// Error rate selecting the records to fit.
    #[arg(long)]
    p: f64,
    /// Restrict to one decoder variant.
    #[arg(long)]
    variant: Option<Metric>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct FitAlphaArgs {
    /// Results file (JSON-lines of estimate records).
    #[arg(long = "in")]
    input: PathBuf,
    /// Error rate to fit; every rate in the file when absent.
    #[arg(long)]
    p: Option<f64>,
    /// Stretch exponent held fixed; defaults to log base 3 of 2.
    #[arg(long, default_value_t = hdrg::harness::DEFAULT_BETA)]
    beta: f64,
    /// Rescaling constant held fixed.
    #[arg(long, default_value_t = hdrg::harness::DEFAULT_C)]
    c: f64,
    /// Bootstrap replicates for a coefficient interval.
    #[arg(long)]
    bootstrap: Option<usize>,
    /// Master seed for --bootstrap resampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Restrict to one decoder variant.
    #[arg(long)]
    variant: Option<Metric>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct ThresholdArgs {
    /// Results file (JSON-lines of estimate records) holding a size x
    /// rate grid.
    #[arg(long = "in")]
    input: PathBuf,
    /// Restrict to one decoder variant.
    #[arg(long)]
    variant: Option<Metric>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct AdversarialArgs {
    /// Lattice size.
    #[arg(long = "L")]
    l: usize,
    /// Cluster construction level.
    #[arg(long)]
    level: usize,
    /// Row the cluster occupies.
    #[arg(long, default_value_t = 0)]
    row: usize,
    /// Leftmost cluster column; centered when absent.
    #[arg(long)]
    col: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct OracleArgs {
    /// Lattice size (exhaustive enumeration: small sizes only).
    #[arg(long = "L")]
    l: usize,
    /// Flip probability for the exact failure rate.
    #[arg(long)]
    p: f64,
    /// Decoder variant.
    #[arg(long, default_value = "standard")]
    variant: Metric,
    /// Largest pattern weight for the minimum-weight searches.
    #[arg(long, default_value_t = 4)]
    max_weight: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Lattice sizes (repeat or comma-separate).
    #[arg(long = "L", value_delimiter = ',', required = true)]
    l: Vec<usize>,
    #[command(flatten)]
    noise: NoiseArgs,
    /// Failure target both variants must reach.
    #[arg(long, default_value_t = 1000)]
    target_failures: u64,
    /// Per-lattice paired-sample cap.
    #[arg(long, default_value_t = 10_000_000)]
    max_samples: u64,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; defaults to one per core.
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

/// Failures split by exit code: 1 for bad invocations, 2 for errors
/// while executing a valid one.
#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<hdrg::Error> for CliError {
    fn from(e: hdrg::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn main() {
    let code = match Cli::try_parse() {
        Ok(cli) => match run(cli.command) {
            Ok(()) => 0,
            Err(CliError::Usage(msg)) => {
                eprintln!("usage error: {msg}");
                1
            }
            Err(CliError::Runtime(msg)) => {
                eprintln!("error: {msg}");
                2
            }
        },
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            code
        }
    };
    std::process::exit(code);
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Decode(args) => cmd_decode(args),
        Command::Sample(args) => cmd_sample(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Lstar(args) => cmd_lstar(args),
        Command::Fit(FitCommand::Beta(args)) => cmd_fit_beta(args),
        Command::Fit(FitCommand::Alpha(args)) => cmd_fit_alpha(args),
        Command::Threshold(args) => cmd_threshold(args),
        Command::Adversarial(args) => cmd_adversarial(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Compare(args) => cmd_compare(args),
    }
}

/// Runs `f` inside a dedicated thread pool when a worker count was
/// requested, so `--threads` caps parallelism without touching the
/// global pool.
fn with_pool<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, CliError> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Runtime(format!("building thread pool: {e}")))?
            .install(f)),
    }
}

fn config_for(variant: Metric) -> DecoderConfig {
    match variant {
        Metric::Standard => DecoderConfig::standard(),
        Metric::Shortcut => DecoderConfig::shortcut(),
    }
}

/// Drops the wall-clock field so reruns print identical bytes.
fn scrub(mut record: EstimateRecord) -> EstimateRecord {
    record.wall_time_s = None;
    record
}

// ---------------------------------------------------------------------
// decode

#[derive(Serialize)]
struct DecodeTrace {
    schema: &'static str,
    l: usize,
    variant: Metric,
    pattern: Vec<usize>,
    weight: usize,
    syndrome: Vec<(usize, usize)>,
    pairings: Vec<Pairing>,
    k_max: usize,
    examined_pairs: u64,
    correction: Vec<usize>,
    residual: Vec<usize>,
    failure: bool,
}

fn parse_cantor(text: &str) -> Result<usize, CliError> {
    text.strip_prefix("cantor:")
        .and_then(|level| level.parse().ok())
        .ok_or_else(|| {
            CliError::Usage(format!(
                "--pattern takes the form cantor:LEVEL, got {text:?}"
            ))
        })
}

fn cmd_decode(args: DecodeArgs) -> Result<(), CliError> {
    if args.output.csv() {
        return Err(CliError::Usage(
            "decode traces are nested; only --format json is supported".into(),
        ));
    }
    let sources =
        args.pattern.is_some() as u8 + args.qubits.is_some() as u8 + args.p.is_some() as u8;
    if sources != 1 {
        return Err(CliError::Usage(
            "give exactly one pattern source: --pattern, --qubits or --p".into(),
        ));
    }
    let geom = build_geometry(args.l)?;
    let error = if let Some(text) = &args.pattern {
        let spec = CantorSpec {
            level: parse_cantor(text)?,
            row: args.row,
            col: args.col,
        };
        cantor_pattern(&geom, &spec)?
    } else if let Some(ids) = &args.qubits {
        ErrorPattern::from_qubit_ids(geom.num_qubits(), ids)?
    } else {
        let p = args.p.expect("checked above");
        NoiseModel::Iid { p }
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let mut rng = derive_stream(args.seed, &[]).rng();
        hdrg::sample_iid(&geom, p, &mut rng)
    };

    let config = config_for(args.variant);
    let syndrome = syndrome_of(&geom, &error);
    let result = decode(&geom, &syndrome, &config)?;
    let mut residual = error.clone();
    residual ^= &result.correction;
    let trace = DecodeTrace {
        schema: "decode-trace/1",
        l: args.l,
        variant: args.variant,
        pattern: error.qubit_ids(),
        weight: error.weight(),
        syndrome: syndrome.anyons.clone(),
        pairings: result.pairings.clone(),
        k_max: result.k_max,
        examined_pairs: result.examined_pairs,
        correction: result.correction.qubit_ids(),
        residual: residual.qubit_ids(),
        failure: is_logical_failure(&geom, &residual)?,
    };
    args.output.emit_json(&trace)
}

// ---------------------------------------------------------------------
// sample

fn cmd_sample(args: SampleArgs) -> Result<(), CliError> {
    let geom = build_geometry(args.l)?;
    let model = args.noise.model()?;
    let config = config_for(args.variant);
    let stream = derive_stream(args.seed, &[]);
    let record = with_pool(args.threads, || {
        if args.stratified {
            estimate_p_stratified(&geom, &model, &config, args.budget, args.tail_delta, &stream)
        } else {
            estimate_p(
                &geom,
                &model,
                &config,
                args.target_failures,
                args.max_samples,
                &stream,
            )
        }
    })??;
    let record = scrub(record);
    if args.output.csv() {
        let mut table = String::new();
        writeln!(table, "{}", hdrg::harness::CSV_HEADER).expect("string write");
        writeln!(table, "{}", record.to_csv_row()).expect("string write");
        args.output.emit(&table)
    } else {
        args.output.emit_json(&record)
    }
}

// ---------------------------------------------------------------------
// sweep

#[derive(Serialize)]
struct SweepSummary {
    schema: &'static str,
    points: usize,
    computed: usize,
    resumed: usize,
    warnings: usize,
    out: PathBuf,
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Usage(format!("reading {}: {e}", args.config.display())))?;
    let mut spec: RunSpec = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("parsing {}: {e}", args.config.display())))?;
    if let Some(threads) = args.threads {
        spec.threads = Some(threads);
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    let report = run_sweep(&spec, Some(&args.out))?;
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    if args.format == "csv" {
        let mut table = String::new();
        writeln!(table, "{}", hdrg::harness::CSV_HEADER).expect("string write");
        for record in &report.records {
            writeln!(table, "{}", record.to_csv_row()).expect("string write");
        }
        print!("{table}");
        Ok(())
    } else {
        let summary = SweepSummary {
            schema: "sweep-summary/1",
            points: report.records.len(),
            computed: report.records.len() - report.resumed,
            resumed: report.resumed,
            warnings: report.warnings.len(),
            out: args.out.clone(),
        };
        println!(
            "{}",
            serde_json::to_string(&summary)
                .map_err(|e| CliError::Runtime(format!("serializing summary: {e}")))?
        );
        Ok(())
    }
}

// ---------------------------------------------------------------------
// lstar

#[derive(Serialize)]
struct LstarEntry {
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_prime: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    break_even: f64,
    l_star: Option<usize>,
    records: Vec<EstimateRecord>,
}

#[derive(Serialize)]
struct LstarScan {
    schema: &'static str,
    variant: Metric,
    l_min: usize,
    l_max: usize,
    results: Vec<LstarEntry>,
}

fn cmd_lstar(args: LstarArgs) -> Result<(), CliError> {
    let models: Vec<NoiseModel> = match (&args.p[..], &args.p_prime[..], args.q) {
        (rates, [], None) if !rates.is_empty() => {
            rates.iter().map(|&p| NoiseModel::Iid { p }).collect()
        }
        ([], rates, Some(q)) if !rates.is_empty() => rates
            .iter()
            .map(|&p_prime| NoiseModel::Correlated { p_prime, q })
            .collect(),
        ([], rates, None) if !rates.is_empty() => {
            return Err(CliError::Usage("--p-prime needs --q".into()));
        }
        _ => {
            return Err(CliError::Usage(
                "give exactly one noise axis: --p values, or --p-prime values with --q".into(),
            ));
        }
    };
    for model in &models {
        model.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    }
    if args.l_min < 2 || args.l_max < args.l_min {
        return Err(CliError::Usage(
            "need 2 <= --l-min <= --l-max for the lattice range".into(),
        ));
    }
    let config = config_for(args.variant);
    let stream = derive_stream(args.seed, &[]);
    let results: Vec<LstarEntry> = with_pool(args.threads, || {
        models
            .iter()
            .enumerate()
            .map(|(pi, model)| {
                let found = find_l_star(
                    args.l_min,
                    args.l_max,
                    model,
                    &config,
                    args.target_failures,
                    args.max_samples,
                    &stream.child(pi as u64),
                )?;
                let (p, p_prime, q) = match *model {
                    NoiseModel::Iid { p } => (Some(p), None, None),
                    NoiseModel::Correlated { p_prime, q } => (None, Some(p_prime), Some(q)),
                };
                Ok(LstarEntry {
                    p,
                    p_prime,
                    q,
                    break_even: found.break_even,
                    l_star: found.l_star,
                    records: found.records.into_iter().map(scrub).collect(),
                })
            })
            .collect::<Result<_, hdrg::Error>>()
    })??;

    if args.output.csv() {
        let mut table = String::from("p,p_prime,q,break_even,l_star\n");
        for entry in &results {
            let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            writeln!(
                table,
                "{},{},{},{},{}",
                cell(entry.p),
                cell(entry.p_prime),
                cell(entry.q),
                entry.break_even,
                entry.l_star.map(|l| l.to_string()).unwrap_or_default()
            )
            .expect("string write");
        }
        args.output.emit(&table)
    } else {
        args.output.emit_json(&LstarScan {
            schema: "lstar-scan/1",
            variant: args.variant,
            l_min: args.l_min,
            l_max: args.l_max,
            results,
        })
    }
}

// ---------------------------------------------------------------------
// fit

fn read_records(path: &PathBuf) -> Result<Vec<EstimateRecord>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("reading {}: {e}", path.display())))?;
    let mut records = Vec::new();
    for (index, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: EstimateRecord = serde_json::from_str(line).map_err(|e| {
            CliError::Runtime(format!("{} line {}: {e}", path.display(), index + 1))
        })?;
        records.push(record);
    }
    Ok(records)
}

/// The error-rate coordinate of a record, whichever model produced it.
fn error_rate(record: &EstimateRecord) -> Option<f64> {
    record.p.or(record.p_prime)
}

fn select(
    records: &[EstimateRecord],
    rate: Option<f64>,
    variant: Option<Metric>,
) -> Vec<EstimateRecord> {
    records
        .iter()
        .filter(|r| variant.is_none_or(|v| r.variant == v))
        .filter(|r| {
            rate.is_none_or(|p| error_rate(r).map(f64::to_bits) == Some(p.to_bits()))
        })
        .cloned()
        .collect()
}

#[derive(Serialize)]
struct BetaReport {
    schema: &'static str,
    #[serde(flatten)]
    fit: BetaFit,
}

fn cmd_fit_beta(args: FitBetaArgs) -> Result<(), CliError> {
    let records = read_records(&args.input)?;
    let selected = select(&records, Some(args.p), args.variant);
    if selected.is_empty() {
        return Err(CliError::Runtime(format!(
            "no records at error rate {} in {}",
            args.p,
            args.input.display()
        )));
    }
    let fit = fit_beta(&selected)?;
    if args.output.csv() {
        let mut table = String::from("p,beta,intercept,r_squared,points\n");
        writeln!(
            table,
            "{},{},{},{},{}",
            fit.p, fit.beta, fit.intercept, fit.r_squared, fit.points
        )
        .expect("string write");
        args.output.emit(&table)
    } else {
        args.output.emit_json(&BetaReport {
            schema: "fit-beta/1",
            fit,
        })
    }
}

#[derive(Serialize)]
struct AlphaEntry {
    #[serde(flatten)]
    fit: AlphaFit,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha_lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha_hi: Option<f64>,
}

#[derive(Serialize)]
struct AlphaReport {
    schema: &'static str,
    fits: Vec<AlphaEntry>,
}

fn cmd_fit_alpha(args: FitAlphaArgs) -> Result<(), CliError> {
    let records = read_records(&args.input)?;
    let beta = args.beta;
    let rates: Vec<f64> = match args.p {
        Some(p) => vec![p],
        None => {
            // Every distinct error rate present, ascending; rates are
            // compared by exact bit pattern, like everywhere else.
            let mut seen = std::collections::BTreeSet::new();
            let mut rates: Vec<f64> = records
                .iter()
                .filter_map(error_rate)
                .filter(|p| seen.insert(p.to_bits()))
                .collect();
            rates.sort_by(|a, b| a.partial_cmp(b).expect("finite rates"));
            rates
        }
    };
    if rates.is_empty() {
        return Err(CliError::Runtime(format!(
            "no fittable records in {}",
            args.input.display()
        )));
    }
    let stream = derive_stream(args.seed, &[]);
    let mut fits = Vec::new();
    for (pi, &p) in rates.iter().enumerate() {
        let selected = select(&records, Some(p), args.variant);
        if selected.is_empty() {
            return Err(CliError::Runtime(format!(
                "no records at error rate {p} in {}",
                args.input.display()
            )));
        }
        let fit = fit_alpha(&selected, beta, args.c)?;
        let (alpha_lo, alpha_hi) = match args.bootstrap {
            None => (None, None),
            Some(replicates) => {
                let (lo, hi) =
                    bootstrap_alpha(&selected, beta, args.c, replicates, &stream.child(pi as u64))?;
                (Some(lo), Some(hi))
            }
        };
        fits.push(AlphaEntry {
            fit,
            alpha_lo,
            alpha_hi,
        });
    }

    if args.output.csv() {
        let mut table = String::from("p,alpha,intercept,r_squared,beta,c,points,alpha_lo,alpha_hi\n");
        for entry in &fits {
            let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            writeln!(
                table,
                "{},{},{},{},{},{},{},{},{}",
                entry.fit.p,
                entry.fit.alpha,
                entry.fit.intercept,
                entry.fit.r_squared,
                entry.fit.beta,
                entry.fit.c,
                entry.fit.points,
                cell(entry.alpha_lo),
                cell(entry.alpha_hi)
            )
            .expect("string write");
        }
        args.output.emit(&table)
    } else {
        args.output.emit_json(&AlphaReport {
            schema: "fit-alpha/1",
            fits,
        })
    }
}

// ---------------------------------------------------------------------
// threshold

#[derive(Serialize)]
struct ThresholdReport {
    schema: &'static str,
    #[serde(flatten)]
    estimate: hdrg::ThresholdEstimate,
}

fn cmd_threshold(args: ThresholdArgs) -> Result<(), CliError> {
    let records = read_records(&args.input)?;
    let selected = select(&records, None, args.variant);
    let estimate = threshold_scan(&selected)?;
    if args.output.csv() {
        let mut table = String::from("l_low,l_high,p\n");
        for crossing in &estimate.crossings {
            writeln!(table, "{},{},{}", crossing.l_low, crossing.l_high, crossing.p)
                .expect("string write");
        }
        args.output.emit(&table)
    } else {
        args.output.emit_json(&ThresholdReport {
            schema: "threshold/1",
            estimate,
        })
    }
}

// ---------------------------------------------------------------------
// adversarial

#[derive(Serialize)]
struct AdversarialReport {
    schema: &'static str,
    l: usize,
    level: usize,
    row: usize,
    /// Leftmost column actually used (resolved when --col was absent).
    col: usize,
    width: usize,
    qubits: Vec<usize>,
    weight: usize,
    standard_fails: bool,
    shortcut_fails: bool,
}

/// Leftmost lattice column covered by a cluster's flips.
fn leftmost_column(geom: &CodeGeometry, pattern: &ErrorPattern) -> usize {
    pattern
        .qubit_ids()
        .into_iter()
        .filter_map(|id| match geom.qubit(id) {
            Qubit::Horizontal { col, .. } => Some(col),
            _ => None,
        })
        .min()
        .unwrap_or(0)
}

fn cmd_adversarial(args: AdversarialArgs) -> Result<(), CliError> {
    let geom = build_geometry(args.l)?;
    let spec = CantorSpec {
        level: args.level,
        row: args.row,
        col: args.col,
    };
    let pattern = cantor_pattern(&geom, &spec)?;
    let report = AdversarialReport {
        schema: "adversarial/1",
        l: args.l,
        level: args.level,
        row: args.row,
        col: leftmost_column(&geom, &pattern),
        width: hdrg::cantor_width(args.level),
        qubits: pattern.qubit_ids(),
        weight: pattern.weight(),
        standard_fails: hdrg::decode_fails(&geom, &DecoderConfig::standard(), &pattern)?,
        shortcut_fails: hdrg::decode_fails(&geom, &DecoderConfig::shortcut(), &pattern)?,
    };
    if args.output.csv() {
        let mut table = String::from("L,level,row,col,width,weight,standard_fails,shortcut_fails\n");
        writeln!(
            table,
            "{},{},{},{},{},{},{},{}",
            report.l,
            report.level,
            report.row,
            report.col,
            report.width,
            report.weight,
            report.standard_fails,
            report.shortcut_fails
        )
        .expect("string write");
        args.output.emit(&table)
    } else {
        args.output.emit_json(&report)
    }
}

// ---------------------------------------------------------------------
// oracle

fn cmd_oracle(args: OracleArgs) -> Result<(), CliError> {
    let geom = build_geometry(args.l)?;
    let config = config_for(args.variant);
    let report = oracle_report(&geom, args.p, &config, args.max_weight)?;
    if args.output.csv() {
        let cell = |v: Option<usize>| v.map(|w| w.to_string()).unwrap_or_default();
        let mut table =
            String::from("L,p,variant,exact_rate,decoder_min_weight,optimal_min_weight,searched_up_to\n");
        writeln!(
            table,
            "{},{},{},{},{},{},{}",
            report.l,
            report.p,
            report.variant,
            report.exact_rate,
            cell(report.decoder_min_weight),
            cell(report.optimal_min_weight),
            report.searched_up_to
        )
        .expect("string write");
        args.output.emit(&table)
    } else {
        args.output.emit_json(&report)
    }
}

// ---------------------------------------------------------------------
// compare

#[derive(Serialize)]
struct CompareReport {
    schema: &'static str,
    records: Vec<hdrg::RatioRecord>,
}

fn cmd_compare(args: CompareArgs) -> Result<(), CliError> {
    let model = args.noise.model()?;
    let stream = derive_stream(args.seed, &[]);
    let records = with_pool(args.threads, || {
        compare_variants(
            &args.l,
            &model,
            args.target_failures,
            args.max_samples,
            &stream,
        )
    })??;
    if args.output.csv() {
        let mut table = String::from(
            "L,n,standard_failures,shortcut_failures,standard_rate,shortcut_rate,\
             ratio,ratio_lo,ratio_hi,capped,flagged,seed\n",
        );
        for r in &records {
            let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            writeln!(
                table,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.l,
                r.samples,
                r.standard_failures,
                r.shortcut_failures,
                r.standard_rate,
                r.shortcut_rate,
                cell(r.ratio),
                cell(r.ratio_lo),
                cell(r.ratio_hi),
                r.capped,
                r.flagged,
                r.seed
            )
            .expect("string write");
        }
        args.output.emit(&table)
    } else {
        args.output.emit_json(&CompareReport {
            schema: "compare/1",
            records,
        })
    }
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;

    use super::*;

    #[test]
    fn test_command_tree_is_well_formed() {
        Cli::command().debug_assert();
    }

    #[test]
    fn test_cantor_pattern_argument_parses_level() {
        assert_eq!(parse_cantor("cantor:2").unwrap(), 2);
        assert_eq!(parse_cantor("cantor:0").unwrap(), 0);
        assert!(parse_cantor("cantor").is_err());
        assert!(parse_cantor("cantor:x").is_err());
        assert!(parse_cantor("fractal:2").is_err());
    }

    #[test]
    fn test_noise_selection_requires_exactly_one_model() {
        let args = |p, p_prime, q| NoiseArgs { p, p_prime, q };
        assert!(matches!(
            args(Some(0.05), None, None).model(),
            Ok(NoiseModel::Iid { p }) if p == 0.05
        ));
        assert!(matches!(
            args(None, Some(0.01), Some(0.5)).model(),
            Ok(NoiseModel::Correlated { p_prime, q }) if p_prime == 0.01 && q == 0.5
        ));
        for bad in [
            args(None, None, None),
            args(Some(0.05), Some(0.01), Some(0.5)),
            args(None, Some(0.01), None),
            args(None, None, Some(0.5)),
        ] {
            assert!(matches!(bad.model(), Err(CliError::Usage(_))));
        }
        assert!(matches!(
            args(Some(1.5), None, None).model(),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn test_record_selection_filters_by_exact_rate_bits() {
        let mut record = EstimateRecord {
            schema: hdrg::harness::RECORD_SCHEMA.to_string(),
            l: 4,
            p: Some(0.1),
            p_prime: None,
            q: None,
            variant: Metric::Standard,
            samples: 100,
            failures: 10,
            rate: 0.1,
            ci_lo: 0.05,
            ci_hi: 0.17,
            capped: false,
            seed: 1,
            wall_time_s: None,
        };
        let mut records = vec![record.clone()];
        record.p = Some(0.2);
        record.variant = Metric::Shortcut;
        records.push(record);

        assert_eq!(select(&records, Some(0.1), None).len(), 1);
        assert_eq!(select(&records, Some(0.1 + 0.1), None).len(), 1);
        assert_eq!(select(&records, Some(0.3), None).len(), 0);
        assert_eq!(select(&records, None, Some(Metric::Shortcut)).len(), 1);
        assert_eq!(select(&records, None, None).len(), 2);
    }
}
