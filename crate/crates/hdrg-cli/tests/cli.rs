//! End-to-end tests of the `hdrg` binary: every subcommand is exercised
//! through a real process, checking payload schemas, exit codes and
//! byte-level reproducibility.

use std::path::Path;
use std::process::{Command, Output};

use hdrg::harness::{wilson_interval, RECORD_SCHEMA};
use hdrg::{build_geometry, exact_failure_rate, DecoderConfig, EstimateRecord, Metric};

fn hdrg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdrg"))
        .args(args)
        .output()
        .expect("spawning the hdrg binary")
}

fn stdout_of(args: &[&str]) -> String {
    let output = hdrg(args);
    assert!(
        output.status.success(),
        "hdrg {args:?} failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout).expect("utf-8 stdout")
}

fn json_of(args: &[&str]) -> serde_json::Value {
    serde_json::from_str(&stdout_of(args)).expect("machine-parseable JSON on stdout")
}

/// A record with the given rate pretending to come from a million
/// samples, for driving the fit and threshold commands.
fn synthetic_record(l: usize, p: f64, rate: f64) -> EstimateRecord {
    let samples = 1_000_000;
    let failures = (rate * samples as f64).round() as u64;
    let (ci_lo, ci_hi) = wilson_interval(failures, samples);
    EstimateRecord {
        schema: RECORD_SCHEMA.to_string(),
        l,
        p: Some(p),
        p_prime: None,
        q: None,
        variant: Metric::Standard,
        samples,
        failures,
        rate,
        ci_lo,
        ci_hi,
        capped: false,
        seed: 0,
        wall_time_s: None,
    }
}

fn write_records(path: &Path, records: &[EstimateRecord]) {
    let lines: Vec<String> = records
        .iter()
        .map(|r| serde_json::to_string(r).expect("serializable record"))
        .collect();
    std::fs::write(path, lines.join("\n") + "\n").expect("writable temp dir");
}

#[test]
fn test_decode_cantor_trace_ends_in_failure() {
    let stdout = stdout_of(&[
        "decode", "--L", "12", "--pattern", "cantor:2", "--variant", "standard",
    ]);
    assert!(
        stdout.trim_end().ends_with("\"failure\":true}"),
        "trace should end in failure, got: {stdout}"
    );
    let trace: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(trace["schema"], "decode-trace/1");
    assert_eq!(trace["weight"], 4);
    let pairings = trace["pairings"].as_array().unwrap();
    assert_eq!(pairings.len(), 3);
    assert_eq!(pairings[0]["k"], 1);
    assert_eq!(pairings[2]["b"], "left");
}

#[test]
fn test_decode_of_explicit_qubits_reports_clean_correction() {
    // Two isolated single-qubit flips: each anyon pair annihilates at
    // k = 1, so the correction reproduces the error exactly.
    let trace = json_of(&["decode", "--L", "5", "--qubits", "0,40"]);
    assert_eq!(trace["weight"], 2);
    assert_eq!(trace["failure"], false);
    assert_eq!(trace["residual"].as_array().unwrap().len(), 0);
}

#[test]
fn test_decode_requires_exactly_one_pattern_source() {
    let output = hdrg(&["decode", "--L", "5", "--qubits", "0", "--p", "0.1"]);
    assert_eq!(output.status.code(), Some(1));
    let output = hdrg(&["decode", "--L", "5"]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn test_sample_is_byte_reproducible_across_runs_and_threads() {
    let args = [
        "sample", "--L", "3", "--p", "0.10", "--target-failures", "200", "--seed", "7",
    ];
    let first = stdout_of(&args);
    let second = stdout_of(&args);
    assert_eq!(first, second, "same seed must print identical bytes");

    let mut one = args.to_vec();
    one.extend(["--threads", "1"]);
    let mut four = args.to_vec();
    four.extend(["--threads", "4"]);
    assert_eq!(stdout_of(&one), stdout_of(&four));

    let record: serde_json::Value = serde_json::from_str(&first).unwrap();
    assert_eq!(record["schema"], "estimate-record/1");
    assert_eq!(record["failures"], 200);
    assert!(record.get("wall_time_s").is_none(), "payloads carry no clock");
}

#[test]
fn test_sample_csv_uses_the_fixed_column_order() {
    let stdout = stdout_of(&[
        "sample", "--L", "3", "--p", "0.05", "--target-failures", "50", "--format", "csv",
    ]);
    let mut lines = stdout.lines();
    assert_eq!(
        lines.next(),
        Some("L,p,p_prime,q,variant,n,failures,P,ci_lo,ci_hi,seed")
    );
    let row = lines.next().expect("one data row");
    assert!(row.starts_with("3,0.05,,,standard,"));
}

#[test]
fn test_stratified_sample_approximates_exact_rate() {
    let trace = json_of(&[
        "sample", "--L", "3", "--p", "0.01", "--stratified", "--budget", "5000", "--seed", "3",
    ]);
    let exact = exact_failure_rate(
        &build_geometry(3).unwrap(),
        0.01,
        &DecoderConfig::standard(),
    )
    .unwrap();
    let rate = trace["rate"].as_f64().unwrap();
    assert!(
        (rate - exact).abs() / exact < 0.2,
        "stratified {rate} vs exact {exact}"
    );
}

#[test]
fn test_sweep_resumes_completed_points_and_exports_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.json");
    let out = dir.path().join("results.jsonl");
    std::fs::write(
        &config,
        r#"{"l_values":[3,4],"p_values":[0.05,0.08],"target_failures":20,"max_samples":5000,"seed":11}"#,
    )
    .unwrap();
    let config = config.to_str().unwrap();
    let out = out.to_str().unwrap();

    let summary = json_of(&["sweep", "--config", config, "--out", out]);
    assert_eq!(summary["schema"], "sweep-summary/1");
    assert_eq!(summary["points"], 4);
    assert_eq!(summary["computed"], 4);
    assert_eq!(summary["resumed"], 0);

    let summary = json_of(&["sweep", "--config", config, "--out", out]);
    assert_eq!(summary["resumed"], 4);
    assert_eq!(summary["computed"], 0);

    let table = stdout_of(&["sweep", "--config", config, "--out", out, "--format", "csv"]);
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 5, "header plus one row per grid point");
    assert_eq!(lines[0], "L,p,p_prime,q,variant,n,failures,P,ci_lo,ci_hi,seed");
}

#[test]
fn test_fit_beta_recovers_a_synthetic_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("beta.jsonl");
    let records: Vec<EstimateRecord> = [3usize, 5, 9, 17]
        .into_iter()
        .map(|l| {
            let rate = (-(0.25 * l as f64).powf(0.6309)).exp();
            synthetic_record(l, 0.001, rate)
        })
        .collect();
    write_records(&path, &records);

    let fit = json_of(&["fit", "beta", "--in", path.to_str().unwrap(), "--p", "0.001"]);
    assert_eq!(fit["schema"], "fit-beta/1");
    assert_eq!(fit["points"], 4);
    let beta = fit["beta"].as_f64().unwrap();
    let r_squared = fit["r_squared"].as_f64().unwrap();
    assert!((beta - 0.6309).abs() < 1e-9, "beta {beta}");
    assert!((r_squared - 1.0).abs() < 1e-9, "r_squared {r_squared}");
}

#[test]
fn test_fit_alpha_emits_one_row_per_rate_with_bootstrap_interval() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("alpha.jsonl");
    let mut records = Vec::new();
    for (p, alpha) in [(0.02, 2.0), (0.04, 1.0)] {
        for l in [4usize, 8, 16] {
            let rate = (-alpha * (0.25 * l as f64).powf(0.6309297535714574)).exp();
            records.push(synthetic_record(l, p, rate));
        }
    }
    write_records(&path, &records);

    let table = stdout_of(&[
        "fit", "alpha", "--in", path.to_str().unwrap(), "--bootstrap", "50", "--format", "csv",
    ]);
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "p,alpha,intercept,r_squared,beta,c,points,alpha_lo,alpha_hi");
    assert_eq!(lines.len(), 3, "one fitted row per error rate");
    assert!(lines[1].starts_with("0.02,"));
    assert!(lines[2].starts_with("0.04,"));
    let report = json_of(&[
        "fit", "alpha", "--in", path.to_str().unwrap(), "--p", "0.02", "--bootstrap", "50",
    ]);
    let fit = &report["fits"][0];
    let alpha = fit["alpha"].as_f64().unwrap();
    assert!((alpha - 2.0).abs() < 1e-9, "alpha {alpha}");
    let (lo, hi) = (
        fit["alpha_lo"].as_f64().unwrap(),
        fit["alpha_hi"].as_f64().unwrap(),
    );
    assert!(lo <= alpha && alpha <= hi, "interval [{lo}, {hi}] vs {alpha}");
}

#[test]
fn test_threshold_locates_a_synthetic_crossing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.jsonl");
    let mut records = Vec::new();
    for l in [8usize, 16] {
        for i in 0..5 {
            let p = 0.06 + 0.005 * i as f64;
            // ln P = -2 + L (p - 0.07): curves of different L intersect
            // exactly at p = 0.07.
            let rate = (-2.0 + l as f64 * (p - 0.07)).exp();
            records.push(synthetic_record(l, p, rate));
        }
    }
    write_records(&path, &records);

    let estimate = json_of(&["threshold", "--in", path.to_str().unwrap()]);
    assert_eq!(estimate["schema"], "threshold/1");
    let median = estimate["median"].as_f64().unwrap();
    assert!((median - 0.07).abs() < 1e-9, "median {median}");

    let table = stdout_of(&[
        "threshold", "--in", path.to_str().unwrap(), "--format", "csv",
    ]);
    assert_eq!(table.lines().next(), Some("l_low,l_high,p"));
}

#[test]
fn test_lstar_emits_a_row_per_rate() {
    let table = stdout_of(&[
        "lstar", "--l-max", "6", "--p", "0.03,0.05", "--target-failures", "100", "--format",
        "csv",
    ]);
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "p,p_prime,q,break_even,l_star");
    assert_eq!(lines.len(), 3);
    for line in &lines[1..] {
        let l_star: usize = line.split(',').next_back().unwrap().parse().unwrap();
        assert!((2..=6).contains(&l_star));
    }
}

#[test]
fn test_adversarial_reports_both_variant_outcomes() {
    let report = json_of(&["adversarial", "--L", "15", "--level", "2", "--col", "5"]);
    assert_eq!(report["schema"], "adversarial/1");
    assert_eq!(report["weight"], 4);
    assert_eq!(report["standard_fails"], true);
    assert_eq!(report["shortcut_fails"], false);

    // Centered placement resolves the column it actually used.
    let centered = json_of(&["adversarial", "--L", "12", "--level", "2"]);
    assert_eq!(centered["col"], 3);
    assert_eq!(centered["width"], 5);
}

#[test]
fn test_oracle_exact_rate_matches_the_library() {
    let report = json_of(&["oracle", "--L", "3", "--p", "0.05", "--max-weight", "3"]);
    assert_eq!(report["schema"], "oracle-report/1");
    let expected = exact_failure_rate(
        &build_geometry(3).unwrap(),
        0.05,
        &DecoderConfig::standard(),
    )
    .unwrap();
    assert_eq!(report["exact_rate"].as_f64().unwrap(), expected);
    assert_eq!(report["decoder_min_weight"], 2);
    assert_eq!(report["optimal_min_weight"], 2);
}

#[test]
fn test_compare_pairs_variants_on_identical_noise() {
    let report = json_of(&[
        "compare", "--L", "4,6", "--p", "0.05", "--target-failures", "100", "--seed", "2",
    ]);
    assert_eq!(report["schema"], "compare/1");
    let records = report["records"].as_array().unwrap();
    assert_eq!(records.len(), 2);
    for record in records {
        assert_eq!(record["samples"], record["samples"].as_u64().unwrap());
        assert!(record["ratio"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn test_exit_codes_separate_usage_from_runtime_errors() {
    // Unknown flags and invalid ranges are usage errors.
    assert_eq!(hdrg(&["sample", "--bogus"]).status.code(), Some(1));
    assert_eq!(
        hdrg(&["sample", "--L", "3", "--p", "1.5"]).status.code(),
        Some(1)
    );
    assert_eq!(
        hdrg(&["lstar", "--l-max", "4", "--p-prime", "0.01"]).status.code(),
        Some(1),
        "correlated scan without --q"
    );
    // A well-formed request the library must refuse is a runtime error.
    assert_eq!(
        hdrg(&["oracle", "--L", "30", "--p", "0.05"]).status.code(),
        Some(2)
    );
    assert_eq!(
        hdrg(&["fit", "beta", "--in", "/nonexistent.jsonl", "--p", "0.1"])
            .status
            .code(),
        Some(1),
        "unreadable input file"
    );
    // Help is not an error.
    assert_eq!(hdrg(&["--help"]).status.code(), Some(0));
    assert_eq!(hdrg(&["decode", "--help"]).status.code(), Some(0));
}

#[test]
fn test_out_flag_writes_the_payload_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.json");
    let stdout = stdout_of(&[
        "decode", "--L", "5", "--qubits", "3", "--out", path.to_str().unwrap(),
    ]);
    assert!(stdout.is_empty(), "payload went to the file, not stdout");
    let written: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(written["schema"], "decode-trace/1");
}
