//! End-to-end checks of the installed binary: ingestion fixtures, the exit
//! code contract, report determinism under --no-meta, format parity, plot
//! emission, and the benchmark subcommand.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::Value;
use tempfile::TempDir;

fn prisca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prisca")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write_file(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

/// Forty-point series with a variance jump at instant 16, rendered one value
/// per line.
fn small_change_file(dir: &TempDir, name: &str, seed: u64) -> PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let text: String = (1..=40)
        .map(|t| {
            let sd = if t >= 16 { 3.0f64.sqrt() } else { 1.0 };
            format!("{}\n", Normal::new(0.0, sd).unwrap().sample(&mut rng))
        })
        .collect();
    write_file(dir, name, &text)
}

#[test]
fn plain_column_file_round_trips() {
    let dir = TempDir::new().unwrap();
    let input = write_file(&dir, "two.csv", "1.0\n2.0\n");
    let out = prisca(&["detect", "--L", "1", input.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc = stdout_json(&out);
    assert_eq!(doc["input"]["length"], 2);
    assert_eq!(doc["input"]["num_samples"], 2);
    assert_eq!(doc["config"]["l"], 1);
}

#[test]
fn repeated_times_become_replicated_instants() {
    let dir = TempDir::new().unwrap();
    let input = write_file(&dir, "rep.csv", "t,y\n1,0.5\n1,0.7\n2,0.1\n");
    let out = prisca(&["detect", "--L", "1", input.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let doc = stdout_json(&out);
    assert_eq!(doc["input"]["length"], 2);
    assert_eq!(doc["input"]["num_samples"], 3);
}

#[test]
fn decreasing_time_is_a_data_error_naming_the_line() {
    let dir = TempDir::new().unwrap();
    let input = write_file(&dir, "bad.csv", "1,0.5\n0,0.2\n");
    let out = prisca(&["detect", "--L", "1", input.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 2"), "stderr: {stderr}");
    assert!(stderr.contains("time not increasing"), "stderr: {stderr}");
}

#[test]
fn missing_file_and_empty_file_are_data_errors() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("absent.csv");
    let out = prisca(&["detect", "--L", "1", missing.to_str().unwrap()]);
    assert_eq!(code(&out), 2);

    let empty = write_file(&dir, "empty.csv", "");
    let out = prisca(&["detect", "--L", "1", empty.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("no data rows"));
}

#[test]
fn usage_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let input = small_change_file(&dir, "y.csv", 1);
    let path = input.to_str().unwrap();
    // Effect-count group violations, invalid values, and flag conflicts.
    assert_eq!(code(&prisca(&["detect", path])), 1);
    assert_eq!(code(&prisca(&["detect", "--L", "2", "--auto", path])), 1);
    assert_eq!(code(&prisca(&["detect", "--L", "0", path])), 1);
    assert_eq!(code(&prisca(&["detect", "--L", "1", "--p", "1.5", path])), 1);
    assert_eq!(code(&prisca(&["detect", "--auto", "--ar", "1", path])), 1);
    assert_eq!(code(&prisca(&["frobnicate"])), 1);
    // --plot-data is single-input only.
    let other = small_change_file(&dir, "z.csv", 2);
    let plot = dir.path().join("p.csv");
    assert_eq!(
        code(&prisca(&[
            "detect",
            "--L",
            "1",
            "--plot-data",
            plot.to_str().unwrap(),
            path,
            other.to_str().unwrap(),
        ])),
        1
    );
}

#[test]
fn nonconvergence_exits_three_with_the_report_written() {
    let dir = TempDir::new().unwrap();
    let input = small_change_file(&dir, "y.csv", 3);
    let out = prisca(&[
        "detect",
        "--L",
        "2",
        "--epsilon",
        "1e-300",
        "--max-iter",
        "1",
        input.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);
    let doc = stdout_json(&out);
    assert_eq!(doc["converged"], false);
    assert!(doc["k_hat"].is_u64());
}

#[test]
fn no_meta_reports_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let input = small_change_file(&dir, "y.csv", 4);
    let args = ["detect", "--L", "2", "--no-meta", input.to_str().unwrap()];
    let first = prisca(&args);
    let second = prisca(&args);
    assert_eq!(code(&first), 0);
    assert_eq!(first.stdout, second.stdout);
    assert!(!String::from_utf8_lossy(&first.stdout).contains("generated_at"));

    // With metadata the timestamp and timing are present.
    let with_meta = prisca(&["detect", "--L", "2", input.to_str().unwrap()]);
    let doc = stdout_json(&with_meta);
    assert!(doc["meta"]["generated_at"].is_u64());
    assert!(doc["meta"]["timing_seconds"].is_f64());
}

#[test]
fn csv_and_json_reports_carry_the_same_numbers() {
    let dir = TempDir::new().unwrap();
    let input = small_change_file(&dir, "y.csv", 5);
    let args = ["detect", "--L", "2", "--emit-alpha", "--no-meta", input.to_str().unwrap()];
    let json = stdout_json(&prisca(&args));
    let mut csv_args = args.to_vec();
    csv_args.extend(["--format", "csv"]);
    let csv_out = prisca(&csv_args);
    assert_eq!(code(&csv_out), 0);
    let csv = String::from_utf8(csv_out.stdout).unwrap();
    assert!(csv.starts_with("key,value\n"));

    let lookup = |key: &str| -> String {
        csv.lines()
            .find(|l| l.starts_with(&format!("{key},")))
            .unwrap_or_else(|| panic!("missing key {key}"))
            .split_once(',')
            .unwrap()
            .1
            .to_string()
    };
    assert_eq!(lookup("k_hat").parse::<u64>().unwrap(), json["k_hat"].as_u64().unwrap());
    assert_eq!(lookup("config.a0").parse::<f64>().unwrap(), json["config"]["a0"].as_f64().unwrap());
    assert_eq!(
        lookup("effects.0.point_estimate").parse::<u64>().unwrap(),
        json["effects"][0]["point_estimate"].as_u64().unwrap()
    );
    let csv_trace: Vec<f64> =
        lookup("elbo_trace").split('|').map(|s| s.parse().unwrap()).collect();
    let json_trace: Vec<f64> = json["elbo_trace"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(csv_trace, json_trace);
    let csv_alpha: Vec<f64> =
        lookup("effects.0.alpha").split('|').map(|s| s.parse().unwrap()).collect();
    assert_eq!(csv_alpha.len(), 40);
    assert_eq!(csv_alpha[0], json["effects"][0]["alpha"][0].as_f64().unwrap());
}

#[test]
fn multi_file_output_is_an_array_sorted_by_name() {
    let dir = TempDir::new().unwrap();
    let b = small_change_file(&dir, "b.csv", 6);
    let a = small_change_file(&dir, "a.csv", 7);
    // Pass b first; the report array must still come out sorted by file name.
    let out = prisca(&["detect", "--L", "1", "--no-meta", b.to_str().unwrap(), a.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let docs = stdout_json(&out);
    let sources: Vec<&str> =
        docs.as_array().unwrap().iter().map(|d| d["input"]["source"].as_str().unwrap()).collect();
    assert_eq!(sources.len(), 2);
    assert!(sources[0].ends_with("a.csv"));
    assert!(sources[1].ends_with("b.csv"));
}

#[test]
fn partial_failure_keeps_good_reports_and_exits_two() {
    let dir = TempDir::new().unwrap();
    let good = small_change_file(&dir, "good.csv", 8);
    let bad = write_file(&dir, "bad.csv", "1,0.5\n0,0.2\n");
    let out = prisca(&["detect", "--L", "1", "--no-meta", good.to_str().unwrap(), bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let docs = stdout_json(&out);
    assert_eq!(docs.as_array().unwrap().len(), 1);
    assert!(docs[0]["input"]["source"].as_str().unwrap().ends_with("good.csv"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.csv"));
}

#[test]
fn plot_data_table_has_one_row_per_instant_and_effect() {
    let dir = TempDir::new().unwrap();
    let input = small_change_file(&dir, "y.csv", 9);
    let plot = dir.path().join("plot.csv");
    let out = prisca(&[
        "detect",
        "--L",
        "2",
        "--plot-data",
        plot.to_str().unwrap(),
        input.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let table = std::fs::read_to_string(&plot).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "t,effect,alpha,in_credible_set");
    assert_eq!(lines.len(), 1 + 40 * 2);
    let mut mass = [0.0f64; 2];
    for row in &lines[1..] {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 4);
        let t: usize = fields[0].parse().unwrap();
        let effect: usize = fields[1].parse().unwrap();
        let alpha: f64 = fields[2].parse().unwrap();
        assert!((1..=40).contains(&t));
        assert!(effect < 2);
        assert!((0.0..=1.0).contains(&alpha));
        assert!(matches!(fields[3], "0" | "1"));
        mass[effect] += alpha;
    }
    for m in mass {
        assert!((m - 1.0).abs() < 1e-9, "alpha mass {m}");
    }
}

#[test]
fn out_flag_writes_the_report_and_leaves_stdout_empty() {
    let dir = TempDir::new().unwrap();
    let input = small_change_file(&dir, "y.csv", 10);
    let report = dir.path().join("report.json");
    let out = prisca(&[
        "detect",
        "--L",
        "1",
        "--no-meta",
        "--seed",
        "42",
        "--out",
        report.to_str().unwrap(),
        input.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc["input"]["length"], 40);
}

#[test]
fn diff_and_ar_flags_mark_the_report_axis() {
    let dir = TempDir::new().unwrap();
    let input = small_change_file(&dir, "y.csv", 11);
    let path = input.to_str().unwrap();

    let doc = stdout_json(&prisca(&["detect", "--L", "1", "--diff", path]));
    assert_eq!(doc["input"]["axis"], "differenced");
    assert_eq!(doc["input"]["length"], 39);
    assert_eq!(doc["input"]["preprocessing"][0], "difference");

    let doc = stdout_json(&prisca(&["detect", "--L", "1", "--ar", "1", path]));
    assert_eq!(doc["input"]["axis"], "ar-residual");
    assert_eq!(doc["input"]["length"], 39);
    assert_eq!(doc["ar"]["order"], 1);
    assert_eq!(doc["ar"]["coefficients"].as_array().unwrap().len(), 1);
}

#[test]
fn auto_mode_reports_its_search_trace() {
    let dir = TempDir::new().unwrap();
    let input = small_change_file(&dir, "y.csv", 12);
    let out = prisca(&["detect", "--auto", input.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let doc = stdout_json(&out);
    assert_eq!(doc["config"]["mode"], "auto");
    let trace = doc["auto"]["k_hat_trace"].as_array().unwrap();
    assert!(trace.len() >= 2);
    let k_hat = doc["k_hat"].as_u64().unwrap();
    assert_eq!(trace.last().unwrap().as_u64().unwrap(), k_hat);
}

#[test]
fn benchmark_row_parses_and_ignores_worker_count() {
    let run = |jobs: &str| -> Vec<String> {
        let out = prisca(&[
            "benchmark", "--T", "200", "--reps", "4", "--seed", "3", "--method", "prisca",
            "--jobs", jobs,
        ]);
        assert_eq!(code(&out), 0);
        let text = String::from_utf8(out.stdout).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,method,bias,hausdorff,time,length,cond_cov");
        lines.next().unwrap().split(',').map(str::to_string).collect()
    };
    let one = run("1");
    let two = run("2");
    assert_eq!(one.len(), 7);
    assert_eq!(one[0], "200");
    assert_eq!(one[1], "prisca");
    for field in &one[2..] {
        assert!(field.parse::<f64>().is_ok(), "unparsable field {field}");
    }
    // Every column except wall time must agree across worker counts.
    for i in [2usize, 3, 5, 6] {
        assert_eq!(one[i], two[i], "column {i} differs");
    }
}

#[test]
fn infeasible_benchmark_spec_is_a_data_error() {
    let out = prisca(&["benchmark", "--T", "10", "--method", "oracle"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("infeasible"));
    // T long enough for placement but too short for the fixed-L rule.
    let out = prisca(&["benchmark", "--T", "20", "--reps", "1", "--method", "prisca"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&prisca(&["--help"])), 0);
    assert_eq!(code(&prisca(&["--version"])), 0);
    assert_eq!(code(&prisca(&["detect", "--help"])), 0);
}

/// Simulate, write the draw as CSV, detect through the binary, and check the
/// planted change is recovered. One seed here keeps the suite quick; the
/// acceptance gate runs the hundred-seed version.
#[test]
fn simulate_write_detect_round_trip_recovers_the_change() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(424242);
    let t0 = 100usize;
    let text: String = (1..=200usize)
        .map(|t| {
            let sd = if t >= t0 { 3.0 } else { 1.0 };
            format!("{}\n", Normal::new(0.0, sd).unwrap().sample(&mut rng))
        })
        .collect();
    let input = write_file(&dir, "sim.csv", &text);
    let out = prisca(&["detect", "--L", "1", "--no-meta", input.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let doc = stdout_json(&out);
    assert_eq!(doc["k_hat"], 1);
    let estimate = doc["effects"][0]["point_estimate"].as_u64().unwrap() as f64;
    let radius = (200f64).sqrt().min(30.0) / 2.0;
    assert!((estimate - t0 as f64).abs() <= radius, "estimate {estimate}");
}

#[test]
fn binary_and_library_agree_on_the_same_file() {
    let dir = TempDir::new().unwrap();
    let input = small_change_file(&dir, "y.csv", 13);
    let out = prisca(&["detect", "--L", "2", "--no-meta", input.to_str().unwrap()]);
    let doc = stdout_json(&out);

    let y = prisca::TimeSeries::new(
        std::fs::read_to_string(Path::new(input.to_str().unwrap()))
            .unwrap()
            .lines()
            .map(|l| l.parse().unwrap())
            .collect(),
    )
    .unwrap();
    let config = prisca::ModelConfig { l: 2, ..prisca::ModelConfig::default() };
    let fitted = prisca::fit(&y, &config).unwrap();
    let report = prisca::detect(&fitted, config.p);
    assert_eq!(doc["k_hat"].as_u64().unwrap() as usize, report.k_hat);
    let trace = doc["elbo_trace"].as_array().unwrap();
    assert_eq!(trace.len(), fitted.elbo_trace.len());
    for (a, b) in trace.iter().zip(&fitted.elbo_trace) {
        assert_eq!(a.as_f64().unwrap().to_bits(), b.to_bits());
    }
}
