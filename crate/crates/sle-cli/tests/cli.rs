//! End-to-end tests of the `sle` binary: output formats, determinism,
//! sentinel handling, and exit codes.

use std::process::{Command, Output};

fn sle(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sle"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(args: &[&str]) -> String {
    let out = sle(args);
    assert!(
        out.status.success(),
        "sle {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 output")
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .skip(1)
        .collect()
}

#[test]
fn single_vertical_bernoulli_step_is_the_exact_tip() {
    // One step over [0, 1]: the only point is the slit tip delta + 2i*sqrt(1)
    // with delta = +-sqrt(4 * 1), printed exactly.
    let mut seen = std::collections::BTreeSet::new();
    for seed in 0..8 {
        let csv = stdout_of(&[
            "simulate",
            "-N", "1",
            "-d", "1",
            "--discretization", "vertical",
            "--increments", "bernoulli",
            "--kappa", "4",
            "--seed", &seed.to_string(),
        ]);
        let rows = data_rows(&csv);
        assert_eq!(rows.len(), 1, "exactly one trace point:\n{csv}");
        let fields: Vec<&str> = rows[0].split(',').collect();
        assert_eq!(fields[0], "1");
        assert_eq!(fields[1], "1.0000000000000000e0");
        assert!(
            fields[2] == "2.0000000000000000e0" || fields[2] == "-2.0000000000000000e0",
            "re must be exactly +-2, got {}",
            fields[2]
        );
        assert_eq!(fields[3], "2.0000000000000000e0");
        seen.insert(fields[2].starts_with('-'));
    }
    assert_eq!(seen.len(), 2, "both increment signs appear across seeds");
}

#[test]
fn identical_flags_reproduce_identical_bytes() {
    let args = ["simulate", "-N", "2000", "--seed", "42"];
    assert_eq!(stdout_of(&args), stdout_of(&args));
}

#[test]
fn infinite_gate_factor_reproduces_the_baseline_file() {
    let fast = stdout_of(&[
        "simulate", "-N", "2000", "--seed", "9", "--algorithm", "fast", "-L", "inf",
    ]);
    let slow = stdout_of(&[
        "simulate", "-N", "2000", "--seed", "9", "--algorithm", "baseline",
    ]);
    assert_eq!(fast, slow, "the sentinel must yield a byte-identical file");
}

#[test]
fn csv_fields_round_trip_and_header_echoes_the_config() {
    let csv = stdout_of(&["simulate", "-N", "500", "-d", "50", "--seed", "2"]);
    for key in [
        "# command=simulate",
        "# kappa=",
        "# n_steps=500",
        "# stride=50",
        "# discretization=tilted",
        "# partition=uniform",
        "# increments=gaussian",
        "# seed=2",
        "# algorithm=fast",
        "# block_len=",
        "# order=12",
        "# threshold=",
        "# eps=",
    ] {
        assert!(csv.contains(key), "header must contain `{key}`:\n{csv}");
    }
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 10);
    for row in rows {
        for field in row.split(',').skip(1) {
            let v: f64 = field.parse().expect("numeric field");
            assert_eq!(format!("{v:.16e}"), field, "17 digits round-trip");
        }
    }
}

#[test]
fn compare_reports_sub_target_error_at_defaults() {
    let report: serde_json::Value =
        serde_json::from_str(&stdout_of(&["compare", "--seed", "6"])).expect("valid json");
    assert_eq!(report["command"], "compare");
    assert_eq!(report["seed"], 6);
    assert_eq!(report["points"], 1000);
    let mean = report["mean_error"].as_f64().unwrap();
    let max = report["max_error"].as_f64().unwrap();
    assert!(mean <= 1e-6, "mean error {mean} above the default target");
    assert!(max >= mean);
    assert_eq!(report["fast"]["algorithm"], "fast");
    assert_eq!(report["baseline"]["algorithm"], "baseline");
    assert_eq!(report["fast"]["n_steps"], "10000");
}

#[test]
fn compare_with_infinite_gate_reports_exactly_zero() {
    let report: serde_json::Value = serde_json::from_str(&stdout_of(&[
        "compare", "-N", "1500", "--seed", "8", "-L", "inf",
    ]))
    .expect("valid json");
    assert_eq!(report["mean_error"].as_f64().unwrap(), 0.0);
    assert_eq!(report["max_error"].as_f64().unwrap(), 0.0);
}

#[test]
fn truncation_order_sets_the_error_scale() {
    // At gate factor 4 the error tracks 4^-order, so dropping the order from
    // 12 to 6 costs about 4^6; allow two orders of magnitude of slack.
    let mean_at = |order: &str| -> f64 {
        let report: serde_json::Value = serde_json::from_str(&stdout_of(&[
            "compare", "--seed", "31", "-L", "4", "-n", order,
        ]))
        .expect("valid json");
        report["mean_error"].as_f64().unwrap()
    };
    let coarse = mean_at("6");
    let fine = mean_at("12");
    let ratio = coarse / fine;
    let law = 4f64.powi(6);
    assert!(
        ratio > law / 100.0 && ratio < law * 100.0,
        "error ratio {ratio:.3e} far from {law:.3e}"
    );
}

#[test]
fn sweep_writes_one_row_per_value_and_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("sweep.csv");
    let json_path = dir.path().join("sweep.json");
    let out = sle(&[
        "sweep",
        "-N", "2000",
        "--axis", "order",
        "--values", "6,12",
        "--repetitions", "1",
        "-o", csv_path.to_str().unwrap(),
        "--summary", json_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert!(csv.contains("# axis=order"));
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 2);
    for row in &rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 5, "value,time_per_point,error,samples,seed");
        assert!(!fields[2].is_empty(), "fast rows carry an error column");
        assert_eq!(fields[3], "1");
    }

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(summary["axis"], "order");
    assert_eq!(summary["rows"].as_array().unwrap().len(), 2);
    let e6 = summary["rows"][0]["error"].as_f64().unwrap();
    let e12 = summary["rows"][1]["error"].as_f64().unwrap();
    assert!(e6 > e12, "lower order must be less accurate");
}

#[test]
fn bench_times_both_algorithms_over_the_length_grid() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("bench.csv");
    let json_path = dir.path().join("bench.json");
    let out = sle(&[
        "bench",
        "--values", "1000,2000,4000",
        "--repetitions", "1",
        "--seed", "13",
        "-o", csv_path.to_str().unwrap(),
        "--summary", json_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 6, "three lengths, two algorithms");
    assert_eq!(rows.iter().filter(|r| r.starts_with("baseline,")).count(), 3);
    assert_eq!(rows.iter().filter(|r| r.starts_with("fast,")).count(), 3);

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert!(summary["baseline_slope"].as_f64().is_some());
    assert!(summary["fast_slope"].as_f64().is_some());
    assert!(summary["speedup_at_largest"].as_f64().unwrap() > 0.0);
    assert_eq!(summary["fast_error"].as_array().unwrap().len(), 3);
}

#[test]
fn bad_usage_exits_two_and_bad_values_exit_one() {
    for args in [
        &["sweep", "--axis", "order", "--values", ""][..],
        &["sweep", "--axis", "order"][..],
        &["sweep", "--values", "4,8"][..],
        &["simulate", "-N", "0"][..],
        &["simulate", "--kappa", "-1"][..],
        &["simulate", "-L", "0.5"][..],
        &["simulate", "--eps", "2"][..],
        &["frobnicate"][..],
    ] {
        let code = sle(args).status.code();
        assert_eq!(code, Some(2), "usage error expected for {args:?}");
    }
    // Well-formed flags that fail cross-field validation are runtime errors.
    let out = sle(&["simulate", "-N", "100", "-d", "200"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty(), "runtime errors explain themselves");
    // Unwritable output paths are runtime errors too.
    let out = sle(&["simulate", "-N", "10", "-o", "/nonexistent/dir/x.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    let via_stdout = stdout_of(&["simulate", "-N", "800", "--seed", "3"]);
    let out = sle(&["simulate", "-N", "800", "--seed", "3", "-o", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), via_stdout);
}
