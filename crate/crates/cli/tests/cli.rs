//! End-to-end checks of the binary: flag grammar, exit codes and output
//! stability against the bundled data.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twistact"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

fn config(name: &str) -> String {
    data_dir().join(name).display().to_string()
}

#[test]
fn predict_prints_two_decimal_displacement() {
    let out = run(&["predict", "--config", &config("n6.cfg"), "--turns", "10"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "14.48\n");
}

#[test]
fn predict_supports_zero_offset_normalization() {
    let out = run(&[
        "predict",
        "--config",
        &config("n6.cfg"),
        "--turns",
        "10",
        "--zero-offset",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "14.34\n");
}

#[test]
fn predict_variable_model_exceeds_constant() {
    let constant = stdout(&run(&[
        "predict",
        "--config",
        &config("n2.cfg"),
        "--turns",
        "20",
    ]));
    let variable = stdout(&run(&[
        "predict",
        "--config",
        &config("n2.cfg"),
        "--turns",
        "20",
        "--model",
        "variable",
    ]));
    let c: f64 = constant.trim().parse().unwrap();
    let v: f64 = variable.trim().parse().unwrap();
    assert_eq!(format!("{c:.2}"), "16.35");
    assert_eq!(format!("{v:.2}"), "29.05");
    assert!(v > c);
}

#[test]
fn inverse_recovers_turn_counts() {
    let out = run(&[
        "inverse",
        "--config",
        &config("n6.cfg"),
        "--displacement",
        "14.48",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "10.00\n");
}

#[test]
fn onset_prints_turns() {
    let out = run(&[
        "onset",
        "--config",
        &config("n6.cfg"),
        "--total-length",
        "118.52",
        "--fraction",
        "0.10",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "8.74\n");
}

#[test]
fn bundle_lists_packing_coordinates() {
    let out = run(&["bundle", "--config", &config("n6.cfg")]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("diameter_mm = 0.87"));
    assert_eq!(text.lines().filter(|l| l.contains(',')).count(), 7); // header + 6 circles
    let ring = stdout(&run(&["bundle", "--config", &config("n6.cfg"), "--model", "ring"]));
    assert!(ring.contains("diameter_mm = 0.72"));
}

#[test]
fn calibrate_reports_a_fit_near_the_measured_radius() {
    let out = run(&[
        "calibrate",
        "--config",
        &config("n6.cfg"),
        "--data",
        &config("fig3_n6_approx.csv"),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let radius: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("radius_mm = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((radius - 0.43).abs() < 0.05, "fitted {radius}");
    assert!(text.contains("converged = true"));
}

#[test]
fn compare_declares_the_constant_model_winner() {
    let out = run(&[
        "compare",
        "--config",
        &config("n2.cfg"),
        "--data",
        &config("fig3_n2_approx.csv"),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("winner = constant"));
    assert!(text.contains("turns,measured_mm,residual_constant_mm,residual_variable_mm"));
}

#[test]
fn lifecycle_flags_and_predicts() {
    let out = run(&[
        "lifecycle",
        "--records",
        &config("table7_lifecycle.csv"),
        "--fit",
        "--predict",
        "2",
        "16.06",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.matches(",0\n").count(), 2); // exactly two inconsistent rows
    assert!(text.contains("exponent = -3.2799"));
    assert!(text.contains("predicted_cycles = 1738"));
}

#[test]
fn reproduce_table_two_shows_the_reference_percentages() {
    let out = run(&[
        "reproduce",
        "--table",
        "2",
        "--data-dir",
        &data_dir().display().to_string(),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let percents: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(6).unwrap())
        .collect();
    assert_eq!(percents, vec!["72", "80", "81", "78"]);
}

#[test]
fn usage_errors_exit_one() {
    let negative = run(&["predict", "--config", &config("n6.cfg"), "--turns", "-5"]);
    assert_eq!(negative.status.code(), Some(1));
    let unknown_flag = run(&["predict", "--config", &config("n6.cfg"), "--spin", "3"]);
    assert_eq!(unknown_flag.status.code(), Some(1));
    let no_subcommand = run(&[]);
    assert_eq!(no_subcommand.status.code(), Some(1));
    let bad_table = run(&["reproduce", "--table", "4"]);
    assert_eq!(bad_table.status.code(), Some(1));
    let bad_fraction = run(&[
        "onset",
        "--config",
        &config("n6.cfg"),
        "--total-length",
        "118.52",
        "--fraction",
        "1.5",
    ]);
    assert_eq!(bad_fraction.status.code(), Some(1));
}

#[test]
fn data_errors_exit_two() {
    let missing = run(&["predict", "--config", "no-such-file.cfg", "--turns", "5"]);
    assert_eq!(missing.status.code(), Some(2));
    let dir = tempdir();
    let bad = dir.join("bad.cfg");
    std::fs::write(&bad, "n_strings = six\n").unwrap();
    let malformed = run(&["predict", "--config", &bad.display().to_string(), "--turns", "5"]);
    assert_eq!(malformed.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn divergence_exits_three() {
    let out = run(&[
        "predict",
        "--config",
        &config("n2.cfg"),
        "--turns",
        "170",
        "--model",
        "variable",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("reproduce"));
}

fn tempdir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("twistact-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
