//! End-to-end tests of the binary: byte-identical reruns (the
//! determinism acceptance criterion), the exit-code contract and a few
//! output sanity checks.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_biphoton")
}

/// Fast test configuration: small replica counts and grids.
const TEST_CONFIG: &str = r#"
seed = 7

[source]
f = 0.4

[calibration]
seeds = 10

[slit]
points = 41
x_min = -0.012
x_max = 0.012
chi2_seeds = 10

[qkd]
rounds = 20000
eve = "fixed-basis"
intercept_fraction = 0.5
ratio_rounds = 20000
"#;

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

fn run_ok(args: &[&str]) -> Vec<u8> {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TEST_CONFIG);
    let c = config.to_str().unwrap();
    let commands: Vec<Vec<&str>> = vec![
        vec!["--config", c, "ch-scan", "--steps", "16"],
        vec!["--config", c, "ch-optimize"],
        vec![
            "--config", c, "loophole-map", "--f-steps", "4", "--eta-steps", "4",
        ],
        vec!["--config", c, "casado"],
        vec!["--config", c, "calibrate"],
        vec!["--config", c, "double-slit", "--mode", "sqm"],
        vec!["--config", c, "double-slit", "--mode", "dbb"],
        vec!["--config", c, "double-slit", "--mode", "chi2"],
        vec!["--config", c, "qkd", "run"],
        vec!["--config", c, "qkd", "eve-sweep"],
        vec!["--config", c, "qkd", "ratio"],
    ];
    for args in &commands {
        let first = run_ok(args);
        let second = run_ok(args);
        assert_eq!(first, second, "output of {args:?} not reproducible");
        assert!(!first.is_empty());
        // The metadata preamble is present.
        let text = String::from_utf8(first).unwrap();
        assert!(text.starts_with("# biphoton "), "missing metadata in {args:?}");
        assert!(text.contains("# seed: 7\n"));
        assert!(text.contains("# config-sha256: "));
    }
}

#[test]
fn transcript_file_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TEST_CONFIG);
    let c = config.to_str().unwrap();
    let t1 = dir.path().join("t1.csv");
    let t2 = dir.path().join("t2.csv");
    for t in [&t1, &t2] {
        run_ok(&["--config", c, "qkd", "run", "--transcript", t.to_str().unwrap()]);
    }
    let a = fs::read(&t1).unwrap();
    assert_eq!(a, fs::read(&t2).unwrap());
    assert!(String::from_utf8(a).unwrap().lines().count() > 20000);
}

#[test]
fn seed_override_changes_stochastic_output() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TEST_CONFIG);
    let c = config.to_str().unwrap();
    let a = run_ok(&["--config", c, "calibrate"]);
    let b = run_ok(&["--config", c, "--seed", "8", "calibrate"]);
    assert_ne!(a, b);
}

#[test]
fn output_flag_writes_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TEST_CONFIG);
    let c = config.to_str().unwrap();
    let out_path = dir.path().join("scan.csv");
    let stdout = run_ok(&["--config", c, "ch-scan", "--steps", "16"]);
    run_ok(&[
        "--config", c, "ch-scan", "--steps", "16", "--output",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(stdout, fs::read(&out_path).unwrap());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    // Unknown key.
    let unknown = write_config(dir.path(), "seed = 1\n[source]\nbrightness = 2.0\n");
    assert_eq!(
        run(&["--config", unknown.to_str().unwrap(), "casado"]).status.code(),
        Some(2)
    );
    // Malformed TOML.
    let broken = dir.path().join("broken.toml");
    fs::write(&broken, "seed = [").unwrap();
    assert_eq!(
        run(&["--config", broken.to_str().unwrap(), "casado"]).status.code(),
        Some(2)
    );
    // Missing file.
    assert_eq!(
        run(&["--config", "/nonexistent/x.toml", "casado"]).status.code(),
        Some(2)
    );
    // No --config at all.
    assert_eq!(run(&["casado"]).status.code(), Some(2));
    // Invalid physical parameter.
    let bad_eps = write_config(dir.path(), "[analyzers]\neps_par1 = 1.5\n");
    assert_eq!(
        run(&["--config", bad_eps.to_str().unwrap(), "ch-optimize"]).status.code(),
        Some(2)
    );
}

#[test]
fn non_monotone_eta_grid_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TEST_CONFIG);
    let out = run(&[
        "--config",
        config.to_str().unwrap(),
        "loophole-map",
        "--eta-min",
        "1.0",
        "--eta-max",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runtime_failures_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    // An Eve-information target above the full-interception slope cannot
    // be equalized: valid config, failing computation.
    let config = write_config(
        dir.path(),
        "[qkd]\neve = \"fixed-basis\"\nrounds = 5000\nratio_rounds = 5000\ntarget_information = 0.9\n",
    );
    let out = run(&["--config", config.to_str().unwrap(), "qkd", "ratio"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn dbb_pattern_vanishes_in_same_semiplane() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TEST_CONFIG);
    let text = String::from_utf8(run_ok(&[
        "--config",
        config.to_str().unwrap(),
        "double-slit",
        "--mode",
        "dbb",
    ]))
    .unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    let header: Vec<f64> = rows[0]
        .split(',')
        .skip(1)
        .map(|s| s.parse().unwrap())
        .collect();
    let mut checked = 0;
    for row in &rows[1..] {
        let mut fields = row.split(',');
        let x1: f64 = fields.next().unwrap().parse().unwrap();
        for (x2, value) in header.iter().zip(fields) {
            if x1.signum() == x2.signum() && x1 != 0.0 && *x2 != 0.0 {
                assert_eq!(value, "0", "dbb density nonzero at ({x1}, {x2})");
                checked += 1;
            }
        }
    }
    assert!(checked > 100);
}

#[test]
fn ch_scan_maximally_entangled_has_unit_visibility() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "seed = 1\n[source]\nf = 1.0\n");
    let text = String::from_utf8(run_ok(&[
        "--config",
        config.to_str().unwrap(),
        "ch-scan",
        "--fixed-angle",
        "45",
        "--steps",
        "360",
    ]))
    .unwrap();
    let values: Vec<f64> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("angle"))
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 360);
    let hi = values.iter().cloned().fold(f64::MIN, f64::max);
    let lo = values.iter().cloned().fold(f64::MAX, f64::min);
    let visibility = (hi - lo) / (hi + lo);
    assert!((visibility - 1.0).abs() < 1e-4, "visibility {visibility}");
}

#[test]
fn eve_sweep_qber_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TEST_CONFIG);
    let text = String::from_utf8(run_ok(&[
        "--config",
        config.to_str().unwrap(),
        "qkd",
        "eve-sweep",
    ]))
    .unwrap();
    let qber: Vec<f64> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("intercept"))
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(qber.len(), 5);
    assert!(qber.windows(2).all(|w| w[1] > w[0]), "QBER not monotone: {qber:?}");
}
