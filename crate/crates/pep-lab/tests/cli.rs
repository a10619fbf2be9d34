//! End-to-end checks of the pep-lab executable: output schemas, rerun
//! determinism, config merging, and the exit-code contract.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pep-lab"))
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path.as_ref())
        .unwrap_or_else(|e| panic!("missing {}: {e}", path.as_ref().display()))
}

fn check_schema(text: &str) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let ncols = lines.next().expect("header").split(',').count();
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), ncols);
        for c in cells {
            let v: f64 = c.parse().expect("numeric cell");
            assert!(v.is_finite());
        }
    }
}

#[test]
fn eigen_is_reproducible_and_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    for out in [&out1, &out2] {
        let status = bin()
            .args(["eigen", "--reproducible", "--out"])
            .arg(out)
            .args(["--grid-start", "0.0", "--grid-stop", "3.0", "--grid-points", "61"])
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = read(out1.with_extension("csv"));
    let b = read(out2.with_extension("csv"));
    assert_eq!(a, b, "reruns must be byte-identical under --reproducible");
    check_schema(&a);
    // omega = 0 row: re_w_plus = 1.5, im_w_plus = -0.5
    let first = a.lines().find(|l| l.starts_with("0,")).expect("omega=0 row");
    let cells: Vec<f64> = first.split(',').map(|c| c.parse().unwrap()).collect();
    assert!((cells[1] - 1.5).abs() < 1e-12);
    assert!((cells[2] + 0.5).abs() < 1e-12);
    // at omega = 1.5 all lambda imaginary parts equal -1
    let ep = a.lines().find(|l| l.starts_with("1.5,")).expect("omega=1.5 row");
    let cells: Vec<f64> = ep.split(',').map(|c| c.parse().unwrap()).collect();
    for k in [6, 8, 10] {
        assert!((cells[k] + 1.0).abs() < 1e-12, "column {k}: {}", cells[k]);
    }
}

#[test]
fn population_small_run_matches_analytics() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pop");
    let status = bin()
        .args(["population", "--omega", "0.5", "--omega", "1.0", "--n-levels", "20"])
        .args(["--grid-start", "0.0", "--grid-stop", "3.0", "--grid-points", "31"])
        .args(["--reproducible", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    check_schema(&read(out.with_extension("csv")));
    let summary: serde_json::Value =
        serde_json::from_str(&read(out.with_extension("json"))).unwrap();
    let dev = summary["deviations"]["population_omega_1"].as_f64().unwrap();
    assert!(dev < 1e-3, "deviation {dev}");
    assert!(summary["error"].is_null());
}

#[test]
fn spectrum_beyond_critical_exits_with_regime_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("spectrum_out");
    let status = bin()
        .args(["spectrum", "--omega", "2.0", "--n-levels", "12", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2), "regime violations must exit 2");
    let summary: serde_json::Value =
        serde_json::from_str(&read(out.with_extension("json"))).unwrap();
    assert!(summary["error"].as_str().unwrap().contains("no steady state"));
}

#[test]
fn usage_error_exits_one() {
    let status = bin().args(["population", "--no-such-flag"]).status().unwrap();
    assert_eq!(status.code(), Some(1));
    let status = bin().args(["frobnicate"]).status().unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn config_file_merges_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.json");
    std::fs::write(
        &cfg_path,
        r#"{"delta": 1.0, "omega": [0.4], "n_levels": 12,
            "t_grid": {"start": 0.0, "stop": 2.0, "points": 11}}"#,
    )
    .unwrap();
    let out = dir.path().join("run");
    let status = bin()
        .args(["population", "--config"])
        .arg(&cfg_path)
        .args(["--delta", "1.5", "--reproducible", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = read(out.with_extension("csv"));
    assert!(csv.contains("# delta=1.5"), "flag must override the config file");
    assert!(csv.contains("# n_levels=12"), "config value must survive");
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count() - 1, 11);
}

#[test]
fn coherence_constant_columns_at_critical_drive() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("coh");
    let oc = 2.5f64.sqrt();
    let status = bin()
        .args(["coherence", "--omega", &format!("{oc}"), "--n-levels", "24"])
        .args(["--grid-start", "0.0", "--grid-stop", "2.0", "--grid-points", "9"])
        .args(["--reproducible", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = read(out.with_extension("csv"));
    check_schema(&csv);
    for line in csv.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((cells[2] - 1.0).abs() < 1e-12, "g1 analytic must be 1");
        assert!((cells[4] - 3.0).abs() < 1e-12, "g2 analytic must be 3");
    }
}

#[test]
fn gapscan_small_emits_curves_minima_and_fits() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gap");
    let status = bin()
        .args(["gapscan", "--delta", "1.0"])
        .args(["--n-value", "5", "--n-value", "7", "--n-value", "9"])
        .args(["--grid-start", "1.0", "--grid-stop", "2.6", "--grid-points", "17"])
        .args(["--reproducible", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let curves = read(format!("{}_curves.csv", out.display()));
    let minima = read(format!("{}_minima.csv", out.display()));
    check_schema(&curves);
    check_schema(&minima);
    assert_eq!(minima.lines().filter(|l| !l.starts_with('#')).count() - 1, 3);
    let summary: serde_json::Value =
        serde_json::from_str(&read(out.with_extension("json"))).unwrap();
    assert!(summary["deviations"]["gap_fit"]["b"].as_f64().unwrap() > 0.0);
}

#[test]
fn husimi_grid_normalized() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("q");
    let status = bin()
        .args(["husimi", "--omega", "0.5", "--n-levels", "16"])
        .args(["--alpha-extent", "3.5", "--alpha-points", "61"])
        .args(["--reproducible", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&read(out.with_extension("json"))).unwrap();
    let dev = summary["deviations"]["husimi_normalization_minus_one"].as_f64().unwrap();
    assert!(dev < 1e-2, "normalization deviation {dev}");
}

#[test]
fn verify_subset_runs_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("verify");
    let output = bin()
        .args(["verify", "--only", "1", "--only", "10", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("criterion 01 [PASS]"), "stdout:\n{stdout}");
    let report: serde_json::Value =
        serde_json::from_str(&read(out.with_extension("json"))).unwrap();
    assert_eq!(report["criteria"].as_array().unwrap().len(), 2);
}

#[test]
fn gamma_flag_rescales_presentation_only() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("g1");
    let out2 = dir.path().join("g2x");
    for (out, gamma) in [(&out1, "1.0"), (&out2, "2.0")] {
        let status = bin()
            .args(["eigen", "--gamma", gamma, "--reproducible"])
            .args(["--grid-start", "0.0", "--grid-stop", "3.0", "--grid-points", "7"])
            .args(["--out"])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let rows = |p: &Path| -> Vec<Vec<f64>> {
        read(p.with_extension("csv"))
            .lines()
            .filter(|l| !l.starts_with('#'))
            .skip(1)
            .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
            .collect()
    };
    let a = rows(&out1);
    let b = rows(&out2);
    for (ra, rb) in a.iter().zip(&b) {
        for (va, vb) in ra.iter().zip(rb) {
            assert!((vb - 2.0 * va).abs() < 1e-12, "{vb} vs 2*{va}");
        }
    }
}
